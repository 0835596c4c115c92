"""Scenario configuration files.

A scenario file is flat ``key = value`` text with dotted section prefixes::

    scenario = influence
    barrier_l.theta = 0.6
    barrier_r.theta = 0.4
    detector.flux = 1.0

Values are typed with a YAML scalar load; ``#`` starts a comment.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from dephasim.bloch import EvolutionParams, PolarizationState, effective_params
from dephasim.counting import MixtureSpec, SEED_LIMIT
from dephasim.errors import ConfigError, InvalidParameterError
from dephasim.influence import DetectorSetup, influence, landauer_flux
from dephasim.smatrix import BarrierParams, Direction, transmission_probability

logger = logging.getLogger(__name__)

SCENARIO_KINDS = ("influence", "evolve", "counts", "simulate", "fringe", "sweep")
DEFAULT_OUTPUT_DIR = "dephasim-out"

FLOAT_KEYS = {
    "barrier_l.theta", "barrier_l.phi", "barrier_l.eta",
    "barrier_r.theta", "barrier_r.phi", "barrier_r.eta",
    "detector.flux", "detector.v_d", "detector.e", "detector.hbar",
    "fringe.dwell_time",
    "evolution.v_x", "evolution.v_y", "evolution.v_z", "evolution.d",
    "evolution.p0_x", "evolution.p0_y", "evolution.p0_z",
    "evolution.t_end", "evolution.step",
    "mixture.rho_ll", "mixture.p_l", "mixture.p_r",
    "sweep.min", "sweep.max",
}
INT_KEYS = {
    "seed", "evolution.sample_every",
    "counts.n", "counts.n1", "counts.n2",
    "simulate.n", "simulate.runs", "simulate.n1", "simulate.n2",
    "sweep.points",
}
BOOL_KEYS = {"evolution.include_detector"}
STR_KEYS = {"scenario", "output.dir", "detector.direction", "sweep.scenario", "sweep.axis"}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | BOOL_KEYS | STR_KEYS

REQUIRED_KEYS = {
    "influence": ["barrier_l.theta", "barrier_r.theta"],
    "fringe": ["barrier_l.theta", "barrier_r.theta", "fringe.dwell_time"],
    "evolve": ["evolution.t_end"],
    "counts": ["mixture.rho_ll", "counts.n"],
    "simulate": ["mixture.rho_ll", "simulate.n", "simulate.runs"],
    "sweep": ["sweep.scenario", "sweep.axis", "sweep.min", "sweep.max", "sweep.points"],
}


def _coerce(key: str, raw: str, line: int) -> Any:
    try:
        value = yaml.safe_load(raw) if raw else None
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value {raw!r}: {e}", key=key, line=line)
    if value is None:
        raise ConfigError("missing value", key=key, line=line)

    if key in FLOAT_KEYS:
        # YAML 1.1 reads exponents without a dot (1e-3) as strings
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {raw!r}", key=key, line=line)
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"must be finite, got {raw!r}", key=key, line=line)
        return value
    if key in INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {raw!r}", key=key, line=line)
        return value
    if key in BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {raw!r}", key=key, line=line)
        return value
    return str(value)


@dataclass
class ScenarioConfig:
    """Validated scenario configuration."""

    kind: str
    values: Dict[str, Any]
    lines: Dict[str, int] = field(default_factory=dict)
    text: str = ""

    def has(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def error(self, message: str, key: Optional[str] = None) -> ConfigError:
        return ConfigError(message, key=key, line=self.lines.get(key) if key else None)

    def require(self, key: str) -> Any:
        if key not in self.values:
            raise self.error("required key is missing", key)
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values.get("seed", 0)

    @property
    def output_dir(self) -> Path:
        return Path(self.values.get("output.dir", DEFAULT_OUTPUT_DIR))

    def with_values(self, **overrides: Any) -> "ScenarioConfig":
        values = dict(self.values)
        values.update(overrides)
        return replace(self, values=values)

    def _build(self, section: str, factory, *args, **kwargs):
        """Call a domain constructor, reporting parameter errors against config keys."""
        try:
            return factory(*args, **kwargs)
        except InvalidParameterError as e:
            key = f"{section}.{e.name}" if section else e.name
            raise self.error(str(e), key)

    # --- domain objects -------------------------------------------------

    def has_barriers(self) -> bool:
        return self.has("barrier_l.theta") and self.has("barrier_r.theta")

    def barrier(self, side: str) -> BarrierParams:
        section = f"barrier_{side}"
        return self._build(
            section,
            BarrierParams,
            theta=self.require(f"{section}.theta"),
            phi=self.get(f"{section}.phi", 0.0),
            eta=self.get(f"{section}.eta", 0.0),
        )

    def direction(self) -> Direction:
        return self._build("detector", Direction.parse, self.get("detector.direction", "forward"))

    def flux(self) -> float:
        """Probing flux, given directly or through the Landauer formula."""
        if self.has("detector.flux") and self.has("detector.v_d"):
            raise self.error("set either detector.flux or detector.v_d, not both", "detector.v_d")
        if self.has("detector.v_d"):
            return self._build(
                "detector",
                landauer_flux,
                self.values["detector.v_d"],
                e=self.get("detector.e", 1.0),
                hbar=self.get("detector.hbar", 1.0),
            )
        if not self.has("detector.flux"):
            raise self.error("either detector.flux or detector.v_d is required", "detector.flux")
        return self.values["detector.flux"]

    def detector_setup(self, direction: Optional[Direction] = None) -> DetectorSetup:
        return self._build(
            "detector",
            DetectorSetup,
            barrier_l=self.barrier("l"),
            barrier_r=self.barrier("r"),
            flux=self.flux(),
            direction=direction or self.direction(),
        )

    def mixture(self) -> MixtureSpec:
        """Mixture from mixture.* keys; p_l / p_r default to the barrier transmissions."""
        rho_ll = self.require("mixture.rho_ll")
        probs = {}
        for side in ("l", "r"):
            key = f"mixture.p_{side}"
            if self.has(key):
                probs[side] = self.values[key]
            elif self.has(f"barrier_{side}.theta"):
                probs[side] = transmission_probability(self.barrier(side))
            else:
                raise self.error(f"required unless barrier_{side}.theta is set", key)
        return self._build(
            "mixture", MixtureSpec.from_rho, rho_ll, probs["l"], probs["r"]
        )

    def evolution_params(self) -> EvolutionParams:
        """Intrinsic energies and damping, plus the detector's influence if requested."""
        v = [self.get(f"evolution.v_{axis}", 0.0) for axis in "xyz"]
        try:
            params = EvolutionParams(v=np.array(v), d=self.get("evolution.d", 0.0))
        except InvalidParameterError as e:
            key = "evolution.d" if e.name == "d" else "evolution.v_x"
            raise self.error(str(e), key)
        if self.get("evolution.include_detector", False):
            params = effective_params(params, influence(self.detector_setup()))
        return params

    def initial_state(self) -> PolarizationState:
        p = [self.get(f"evolution.p0_{axis}", 1.0 if axis == "z" else 0.0) for axis in "xyz"]
        try:
            return PolarizationState(np.array(p))
        except InvalidParameterError as e:
            raise self.error(str(e), "evolution.p0_z")

    # --- sweep ----------------------------------------------------------

    def sweep_axis(self) -> str:
        return resolve_key(self.require("sweep.axis"), self.lines.get("sweep.axis"))

    def sweep_values(self) -> np.ndarray:
        points = self.require("sweep.points")
        return np.linspace(self.require("sweep.min"), self.require("sweep.max"), points)

    def expand(self) -> List["ScenarioConfig"]:
        """One config per sweep point, each of the swept scenario kind."""
        if self.kind != "sweep":
            return [self]
        axis = self.sweep_axis()
        target = self.require("sweep.scenario")
        points = [float(value) for value in self.sweep_values()]
        if axis in INT_KEYS:
            rounded = [round(value) for value in points]
            if any(abs(value - r) > 1e-9 * max(1.0, abs(r)) for value, r in zip(points, rounded)):
                raise self.error(
                    f"integer parameter {axis} needs integral sweep points; adjust sweep.min, "
                    "sweep.max or sweep.points",
                    "sweep.axis",
                )
            points = rounded
        return [replace(self, kind=target, values={**self.values, axis: value}) for value in points]


def _sweepable(key: str) -> bool:
    return (key in FLOAT_KEYS or key in INT_KEYS) and not key.startswith("sweep.")


def resolve_key(axis: str, line: Optional[int] = None) -> str:
    """Resolve a sweep axis, accepting a bare parameter name such as ``v_d``."""
    if _sweepable(axis):
        return axis
    matches = sorted(k for k in FLOAT_KEYS | INT_KEYS if _sweepable(k) and k.split(".")[-1] == axis)
    if len(matches) == 1:
        return matches[0]
    if matches:
        raise ConfigError(f"ambiguous axis {axis!r}: {', '.join(matches)}", key="sweep.axis", line=line)
    raise ConfigError(f"{axis!r} is not a numeric parameter", key="sweep.axis", line=line)


def _validate(config: ScenarioConfig) -> None:
    kind = config.kind
    for key in REQUIRED_KEYS[kind]:
        config.require(key)

    if "seed" in config.values and not 0 <= config.seed < SEED_LIMIT:
        raise config.error("must be an unsigned 64-bit integer", "seed")

    if kind == "sweep":
        target = config.values["sweep.scenario"]
        if target not in SCENARIO_KINDS or target == "sweep":
            raise config.error(
                f"must be one of {', '.join(k for k in SCENARIO_KINDS if k != 'sweep')}",
                "sweep.scenario",
            )
        if config.values["sweep.points"] < 2:
            raise config.error("must be >= 2", "sweep.points")
        config.sweep_axis()
        for point in config.expand():
            _validate(point)
        return

    if kind in ("influence", "fringe"):
        config.detector_setup()
        if kind == "fringe" and config.values["fringe.dwell_time"] < 0:
            raise config.error("must be >= 0", "fringe.dwell_time")
    elif kind == "evolve":
        params = config.evolution_params()
        config.initial_state()
        if config.values["evolution.t_end"] < 0:
            raise config.error("must be >= 0", "evolution.t_end")
        if config.get("evolution.sample_every", 1) < 1:
            raise config.error("must be >= 1", "evolution.sample_every")
        if config.has("evolution.step") and not config.values["evolution.step"] > 0:
            raise config.error("must be > 0", "evolution.step")
        if config.has("evolution.step") and config.values["evolution.step"] > params.max_step():
            raise config.error(f"exceeds the stability cap {params.max_step()!r}", "evolution.step")
    elif kind in ("counts", "simulate"):
        config.mixture()
        for key in (f"{kind}.n", f"{kind}.n1", f"{kind}.n2", "simulate.runs"):
            if config.has(key) and config.values[key] < 1:
                raise config.error("must be >= 1", key)
        if kind == "simulate":
            n1, n2 = window_sizes(config)
            if n1 + n2 > config.values["simulate.n"]:
                raise config.error("simulate.n1 + simulate.n2 must not exceed simulate.n", "simulate.n2")


def window_sizes(config: ScenarioConfig) -> tuple:
    """Correlation window sizes for counts / simulate scenarios."""
    section = config.kind
    n = config.require(f"{section}.n")
    default = max(1, n // 2) if section == "counts" else max(1, min(10, n // 2))
    return config.get(f"{section}.n1", default), config.get(f"{section}.n2", default)


def parse_config(text: str, kind: Optional[str] = None) -> ScenarioConfig:
    """
    Parse and validate scenario configuration text.

    Args:
        text: Configuration file content
        kind: Scenario kind requested on the command line; must match the file's
            ``scenario`` key when both are present

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigError: On unknown, duplicate, missing or out-of-range keys
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        stripped = raw_line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line=number)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=key, line=number)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=number)
        values[key] = _coerce(key, raw, number)
        lines[key] = number

    file_kind = values.get("scenario")
    if kind and file_kind and kind != file_kind:
        raise ConfigError(
            f"file describes a {file_kind!r} scenario but {kind!r} was requested",
            key="scenario",
            line=lines.get("scenario"),
        )
    kind = kind or file_kind
    if kind is None:
        raise ConfigError("required key is missing", key="scenario")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(
            f"must be one of {', '.join(SCENARIO_KINDS)}", key="scenario", line=lines.get("scenario")
        )

    config = ScenarioConfig(kind=kind, values=values, lines=lines, text=text)
    _validate(config)
    logger.debug(f"Parsed {kind} scenario with {len(values)} keys")
    return config


def load_config(path: Path, kind: Optional[str] = None) -> ScenarioConfig:
    """
    Read and parse a scenario file.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If the content is invalid
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data[:e.start].count(b"\n") + 1
        raise ConfigError(f"file is not valid UTF-8 (byte {data[e.start]:#04x})", line=line)
    return parse_config(text, kind)


TEMPLATES = {
    "influence": """\
scenario = influence
# detector barrier when the electron sits on the left / right dot
barrier_l.theta = 0.6
barrier_l.phi = 0.3
barrier_l.eta = 0.2
barrier_r.theta = 0.4
barrier_r.phi = 0.0
barrier_r.eta = 0.0
detector.flux = 1.0
output.dir = dephasim-out/influence
""",
    "fringe": """\
scenario = fringe
# equal transmission, different phase
barrier_l.theta = 0.5
barrier_l.phi = 0.3
barrier_r.theta = 0.5
barrier_r.phi = 0.0
detector.v_d = 1.0
detector.direction = forward
fringe.dwell_time = 5.0
output.dir = dephasim-out/fringe
""",
    "evolve": """\
scenario = evolve
evolution.v_x = 1.0
evolution.v_z = 0.0
evolution.d = 0.2
evolution.p0_z = 1.0
evolution.t_end = 20.0
evolution.sample_every = 10
output.dir = dephasim-out/evolve
""",
    "counts": """\
scenario = counts
mixture.rho_ll = 0.5
mixture.p_l = 0.9
mixture.p_r = 0.1
counts.n = 10
counts.n1 = 10
counts.n2 = 10
output.dir = dephasim-out/counts
""",
    "simulate": """\
scenario = simulate
seed = 12345
mixture.rho_ll = 0.5
mixture.p_l = 0.9
mixture.p_r = 0.1
simulate.n = 100
simulate.runs = 10000
simulate.n1 = 10
simulate.n2 = 10
output.dir = dephasim-out/simulate
""",
    "sweep": """\
scenario = sweep
sweep.scenario = fringe
sweep.axis = v_d
sweep.min = 0.0
sweep.max = 3.141592653589793
sweep.points = 50
barrier_l.theta = 0.5
barrier_l.phi = 0.3
barrier_r.theta = 0.5
barrier_r.phi = 0.0
fringe.dwell_time = 5.0
output.dir = dephasim-out/sweep
""",
}


def init_config(kind: str, target_dir: Optional[Path] = None) -> Path:
    """
    Write a commented template for a scenario kind to <target_dir>/<kind>.conf.

    Raises:
        ValueError: If the kind is unknown
        FileExistsError: If the file already exists
    """
    if kind not in TEMPLATES:
        raise ValueError(f"Unknown scenario {kind!r}. Available: {', '.join(SCENARIO_KINDS)}")
    target_dir = Path(target_dir) if target_dir is not None else Path.cwd()
    path = target_dir / f"{kind}.conf"
    if path.exists():
        raise FileExistsError(f"{path} already exists. Remove it first to regenerate it.")
    target_dir.mkdir(parents=True, exist_ok=True)
    path.write_text(TEMPLATES[kind], encoding="utf-8")
    return path
