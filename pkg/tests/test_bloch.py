"""Unit tests for dephasim.bloch module."""

import math
import unittest

import numpy as np

from dephasim.bloch import (
    EvolutionParams,
    PolarizationState,
    Trajectory,
    classify_regime,
    damped_oscillation_pz,
    derivative,
    effective_params,
    evolve,
    rk4_propagator,
    rk4_step,
    zeno_pz,
    zeno_timescale,
)
from dephasim.errors import InvalidParameterError
from dephasim.influence import InfluenceResult


class TestPolarizationState(unittest.TestCase):
    """Tests for PolarizationState."""

    def test_pointer_states(self):
        """Test pointer states sit on one dot."""
        self.assertEqual(PolarizationState.pointer("L").prob_left, 1.0)
        self.assertEqual(PolarizationState.pointer("R").prob_left, 0.0)

    def test_norm_limit(self):
        """Test |P| above one is rejected but rounding noise is tolerated."""
        PolarizationState([0.0, 0.0, 1.0 + 1e-10])
        with self.assertRaises(InvalidParameterError):
            PolarizationState([0.8, 0.8, 0.0])

    def test_wrong_shape(self):
        """Test a two-component vector is rejected."""
        with self.assertRaises(InvalidParameterError):
            PolarizationState([0.0, 1.0])

    def test_density_matrix(self):
        """Test the density matrix has unit trace and the right populations."""
        rho = PolarizationState([0.6, 0.0, 0.8]).density_matrix()
        self.assertAlmostEqual(np.trace(rho).real, 1.0)
        self.assertAlmostEqual(rho[0, 0].real, 0.9)
        self.assertAlmostEqual(rho[0, 1].real, 0.3)


class TestEvolutionParams(unittest.TestCase):
    """Tests for EvolutionParams."""

    def test_negative_damping(self):
        """Test negative d is rejected."""
        with self.assertRaises(InvalidParameterError) as ctx:
            EvolutionParams(v=[1.0, 0.0, 0.0], d=-0.1)
        self.assertEqual(ctx.exception.name, "d")

    def test_v_tr(self):
        """Test v_tr is the transverse magnitude."""
        self.assertAlmostEqual(EvolutionParams(v=[3.0, 4.0, 7.0]).v_tr, 5.0)

    def test_max_step(self):
        """Test the step cap scales with the fastest rate."""
        self.assertAlmostEqual(EvolutionParams(v=[3.0, 4.0, 0.0], d=2.0).max_step(), 0.002)
        self.assertAlmostEqual(EvolutionParams(v=[0.0, 0.0, 0.0], d=50.0).max_step(), 0.0002)
        self.assertGreater(EvolutionParams(v=[0.0, 0.0, 0.0]).max_step(), 1e6)


class TestDerivative(unittest.TestCase):
    """Tests for derivative."""

    def test_stationary_pointer(self):
        """Test a pointer state with only V_z does not move."""
        rate = derivative(PolarizationState.pointer(), EvolutionParams(v=[0.0, 0.0, 2.0], d=3.0))
        np.testing.assert_array_equal(rate, [0.0, 0.0, 0.0])

    def test_pure_damping(self):
        """Test pure transverse damping."""
        rate = derivative(PolarizationState([1.0, 0.0, 0.0]), EvolutionParams(v=[0.0, 0.0, 0.0], d=1.0))
        np.testing.assert_array_equal(rate, [-1.0, 0.0, 0.0])

    def test_tunneling(self):
        """Test tunneling rotates P_z into -P_y."""
        rate = derivative(PolarizationState.pointer(), EvolutionParams(v=[0.7, 0.0, 0.0]))
        np.testing.assert_allclose(rate, [0.0, -0.7, 0.0])

    def test_generator_matches_derivative(self):
        """Test the linear generator reproduces the right-hand side."""
        params = EvolutionParams(v=[0.3, -0.2, 0.9], d=0.4)
        p = PolarizationState([0.1, 0.5, -0.3])
        np.testing.assert_allclose(params.generator() @ p.p, derivative(p, params), atol=1e-15)


class TestEffectiveParams(unittest.TestCase):
    """Tests for effective_params."""

    def test_zero_influence(self):
        """Test zero influence is the identity."""
        intrinsic = EvolutionParams(v=[1.0, 0.5, -0.2], d=0.3)
        result = effective_params(intrinsic, InfluenceResult.zero())
        np.testing.assert_array_equal(result.v, intrinsic.v)
        self.assertEqual(result.d, intrinsic.d)

    def test_cancellation(self):
        """Test tuning V_z against the induced shift makes the dots degenerate."""
        infl = InfluenceResult.from_lambda(0.4 + 0.1j)
        result = effective_params(EvolutionParams(v=[1.0, 0.0, -0.4]), infl)
        self.assertEqual(result.v[2], 0.0)
        self.assertAlmostEqual(result.d, 0.1)

    def test_sums(self):
        """Test componentwise addition and that the input is untouched."""
        intrinsic = EvolutionParams(v=[1.0, 2.0, 3.0], d=0.5)
        result = effective_params(intrinsic, InfluenceResult.from_lambda(-0.25 + 2.0j))
        np.testing.assert_allclose(result.v, [1.0, 2.0, 2.75])
        self.assertAlmostEqual(result.d, 2.5)
        self.assertEqual(intrinsic.v[2], 3.0)


class TestRk4(unittest.TestCase):
    """Tests for the RK4 step and its matrix form."""

    def test_propagator_matches_step(self):
        """Test the propagator equals one explicit RK4 step."""
        params = EvolutionParams(v=[0.8, -0.3, 0.5], d=0.7)
        p = PolarizationState([0.2, -0.4, 0.6])
        h = params.max_step()
        np.testing.assert_allclose(rk4_propagator(params, h) @ p.p, rk4_step(p, params, h), atol=1e-15)


class TestEvolve(unittest.TestCase):
    """Tests for evolve."""

    def test_constant_without_dynamics(self):
        """Test V=0, D=0 keeps the state fixed."""
        p0 = PolarizationState([0.3, 0.4, 0.5])
        trajectory = evolve(p0, EvolutionParams(v=[0.0, 0.0, 0.0]), 5.0, step=0.5)
        for point in trajectory.points:
            np.testing.assert_array_equal(point, p0.p)

    def test_pure_damping_decay(self):
        """Test transverse decay e^{-Dt} with constant P_z."""
        trajectory = evolve(PolarizationState([1.0, 0.0, 0.0]), EvolutionParams(v=[0.0, 0.0, 0.0], d=1.0), 1.0)
        np.testing.assert_allclose(trajectory.final.p, [math.exp(-1.0), 0.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(trajectory.points[:, 0], np.exp(-trajectory.times), atol=1e-6)

    def test_time_grid(self):
        """Test the last sample lands exactly on t_end and times increase."""
        params = EvolutionParams(v=[1.0, 0.0, 0.0])
        trajectory = evolve(PolarizationState.pointer(), params, 1.234, sample_every=7)
        self.assertEqual(trajectory.times[0], 0.0)
        self.assertEqual(trajectory.times[-1], 1.234)
        self.assertTrue(np.all(np.diff(trajectory.times) > 0))
        self.assertEqual(len(trajectory), len(trajectory.states))

    def test_zero_duration(self):
        """Test t_end=0 returns just the initial state."""
        trajectory = evolve(PolarizationState.pointer(), EvolutionParams(v=[1.0, 0.0, 0.0]), 0.0)
        self.assertEqual(len(trajectory), 1)

    def test_pz_conserved_without_tunneling(self):
        """Test P_z does not drift when V_x = V_y = 0."""
        p0 = PolarizationState([0.6, 0.0, 0.8])
        trajectory = evolve(p0, EvolutionParams(v=[0.0, 0.0, 2.0], d=0.5), 10.0)
        drift = np.abs(np.diff(trajectory.points[:, 2]))
        self.assertLess(drift.max(), 1e-12)

    def test_norm_non_increasing(self):
        """Test |P| never grows along damped trajectories."""
        cases = [
            ([1.0, 0.0, 0.0], [0.5, 0.3, 0.2], 0.1),
            ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], 2.0),
            ([0.3, -0.4, 0.5], [0.2, -1.0, 0.7], 0.6),
        ]
        for p0, v, d in cases:
            trajectory = evolve(PolarizationState(p0), EvolutionParams(v=v, d=d), 10.0)
            self.assertTrue(np.all(np.diff(trajectory.norms) <= 1e-12))

    def test_norm_conserved_without_damping(self):
        """Test |P| stays one for a pure state without damping."""
        trajectory = evolve(PolarizationState.pointer(), EvolutionParams(v=[1.0, 0.5, 0.3]), 20.0)
        np.testing.assert_allclose(trajectory.norms, 1.0, atol=1e-8)

    def test_damped_oscillation(self):
        """Test P_z against the analytic damped oscillation."""
        params = EvolutionParams(v=[1.0, 0.0, 0.0], d=0.2)
        trajectory = evolve(PolarizationState.pointer(), params, 20.0)
        expected = damped_oscillation_pz(1.0, 0.2, trajectory.times)
        np.testing.assert_allclose(trajectory.points[:, 2], expected, atol=1e-6)

    def test_step_halving(self):
        """Test halving the step changes the final state by less than 1e-8."""
        params = EvolutionParams(v=[1.0, 0.0, 0.0], d=0.2)
        full = evolve(PolarizationState.pointer(), params, 20.0, step=params.max_step())
        half = evolve(PolarizationState.pointer(), params, 20.0, step=params.max_step() / 2)
        self.assertLess(np.max(np.abs(full.final.p - half.final.p)), 1e-8)

    def test_step_too_large(self):
        """Test a step above the stability cap is rejected."""
        with self.assertRaises(InvalidParameterError) as ctx:
            evolve(PolarizationState.pointer(), EvolutionParams(v=[1.0, 0.0, 0.0]), 1.0, step=0.5)
        self.assertEqual(ctx.exception.name, "step")

    def test_negative_t_end(self):
        """Test negative t_end is rejected."""
        with self.assertRaises(InvalidParameterError):
            evolve(PolarizationState.pointer(), EvolutionParams(v=[1.0, 0.0, 0.0]), -1.0)


class TestTrajectory(unittest.TestCase):
    """Tests for Trajectory validation."""

    def test_unequal_lengths(self):
        """Test mismatched lengths raise."""
        with self.assertRaises(ValueError):
            Trajectory(times=np.array([0.0, 1.0]), points=np.zeros((3, 3)))

    def test_non_increasing_times(self):
        """Test repeated times raise."""
        with self.assertRaises(ValueError):
            Trajectory(times=np.array([0.0, 1.0, 1.0]), points=np.zeros((3, 3)))


class TestZeno(unittest.TestCase):
    """Tests for the strong-damping (watched-pot) behavior."""

    def test_timescale(self):
        """Test D/V_tr^2."""
        self.assertEqual(zeno_timescale(1.0, 50.0), 50.0)
        self.assertEqual(zeno_timescale(1.0, 1.0), 1.0)
        self.assertEqual(zeno_timescale(2.0, 8.0), 2.0)

    def test_timescale_without_tunneling(self):
        """Test v_tr=0 is rejected."""
        with self.assertRaises(InvalidParameterError):
            zeno_timescale(0.0, 1.0)

    def test_slowed_relaxation(self):
        """Test P_z(D/V_tr^2) = e^{-1} within 5% for D/V_tr = 50."""
        params = EvolutionParams(v=[1.0, 0.0, 0.0], d=50.0)
        trajectory = evolve(PolarizationState.pointer(), params, 50.0)
        self.assertLess(abs(trajectory.final.p[2] / math.exp(-1.0) - 1.0), 0.05)

    def test_asymptote_over_three_timescales(self):
        """Test the exponential asymptote holds over [0, 3 D/V_tr^2]."""
        params = EvolutionParams(v=[1.0, 0.0, 0.0], d=50.0)
        trajectory = evolve(PolarizationState.pointer(), params, 150.0, sample_every=5000)
        expected = zeno_pz(1.0, 50.0, trajectory.times)
        np.testing.assert_allclose(trajectory.points[:, 2], expected, rtol=0.05)


class TestDampedOscillation(unittest.TestCase):
    """Tests for damped_oscillation_pz in all three damping regimes."""

    def test_initial_conditions(self):
        """Test P_z(0)=1 in every regime."""
        for d in (0.2, 2.0, 5.0):
            self.assertAlmostEqual(float(damped_oscillation_pz(1.0, d, 0.0)), 1.0)

    def test_matches_integration(self):
        """Test critical and overdamped forms against evolve."""
        for d in (2.0, 5.0):
            params = EvolutionParams(v=[1.0, 0.0, 0.0], d=d)
            trajectory = evolve(PolarizationState.pointer(), params, 10.0)
            expected = damped_oscillation_pz(1.0, d, trajectory.times)
            np.testing.assert_allclose(trajectory.points[:, 2], expected, atol=1e-6)


class TestClassifyRegime(unittest.TestCase):
    """Tests for classify_regime."""

    def test_weak_damping_frozen(self):
        """Test weak damping with many probes per tunneling time."""
        report = classify_regime(1.0, 0.1, 100.0)
        self.assertFalse(report.strong_damping)
        self.assertTrue(report.frozen_dot_valid)
        self.assertTrue(report.counting_valid)
        self.assertEqual(report.relaxation_time, 1.0)

    def test_weakened_condition_only_under_strong_damping(self):
        """Test the weakened condition is left unassessed for weak damping."""
        with self.assertLogs("dephasim.bloch", level="WARNING"):
            report = classify_regime(1.0, 0.5, 4.0)
        self.assertFalse(report.strong_damping)
        self.assertEqual(report.weakened_ratio, 16.0)
        self.assertIsNone(report.weakened_valid)
        self.assertFalse(report.counting_valid)

    def test_strong_damping_weakened_condition(self):
        """Test strong damping satisfies the weakened condition."""
        report = classify_regime(1.0, 50.0, 50.0)
        self.assertTrue(report.strong_damping)
        self.assertEqual(report.weakened_ratio, 2500.0)
        self.assertTrue(report.weakened_valid)
        self.assertEqual(report.relaxation_time, 50.0)

    def test_violated(self):
        """Test too few probes flags the frozen-dot condition."""
        with self.assertLogs("dephasim.bloch", level="WARNING"):
            report = classify_regime(1.0, 0.1, 2.0)
        self.assertFalse(report.frozen_dot_valid)
        self.assertFalse(report.counting_valid)

    def test_degenerate(self):
        """Test v_tr=0 yields a degenerate report."""
        report = classify_regime(0.0, 1.0, 5.0)
        self.assertTrue(report.degenerate)
        self.assertIsNone(report.damping_ratio)
        self.assertEqual(report.relaxation_time, math.inf)

    def test_negative_input(self):
        """Test negative rates raise."""
        with self.assertRaises(InvalidParameterError):
            classify_regime(1.0, -0.1, 1.0)


if __name__ == '__main__':
    unittest.main()
