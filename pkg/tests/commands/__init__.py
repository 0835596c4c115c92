"""Tests for dephasim.commands package."""
