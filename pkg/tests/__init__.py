"""Unit tests for dephasim package."""
