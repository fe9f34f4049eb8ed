"""Tests for spin_expansion package."""
