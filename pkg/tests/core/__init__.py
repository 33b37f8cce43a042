"""Tests for the Fock-space core."""
