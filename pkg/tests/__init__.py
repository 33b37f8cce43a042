"""Test suite for linoptsim."""
