"""Tests for :mod:`lumenplan`."""
