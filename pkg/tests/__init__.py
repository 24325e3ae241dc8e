"""Tests for the mmdt detector."""
