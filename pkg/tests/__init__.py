"""Tests for ClaudeCraft."""
