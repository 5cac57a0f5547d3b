"""
Tests for the projflow package.
"""
