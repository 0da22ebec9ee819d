"""Supervisor synthesis for discrete event systems."""
