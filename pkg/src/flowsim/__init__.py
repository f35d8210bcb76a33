"""Deterministic headless microscopic traffic-flow simulator."""
__version__ = "0.1.0"
SCHEMA = "flowsim/1"
