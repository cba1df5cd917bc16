"""Resilience scoring for EV charging stations from hazard and infrastructure layers."""

__version__ = "0.1.0"
