"""Limit theorems for random processes with immigration: simulators, limit samplers and asymptotics."""

__version__ = "0.1.0"
