"""Closed-loop simulation of a wind turbine with redundant pitch actuators,
online actuator identification and fault-tolerant control allocation."""

from faultsim.core import (
    IntegrationError,
    StateVector,
    TimeGrid,
    Trajectory,
    integrate,
    jacobi_eigvalsh,
    rk4_step,
)

__all__ = [
    "IntegrationError",
    "StateVector",
    "TimeGrid",
    "Trajectory",
    "integrate",
    "jacobi_eigvalsh",
    "rk4_step",
]

__version__ = "0.1.0"
