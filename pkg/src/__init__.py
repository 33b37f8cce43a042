"""LinOptSim - linear-optical entanglement generation simulator."""

__version__ = "0.1.0"
