"""Construction and exact verification of Hamiltonian gap-simulators."""

__version__ = "0.1.0"
