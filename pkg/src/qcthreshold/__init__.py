"""Simulation laboratory for the quantum-classical correspondence threshold
D ~ hbar^(4/3) in open systems with isotropic phase-space diffusion."""

__version__ = "0.1.0"
