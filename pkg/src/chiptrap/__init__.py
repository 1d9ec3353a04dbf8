"""Resonances and Majorana decay widths of a spin-1 atom in a chip trap."""

from .heff import SolverConfig, assemble
from .resonance import Resonance, classify, solve_point

__all__ = ["SolverConfig", "assemble", "Resonance", "classify", "solve_point"]
__version__ = "0.1.0"
