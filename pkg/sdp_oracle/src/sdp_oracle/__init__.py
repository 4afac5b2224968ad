"""Outer-bound oracle for power-flow solvability via an SDP relaxation."""

from .batch import run_batch
from .relax import BracketError, RelaxationInstance, t_star

__version__ = "0.1.0"
