"""Synthetic feature trajectories and trace files."""

from hicache.sim.generators import GeneratorKind, GeneratorSpec, generate
from hicache.sim.trace_io import TraceFormat, read_trace, write_trace
from hicache.sim.trajectory import Trajectory

__all__ = [
    "GeneratorKind",
    "GeneratorSpec",
    "TraceFormat",
    "Trajectory",
    "generate",
    "read_trace",
    "write_trace",
]
