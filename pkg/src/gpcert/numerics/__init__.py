"""Spectral grid backend and numerical certificates."""

from .grid import Grid, GridField, energy, free_propagate, nls_flow
from .lowrank import LowRankKernel, TensorSum, trace_norm, trace_norm_dense

__all__ = [
    "Grid",
    "GridField",
    "LowRankKernel",
    "TensorSum",
    "energy",
    "free_propagate",
    "nls_flow",
    "trace_norm",
    "trace_norm_dense",
]
