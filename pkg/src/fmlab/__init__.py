"""Numerics for Fourier multipliers on weighted Lebesgue spaces of the line."""
from .grid import Grid, SampledFunction, Spectrum, forward_transform, inverse_transform, convolve
from .weights import parse_weight_spec, format_weight_spec
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Grid", "SampledFunction", "Spectrum", "convolve", "format_weight_spec",
    "forward_transform", "inverse_transform", "parse_weight_spec",
]
