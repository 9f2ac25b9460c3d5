"""Exact truncated computations for quantization of quasi-Poisson manifolds."""

from .series import DEFAULT_ORDER, HbarSeries

__all__ = ["DEFAULT_ORDER", "HbarSeries"]
__version__ = "0.1.0"
