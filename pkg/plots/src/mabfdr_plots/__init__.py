"""Figures over the mabfdr CSV schemas."""

from .figures import KINDS, aggregate_series, fdp_paths, render

__all__ = ["KINDS", "aggregate_series", "fdp_paths", "render"]
