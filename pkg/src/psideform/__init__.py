"""Exact symbolic toolkit for deformations of submanifolds cut out by vector-valued forms."""
from .algebra import JetPoly, PatchSplit, Point
from .forms import ConstMetric, ScalarForm, VectorForm, fn_bracket, hat
from .vdata import VData, ell_n

__version__ = "0.1.0"

__all__ = ["ConstMetric", "JetPoly", "PatchSplit", "Point", "ScalarForm", "VData", "VectorForm",
           "ell_n", "fn_bracket", "hat"]
