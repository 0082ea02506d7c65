"""Canonical text for values and documents; parsing the output gives equal values."""
from __future__ import annotations

from typing import List

from ..algebra import JetPoly, format_rational
from ..calibration import KVectorFrame
from ..deformation import FormalNormalForm, FormalSection
from ..forms import ConstMetric, PatchMap, ScalarForm, VectorForm
from ..vdata import NormalValuedForm
from .document import Environment


def rationals(values) -> str:
    return "(" + " ".join(format_rational(v) for v in values) + ")"


def section_body(s: NormalValuedForm) -> str:
    names = s.split.variables
    return " ; ".join(f"{names[r]} ({c.to_text()})" for (_, r), c in s.terms.items())


def inline_section(s: NormalValuedForm) -> str:
    names = s.split.variables
    return "(" + " , ".join(f"{names[r]} ({c.to_text()})" for (_, r), c in s.terms.items()) + ")"


def metric_text(g: ConstMetric) -> str:
    n = g.dim
    if all(g.entries[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        return "diag" + rationals(g.entries[i][i] for i in range(n))
    return "rows(" + " ; ".join(" ".join(format_rational(c) for c in row) for row in g.entries) + ")"


def map_text(f: PatchMap) -> str:
    if f.kind == "linear":
        return "linear rows(" + " ; ".join(" ".join(format_rational(c) for c in row) for row in f.data) + ")"
    return "shear " + " ; ".join(f"{name} ({p.to_text()})" for name, p in f.data)


def value_text(kind: str, value) -> str:
    """Right-hand side of a declaration."""
    if kind == "metric":
        return metric_text(value)
    if kind in ("sform", "vform", "nform"):
        return f"deg {value.degree} = {value.to_text()}"
    if kind == "section":
        return "= " + (section_body(value) if value.terms else "0")
    if kind == "family":
        return "= " + " ; ".join(inline_section(c) if c.terms else "0" for c in value.coeffs)
    if kind == "point":
        return "= " + rationals(value.coords)
    if kind == "frame":
        return "= " + " ".join(rationals(v) for v in value.vectors)
    if kind in ("vector", "covector"):
        return "= " + rationals(value)
    if kind == "map":
        return "= " + map_text(value)
    raise ValueError(f"cannot print a {kind}")


def declaration(kind: str, name: str, value) -> str:
    rhs = value_text(kind, value)
    if kind == "metric":
        return f"metric {name} = {rhs}"
    return f"{kind} {name} {rhs}"


def patch_line(split) -> str:
    return f"patch ({' '.join(split.base_vars)} | {' '.join(split.fiber_vars)}) jet {split.jet_order}"


def print_environment(env: Environment) -> str:
    lines: List[str] = []
    for what, item in env.statements:
        if what == "patch":
            lines.append(patch_line(env.split))
        elif what == "load":
            lines.append(f"load {item}")
        elif what == "decl":
            e = env.entries[item]
            lines.append(declaration(e.kind, item, e.value))
        else:
            lines.append(" ".join(item.text.split()))
    return "\n".join(lines) + "\n"


def render(value) -> str:
    """Single-line canonical rendering used in command output."""
    if isinstance(value, (ScalarForm, VectorForm, NormalValuedForm)):
        return value.to_text()
    if isinstance(value, JetPoly):
        return value.to_text()
    if isinstance(value, (FormalSection, FormalNormalForm)):
        return " | ".join(c.to_text() for c in value.coeffs)
    if isinstance(value, KVectorFrame):
        return " ".join(rationals(v) for v in value.vectors)
    if isinstance(value, (list, tuple)):
        return rationals(value)
    return format_rational(value)
