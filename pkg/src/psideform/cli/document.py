"""Semantic layer: turn parsed statements into named values."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from ..algebra import AlgebraError, JetPoly, PatchSplit, Point
from ..calibration import KVectorFrame
from ..deformation import FormalSection
from ..forms import ConstMetric, GradingError, PatchMap, ScalarForm, VectorForm, fn_bracket, hat, pullback, wedge
from ..vdata import NormalValuedForm, VDataError, iota_L
from .parser import (
    Document,
    ParseError,
    Statement,
    Token,
    TokenStream,
    parse_poly_tokens,
    parse_rational,
    parse_statements,
)

COMMANDS = (
    "print", "fn-bracket", "hat", "square-zero", "vdata-validate", "ell", "ell1-matrix", "symbol",
    "fpsi", "mc-residual", "mc-solve", "plane-check", "graph-check", "cousin", "hl", "hl-constant",
    "plie", "pullback", "fixture", "kernel-dim", "value", "hl-oracle", "equal", "tau-formula",
)

KINDS = ("metric", "sform", "vform", "nform", "section", "family", "point", "frame", "vector", "covector", "map")


@dataclass
class Entry:
    kind: str
    value: object
    line: int
    origin: Optional[str] = None


@dataclass
class Environment:
    split: Optional[PatchSplit] = None
    entries: Dict[str, Entry] = field(default_factory=dict)
    order: List[str] = field(default_factory=list)
    expects: List[Statement] = field(default_factory=list)
    commands: List[Statement] = field(default_factory=list)
    loads: List[str] = field(default_factory=list)
    patch_text: Optional[str] = None
    statements: List[Tuple[str, object]] = field(default_factory=list)

    def get(self, tok: Token, *kinds: str):
        entry = self.entries.get(tok.text)
        if entry is None:
            raise ParseError(f"undeclared name {tok.text!r}", tok.line, tok.column)
        if kinds and entry.kind not in kinds:
            raise ParseError(f"{tok.text!r} is a {entry.kind}, expected {' or '.join(kinds)}", tok.line, tok.column)
        return entry.value

    def declare(self, name: str, kind: str, value, line: int, column: int = 1, origin: Optional[str] = None):
        if name in self.entries:
            raise ParseError(f"name {name!r} is already declared", line, column)
        self.entries[name] = Entry(kind, value, line, origin)
        self.order.append(name)
        if origin is None:
            self.statements.append(("decl", name))


Loader = Callable[[str], "Environment"]


def _stream(st: Statement, skip: int) -> TokenStream:
    end = st.tokens[-1].column + len(st.tokens[-1].text) if st.tokens else 1
    ts = TokenStream(st.tokens, st.line, end)
    ts.word()
    if skip > 1:
        ts.name()
    return ts


def _rational_tuple(ts: TokenStream) -> Tuple[Fraction, ...]:
    ts.expect("(")
    out = []
    while not ts.accept(")"):
        out.append(parse_rational(ts))
        ts.accept(",")
    return tuple(out)


def _indices(ts: TokenStream, split: PatchSplit) -> Tuple[Token, ...]:
    ts.expect("[")
    names = []
    while not ts.accept("]"):
        tok = ts.name("variable")
        if tok.text not in split.variables:
            raise ts.error(f"unknown variable {tok.text!r}", tok)
        names.append(tok)
    return tuple(names)


def _direction(ts: TokenStream, split: PatchSplit) -> Token:
    tok = ts.name("direction")
    if tok.text not in split.variables:
        raise ts.error(f"unknown variable {tok.text!r}", tok)
    return tok


def _poly(ts: TokenStream, split: PatchSplit, base_only: bool = False) -> JetPoly:
    ts.expect("(")
    p = parse_poly_tokens(ts, split, base_only)
    ts.expect(")")
    return p


def _opt_degree(ts: TokenStream) -> Optional[int]:
    if ts.peek() is not None and ts.peek().text == "deg":
        ts.next()
        return ts.integer("degree")
    return None


def _is_zero_literal(ts: TokenStream) -> bool:
    tok = ts.peek()
    if tok is not None and tok.text == "0" and ts.peek(1) is None:
        ts.next()
        return True
    return False


def _need_split(env: Environment, st: Statement) -> PatchSplit:
    if env.split is None:
        raise ParseError("declare a patch first", st.line, 1)
    return env.split


def parse_patch(ts: TokenStream) -> PatchSplit:
    ts.expect("(")
    base, fiber, cur = [], [], None
    cur = base
    while True:
        tok = ts.next("variable or ')'")
        if tok.text == ")":
            break
        if tok.text == "|":
            if cur is fiber:
                raise ts.error("only one '|' separator allowed", tok)
            cur = fiber
            continue
        if tok.kind != "name":
            raise ts.error(f"expected a variable name, found {tok.text!r}", tok)
        cur.append(tok.text)
    if cur is not fiber:
        raise ts.error("patch needs a '|' between base and fiber variables")
    ts.expect("jet")
    T = ts.integer("jet order")
    ts.finish()
    try:
        return PatchSplit(tuple(base), tuple(fiber), T)
    except (AlgebraError, ValueError) as exc:
        raise ts.error(str(exc)) from None


def _terms_sform(ts, split, degree):
    items = []
    while True:
        start = ts.peek()
        idx = _indices(ts, split)
        if degree is None:
            degree = len(idx)
        elif len(idx) != degree:
            raise ts.error(f"term has {len(idx)} indices, form has degree {degree}", start)
        items.append(([t.text for t in idx], _poly(ts, split)))
        if not ts.accept(";"):
            break
    ts.finish()
    return ScalarForm.from_terms(split, degree, items)


def _terms_valued(ts, split, degree, base_only):
    items = []
    while True:
        start = ts.peek()
        idx = _indices(ts, split)
        if degree is None:
            degree = len(idx)
        elif len(idx) != degree:
            raise ts.error(f"term has {len(idx)} indices, form has degree {degree}", start)
        ts.expect("->")
        d = _direction(ts, split)
        if base_only:
            for t in idx:
                if split.is_fiber(split.index(t.text)):
                    raise ts.error(f"normal-valued forms take base differentials only, not {t.text!r}", t)
            if not split.is_fiber(split.index(d.text)):
                raise ts.error(f"normal-valued forms take fiber directions only, not {d.text!r}", d)
        items.append((tuple(t.text for t in idx), d.text, _poly(ts, split, base_only)))
        if not ts.accept(";"):
            break
    ts.finish()
    return degree, items


def _declare(env: Environment, st: Statement, loader: Optional[Loader]):
    kind = st.kind
    if kind == "patch":
        if env.split is not None:
            raise ParseError("only one patch per document", st.line, 1)
        env.split = parse_patch(_stream(st, 1))
        env.statements.append(("patch", None))
        return
    if kind == "load":
        ts = _stream(st, 1)
        name = ts.word("fixture name")
        ts.finish()
        if loader is None:
            raise ParseError("fixtures are not available here", st.line, name.column)
        fx = loader(name.text)
        if env.split is not None and env.split != fx.split:
            raise ParseError(f"fixture {name.text!r} uses a different patch", st.line, name.column)
        env.split = fx.split
        for n in fx.order:
            e = fx.entries[n]
            env.declare(n, e.kind, e.value, st.line, name.column, origin=name.text)
        env.loads.append(name.text)
        env.statements.append(("load", name.text))
        return
    split = _need_split(env, st)
    ts = _stream(st, 2)
    name_tok = st.tokens[1]
    try:
        value = _build(env, kind, ts, split)
    except ParseError:
        raise
    except (AlgebraError, GradingError, VDataError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc), st.line, name_tok.column) from None
    env.declare(st.name, kind, value, st.line, name_tok.column)


def _build(env: Environment, kind: str, ts: TokenStream, split: PatchSplit):
    if kind == "metric":
        ts.expect("=")
        tok = ts.name("metric form")
        if tok.text == "euclidean":
            ts.finish()
            return ConstMetric.euclidean(split.dim)
        if tok.text == "diag":
            vals = _rational_tuple(ts)
            ts.finish()
            g = ConstMetric.diag(vals)
        elif tok.text == "rows":
            g = ConstMetric(_rows(ts))
            ts.finish()
        else:
            raise ts.error(f"unknown metric form {tok.text!r}", tok)
        if g.dim != split.dim:
            raise ts.error(f"metric has dimension {g.dim}, patch has {split.dim}", tok)
        return g

    if kind == "sform":
        degree = _opt_degree(ts)
        ts.expect("=")
        if _is_zero_literal(ts):
            if degree is None:
                raise ts.error("a zero form needs an explicit 'deg'")
            return ScalarForm.zero(split, degree)
        tok = ts.peek()
        if tok is not None and tok.text == "wedge":
            ts.next()
            a = env.get(ts.name(), "sform")
            b = env.get(ts.name(), "sform")
            ts.finish()
            return wedge(a, b)
        return _terms_sform(ts, split, degree)

    if kind in ("vform", "nform"):
        degree = _opt_degree(ts)
        ts.expect("=")
        if _is_zero_literal(ts):
            if degree is None:
                raise ts.error("a zero form needs an explicit 'deg'")
            return VectorForm.zero(split, degree) if kind == "vform" else NormalValuedForm.zero(split, degree)
        tok = ts.peek()
        if kind == "vform" and tok is not None and tok.kind == "name":
            value = _derived_vform(env, ts, split)
            if degree is not None and value.degree != degree:
                raise ts.error(f"derived form has degree {value.degree}, declared {degree}", tok)
            return value
        degree, items = _terms_valued(ts, split, degree, kind == "nform")
        store = {}
        for idx, d, p in items:
            key = (idx, d)
            store[key] = store[key] + p if key in store else p
        if kind == "vform":
            return VectorForm(split, degree, store)
        return NormalValuedForm(split, degree, store)

    if kind == "section":
        ts.expect("=")
        if _is_zero_literal(ts):
            return NormalValuedForm.zero(split, 0)
        comps = {}
        while True:
            d = _direction(ts, split)
            if not split.is_fiber(split.index(d.text)):
                raise ts.error(f"sections take fiber directions only, not {d.text!r}", d)
            p = _poly(ts, split, base_only=True)
            comps[d.text] = comps[d.text] + p if d.text in comps else p
            if not ts.accept(";"):
                break
        ts.finish()
        return NormalValuedForm.section(split, comps)

    if kind == "family":
        ts.expect("=")
        coeffs = []
        while True:
            tok = ts.next("section name or 0")
            if tok.text == "(":
                coeffs.append(_inline_section(ts, split))
            elif tok.text == "0":
                coeffs.append(NormalValuedForm.zero(split, 0))
            elif tok.kind == "name":
                s = env.get(tok, "section", "nform")
                if s.degree != 0:
                    raise ts.error(f"{tok.text!r} is not a section", tok)
                coeffs.append(s)
            else:
                raise ts.error(f"expected a section name or 0, found {tok.text!r}", tok)
            if not ts.accept(";"):
                break
        ts.finish()
        return FormalSection(tuple(coeffs))

    if kind == "point":
        ts.expect("=")
        tok = ts.peek()
        if tok is not None and tok.text == "origin":
            ts.next()
            ts.finish()
            return Point.origin(split)
        coords = _rational_tuple(ts)
        ts.finish()
        if len(coords) != split.dim:
            raise ts.error(f"point needs {split.dim} coordinates, got {len(coords)}", tok)
        return Point(split, coords)

    if kind == "frame":
        ts.expect("=")
        vecs = []
        while not ts.at_end():
            tok = ts.peek()
            v = _rational_tuple(ts)
            if len(v) != split.dim:
                raise ts.error(f"frame vectors need {split.dim} components, got {len(v)}", tok)
            vecs.append(v)
        if not vecs:
            raise ts.error("frame needs at least one vector")
        return KVectorFrame(tuple(vecs))

    if kind in ("vector", "covector"):
        ts.expect("=")
        tok = ts.peek()
        v = _rational_tuple(ts)
        ts.finish()
        want = split.dim if kind == "vector" else split.nbase
        if len(v) != want:
            raise ts.error(f"{kind} needs {want} components, got {len(v)}", tok)
        return v

    if kind == "map":
        ts.expect("=")
        tok = ts.name("map kind")
        if tok.text == "linear":
            ts.expect("rows")
            rows = _rows(ts)
            ts.finish()
            return PatchMap.linear(split, rows)
        if tok.text == "shear":
            shift = {}
            while True:
                d = _direction(ts, split)
                shift[d.text] = _poly(ts, split, base_only=True)
                if not ts.accept(";"):
                    break
            ts.finish()
            return PatchMap.shear(split, shift)
        raise ts.error(f"unknown map kind {tok.text!r}", tok)
    raise ts.error(f"unknown declaration {kind!r}")


def _inline_section(ts: TokenStream, split: PatchSplit) -> NormalValuedForm:
    """``( y1 (poly) , y2 (poly) )`` after the opening parenthesis; ``()`` is zero."""
    comps = {}
    while not ts.accept(")"):
        d = _direction(ts, split)
        if not split.is_fiber(split.index(d.text)):
            raise ts.error(f"sections take fiber directions only, not {d.text!r}", d)
        p = _poly(ts, split, base_only=True)
        comps[d.text] = comps[d.text] + p if d.text in comps else p
        ts.accept(",")
    return NormalValuedForm.section(split, comps)


def _rows(ts: TokenStream):
    ts.expect("(")
    rows, cur = [], []
    while True:
        tok = ts.peek()
        if tok is None:
            raise ts.error("unterminated rows(...)")
        if tok.text == ")":
            ts.next()
            break
        if tok.text == ";":
            ts.next()
            rows.append(cur)
            cur = []
            continue
        cur.append(parse_rational(ts))
        ts.accept(",")
    rows.append(cur)
    if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
        raise ts.error("rows(...) must describe a square matrix")
    return rows


def _derived_vform(env: Environment, ts: TokenStream, split: PatchSplit) -> VectorForm:
    from ..forms import tau_from_phi

    tok = ts.name("constructor")
    if tok.text == "hat":
        phi = env.get(ts.name("form"), "sform")
        g = env.get(ts.name("metric"), "metric")
        ts.finish()
        return hat(phi, g)
    if tok.text == "tau7":
        phi = env.get(ts.name("form"), "sform")
        ts.finish()
        return tau_from_phi(phi)
    if tok.text == "bracket":
        a = env.get(ts.name("form"), "vform")
        b = env.get(ts.name("form"), "vform")
        ts.finish()
        return fn_bracket(a, b)
    if tok.text == "pullback":
        f = env.get(ts.name("map"), "map")
        k = env.get(ts.name("form"), "vform")
        ts.finish()
        return pullback(f, k)
    if tok.text == "lift":
        a = env.get(ts.name("form"), "nform", "section")
        ts.finish()
        return iota_L(a)
    if tok.text == "scale":
        c = parse_rational(ts)
        k = env.get(ts.name("form"), "vform")
        ts.finish()
        return k.scale(c)
    raise ts.error(f"unknown constructor {tok.text!r}", tok)


def build_environment(text: str, loader: Optional[Loader] = None) -> Environment:
    doc = parse_statements(text)
    return build_from_document(doc, loader)


def build_from_document(doc: Document, loader: Optional[Loader] = None) -> Environment:
    env = Environment()
    for st in doc.statements:
        if st.kind in ("patch", "load") or st.kind in KINDS:
            _declare(env, st, loader)
        elif st.kind == "expect":
            env.expects.append(st)
            env.statements.append(("expect", st))
        elif st.kind in COMMANDS:
            env.commands.append(st)
            env.statements.append(("command", st))
        else:
            raise ParseError(f"unknown statement {st.kind!r}", st.line, st.tokens[0].column)
    return env
