"""Command dispatch.  Each command yields output lines and a final RESULT value."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from ..algebra import AlgebraError, JetPoly, Point, format_rational
from ..calibration import KVectorFrame, first_cousin_residual, hl_constant, hl_residual, plane_condition
from ..deformation import (
    FormalSection,
    ObstructionReport,
    PreconditionError,
    f_psi,
    graph_check,
    mc_residual,
    mc_solve,
    plie_check,
)
from ..forms import ConstMetric, GradingError, ScalarForm, VectorForm, fn_bracket, form_value, hat, pullback, wedge
from ..vdata import DegreeOverflow, NormalValuedForm, VData, ell1_operator, ell_n, symbol_at, vdata_validate
from .document import Environment
from .parser import ParseError, Statement, Token, TokenStream, parse_rational
from .printer import rationals, render


class InvariantBreach(RuntimeError):
    """An internal consistency check failed; the output cannot be trusted."""


class CommandError(ValueError):
    pass


@dataclass
class CommandResult:
    command: str
    result: str
    verdict: Optional[bool] = None
    lines: List[str] = field(default_factory=list)

    def as_json(self) -> dict:
        return {"command": self.command, "result": self.result, "verdict": self.verdict, "lines": list(self.lines)}


class Args:
    """Typed access to command arguments with positions for errors."""

    def __init__(self, env: Environment, st: Statement):
        end = st.tokens[-1].column + len(st.tokens[-1].text)
        self.ts = TokenStream(st.tokens, st.line, end)
        self.ts.word()
        self.env = env

    def value(self, *kinds):
        return self.env.get(self.ts.name(" or ".join(kinds) or "name"), *kinds)

    def integer(self, what="integer") -> int:
        tok = self.ts.peek()
        n = self.ts.integer(what)
        if n < 0:
            raise self.ts.error(f"{what} must be non-negative", tok)
        return n

    def rational(self) -> Fraction:
        return parse_rational(self.ts)

    def word(self) -> str:
        return self.ts.word().text

    def more(self) -> bool:
        return not self.ts.at_end()

    def done(self):
        self.ts.finish()


def _vdata(args: Args) -> VData:
    delta = args.value("vform")
    return VData(delta)


def _family(args: Args, tok: Token, N: int) -> FormalSection:
    entry = args.env.entries.get(tok.text)
    if entry is None:
        raise ParseError(f"undeclared name {tok.text!r}", tok.line, tok.column)
    if entry.kind == "family":
        return entry.value
    if entry.kind in ("section", "nform") and entry.value.degree == 0:
        return FormalSection.linear(entry.value, N)
    raise ParseError(f"{tok.text!r} is a {entry.kind}, expected a section or family", tok.line, tok.column)


def _series_lines(series) -> List[str]:
    return [f"order {k}: {c.to_text()}" for k, c in enumerate(series.coeffs)]


def _zero_verdict(series) -> str:
    k = series.first_nonzero()
    return "ZERO" if k is None else f"NONZERO at order {k}"


# individual commands -------------------------------------------------------------

def cmd_print(a: Args) -> CommandResult:
    tok = a.ts.name()
    v = a.env.get(tok)
    a.done()
    return CommandResult("", render(v))


def cmd_fn_bracket(a: Args):
    A, B = a.value("vform"), a.value("vform")
    a.done()
    return CommandResult("", fn_bracket(A, B).to_text())


def cmd_hat(a: Args):
    phi, g = a.value("sform"), a.value("metric")
    a.done()
    return CommandResult("", hat(phi, g).to_text())


def cmd_square_zero(a: Args):
    K = a.value("vform")
    a.done()
    if 2 * K.degree > K.split.dim:
        return CommandResult("", "ZERO", True, ["bracket degree exceeds the patch dimension"])
    br = fn_bracket(K, K)
    return CommandResult("", "ZERO" if br.is_zero() else "NONZERO", br.is_zero(), [f"bracket {br.to_text()}"])


def cmd_vdata_validate(a: Args):
    V = _vdata(a)
    samples = a.integer("samples") if a.more() else 5
    a.done()
    rep = vdata_validate(V, samples)
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name}" + (f": {r.detail}" if r.detail else "") for r in rep.results]
    return CommandResult("", "PASS" if rep.passed else "FAIL", rep.passed, lines)


def cmd_ell(a: Args):
    n = a.integer("arity")
    V = _vdata(a)
    items = []
    while a.more():
        items.append(a.value("nform", "section"))
    a.done()
    if len(items) != n or n == 0:
        raise CommandError(f"ell {n} needs {n} arguments, got {len(items)}")
    return CommandResult("", ell_n(V, *items).to_text())


def cmd_ell1_matrix(a: Args):
    V = _vdata(a)
    D = a.integer("degree bound")
    a.done()
    op = ell1_operator(V, D)
    lines = [f"domain {len(op.domain_basis)}", f"codomain {len(op.codomain_basis)}", f"rank {op.rank}"]
    for row in op.entries:
        lines.append("row " + rationals(row))
    for vec in op.kernel:
        lines.append("kernel " + op.element(vec).to_text())
    # the matrix must reproduce ell_1 on its own kernel
    for vec in op.kernel:
        if not ell_n(V, op.element(vec)).is_zero():
            raise InvariantBreach("ell1 matrix kernel element is not in the kernel of ell_1")
    return CommandResult("", f"kernel-dim {op.kernel_dim}", None, lines)


def cmd_kernel_dim(a: Args):
    V = _vdata(a)
    D = a.integer("degree bound")
    want = a.integer("expected dimension")
    a.done()
    got = ell1_operator(V, D).kernel_dim
    return CommandResult("", f"kernel-dim {got}", got == want, [f"expected {want}"])


def cmd_symbol(a: Args):
    V = _vdata(a)
    p = a.value("point")
    xi = a.value("covector")
    a.done()
    sm = symbol_at(V, p, xi)
    names = V.split.variables
    lines = []
    for (idx, r), row in zip(sm.rows, sm.matrix):
        lines.append(f"[{' '.join(names[i] for i in idx)}]->{names[r]} {rationals(row)}")
    lines.append(f"rank {sm.rank}")
    return CommandResult("", "INJECTIVE" if sm.injective else "NOT-INJECTIVE", sm.injective, lines)


def cmd_fpsi(a: Args):
    V = _vdata(a)
    tok = a.ts.name("section or family")
    N = a.integer("order")
    a.done()
    s = _family(a, tok, N)
    series = f_psi(V, s, N)
    return CommandResult("", _zero_verdict(series), None, _series_lines(series))


def cmd_mc_residual(a: Args):
    V = _vdata(a)
    tok = a.ts.name("section or family")
    N = a.integer("order")
    a.done()
    s = _family(a, tok, N)
    series = mc_residual(V, s, N)
    return CommandResult("", _zero_verdict(series), None, _series_lines(series))


def cmd_mc_solve(a: Args):
    V = _vdata(a)
    s1 = a.value("section", "nform")
    N = a.integer("order")
    D = a.integer("degree bound")
    a.done()
    try:
        res = mc_solve(V, s1, N, D)
    except DegreeOverflow as exc:
        return CommandResult("", "INCONCLUSIVE degree overflow", None, [str(exc)])
    if isinstance(res, ObstructionReport):
        lines = [f"solved through order {res.solved_through}",
                 f"obstruction {res.obstruction.to_text()}",
                 f"rank {res.rank}", f"augmented-rank {res.augmented_rank}"]
        return CommandResult("", f"OBSTRUCTED at order {res.order}", False, lines)
    if not mc_residual(V, res, N).is_zero():
        raise InvariantBreach("mc_solve output does not solve the Maurer-Cartan equation")
    lines = [f"s{k} = {c.to_text()}" for k, c in enumerate(res.coeffs, start=1)]
    return CommandResult("", "SOLVED", True, lines)


def _plane_lines(rep) -> List[str]:
    return [f"subset {tuple(i + 1 for i in idx)} residual {rationals(r)}" for idx, r in rep.residuals]


def cmd_plane_check(a: Args):
    Psi, p, F = a.value("vform"), a.value("point"), a.value("frame")
    a.done()
    rep = plane_condition(Psi, p, F)
    return CommandResult("", "PASS" if rep.passed else "FAIL", rep.passed, _plane_lines(rep))


def cmd_graph_check(a: Args):
    Psi = a.value("vform")
    s = a.value("section", "nform")
    pts = []
    while a.more():
        pts.append(a.value("point"))
    a.done()
    if not pts:
        raise CommandError("graph-check needs at least one sample point")
    rep = graph_check(Psi, s, pts)
    lines = [f"point {rationals(p)} {'PASS' if r.passed else 'FAIL'}" for p, r in zip(rep.points, rep.reports)]
    return CommandResult("", "PASS" if rep.passed else "FAIL", rep.passed, lines)


def cmd_cousin(a: Args):
    phi, g, p, F, n = a.value("sform"), a.value("metric"), a.value("point"), a.value("frame"), a.value("vector")
    a.done()
    vals = first_cousin_residual(phi, g, p, F, n)
    return CommandResult("", rationals(vals), not any(vals))


def cmd_value(a: Args):
    phi, p, F = a.value("sform"), a.value("point"), a.value("frame")
    want = a.rational() if a.more() else None
    a.done()
    v = form_value(phi, p, [list(x) for x in F.vectors])
    return CommandResult("", format_rational(v), None if want is None else v == want)


def cmd_hl(a: Args):
    phi, psie, F = a.value("sform"), a.value("vform"), a.value("frame")
    c = a.rational()
    a.done()
    r = hl_residual(phi, psie, F, c)
    return CommandResult("", format_rational(r), r == 0)


def cmd_hl_constant(a: Args):
    phi, psie, F = a.value("sform"), a.value("vform"), a.value("frame")
    a.done()
    return CommandResult("", format_rational(hl_constant(phi, psie, F)))


def random_frame(rng: random.Random, dim: int, k: int, bound: int = 3) -> KVectorFrame:
    while True:
        F = KVectorFrame(tuple(tuple(Fraction(rng.randint(-bound, bound), rng.choice((1, 1, 2))) for _ in range(dim))
                               for _ in range(k)))
        if not F.degenerate:
            return F


def hl_oracle(phi: ScalarForm, psie: VectorForm, samples: int, seed: int = 7):
    """Constant from one generic sample, then residuals on ``samples`` fresh frames."""
    rng = random.Random(seed)
    k, dim = phi.degree, phi.split.dim
    while True:
        F = random_frame(rng, dim, k)
        try:
            c = hl_constant(phi, psie, F)
            break
        except AlgebraError:
            continue
    residuals = [hl_residual(phi, psie, random_frame(rng, dim, k), c) for _ in range(samples)]
    return c, residuals


def cmd_hl_oracle(a: Args):
    phi, psie = a.value("sform"), a.value("vform")
    n = a.integer("sample count")
    a.done()
    c, res = hl_oracle(phi, psie, n)
    bad = sum(1 for r in res if r)
    return CommandResult("", f"c = {format_rational(c)}", bad == 0, [f"samples {n}", f"nonzero residuals {bad}"])


def cmd_plie(a: Args):
    V = _vdata(a)
    xi = a.value("section", "nform")
    kmax = a.integer("kmax")
    a.done()
    entries = plie_check(V, xi, kmax)
    lines = [f"k={e.k} ratio {'none' if e.ratio is None else format_rational(e.ratio)}"
             f" {'proportional' if e.consistent else 'not-proportional'}" for e in entries]
    ok = all(e.consistent for e in entries)
    return CommandResult("", "CONSISTENT" if ok else "INCONSISTENT", ok, lines)


def cmd_pullback(a: Args):
    f, K = a.value("map"), a.value("vform", "sform")
    a.done()
    return CommandResult("", pullback(f, K).to_text())


def cmd_equal(a: Args):
    A = a.value("vform", "sform", "nform", "section")
    B = a.value("vform", "sform", "nform", "section")
    a.done()
    same = type(A) is type(B) and A.degree == B.degree and A == B
    return CommandResult("", "EQUAL" if same else "DIFFERENT", same)


def cmd_tau_formula(a: Args):
    T, phi = a.value("vform"), a.value("sform")
    a.done()
    split = phi.split
    expected = VectorForm.zero(split, 4)
    for j in range(split.dim):
        dxj = ScalarForm._raw(split, 1, {(j,): JetPoly.const(split, 1)})
        part = wedge(dxj, phi)
        expected = expected - VectorForm._raw(split, 4, {(idx, j): c for idx, c in part.terms.items()})
    same = T == expected
    return CommandResult("", "EQUAL" if same else "DIFFERENT", same)


def cmd_fixture(a: Args):
    from ..registry import FixtureError, load_fixture

    name = a.word()
    a.done()
    try:
        fx = load_fixture(name)
    except FixtureError as exc:
        return CommandResult("", "FAIL", False, [str(exc)])
    lines = [f"PASS {line}" for line in fx.manifest]
    lines += [f"note {n}" for n in fx.notes]
    return CommandResult("", "PASS", True, lines)


COMMAND_TABLE: Dict[str, Callable[[Args], CommandResult]] = {
    "print": cmd_print,
    "fn-bracket": cmd_fn_bracket,
    "hat": cmd_hat,
    "square-zero": cmd_square_zero,
    "vdata-validate": cmd_vdata_validate,
    "ell": cmd_ell,
    "ell1-matrix": cmd_ell1_matrix,
    "kernel-dim": cmd_kernel_dim,
    "symbol": cmd_symbol,
    "fpsi": cmd_fpsi,
    "mc-residual": cmd_mc_residual,
    "mc-solve": cmd_mc_solve,
    "plane-check": cmd_plane_check,
    "graph-check": cmd_graph_check,
    "cousin": cmd_cousin,
    "value": cmd_value,
    "hl": cmd_hl,
    "hl-constant": cmd_hl_constant,
    "hl-oracle": cmd_hl_oracle,
    "plie": cmd_plie,
    "pullback": cmd_pullback,
    "equal": cmd_equal,
    "tau-formula": cmd_tau_formula,
    "fixture": cmd_fixture,
}


def run_statement(env: Environment, st: Statement, skip_head: int = 0) -> CommandResult:
    """Run a command (or, with ``skip_head=1``, an ``expect`` line)."""
    toks = st.tokens[skip_head:]
    sub = Statement(st.kind, st.name, toks, st.line, st.text)
    args = Args(env, sub)
    args.ts.i = 0
    head = args.ts.word().text
    fn = COMMAND_TABLE.get(head)
    if fn is None:
        raise ParseError(f"unknown command {head!r}", st.line, toks[0].column if toks else 1)
    res = fn(args)
    res.command = " ".join(st.text.split()[skip_head:])
    return res
