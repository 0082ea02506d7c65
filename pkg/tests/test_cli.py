import io
import json
import random
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction
from pathlib import Path

import pytest

from psideform.algebra import JetPoly, PatchSplit
from psideform.cli.document import build_environment
from psideform.cli.main import main
from psideform.cli.parser import ParseError, parse_poly
from psideform.cli.printer import declaration, print_environment
from psideform.forms import VectorForm
from psideform.registry import FixtureError, fixture_loader, fixture_names, fixture_text, load_fixture_text

from docgen import random_document

GOLDEN = Path(__file__).parent / "golden"
GOLDEN_EXIT = {"calibrations": 1, "errors": 2, "forms": 1, "jline": 1, "twist": 0}


def run_cli(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdin
    if stdin is not None:
        sys.stdin = io.StringIO(stdin)
    try:
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
    finally:
        sys.stdin = old
    return code, out.getvalue(), err.getvalue()


def test_patch_and_vform_examples():
    env = build_environment("patch (x1 x2 | y1 y2) jet 3\n"
                            "vform J = [x1]->y1 (1) ; [y1]->x1 (-1) ; [x2]->y2 (1) ; [y2]->x2 (-1)\n")
    assert env.split == PatchSplit(("x1", "x2"), ("y1", "y2"), 3)
    J = env.entries["J"].value
    assert J == VectorForm.from_terms(env.split, 1, [(("x1",), "y1", 1), (("y1",), "x1", -1),
                                                     (("x2",), "y2", 1), (("y2",), "x2", -1)])


@pytest.mark.parametrize("text,message,line,column", [
    ("patch (x1 | y1) jet 2\nsform a = [x1] (1/0)\n", "zero denominator", 2, 18),
    ("patch (x1 | y1) jet 2\nsform a = [x1] (x1/(x1 + 1))\n", "can only divide by a constant", 2, 20),
    ("patch (x1 | y1) jet 2\nvform K = [x1]->y1 (z)\n", "unknown variable", 2, 21),
    ("patch (x1 | y1) jet 2\nfn-bracket A A\n", None, 0, 0),
    ("patch (x1 | y1) jet 2\nsform a = [x1] (1) ; [x1 y1] (2)\n", "has 2 indices", 2, 22),
    ("sform a = [x1] (1)\n", "declare a patch first", 1, 1),
    ("patch (x1 | y1) jet 2\npatch (x1 | y1) jet 2\n", "only one patch", 2, 1),
    ("patch (x1 | y1) jet 2\nnform n = [y1]->y1 (1)\n", "base differentials only", 2, 12),
    ("patch (x1 | y1) jet 2\nsection s = y1 (y1)\n", "not allowed", 2, 17),
    ("patch (x1 | y1) jet 2\nfrobnicate\n", "unknown statement", 2, 1),
    ("patch (x1 | y1) jet 2\nsform a = [x1] (1)\nsform a = [x1] (2)\n", "already declared", 3, 7),
])
def test_parse_errors_carry_positions(text, message, line, column):
    if message is None:
        # undeclared names are found when the command runs
        code, out, err = run_cli("run", "-", stdin=text)
        assert code == 2 and "undeclared name 'A'" in err
        return
    with pytest.raises(ParseError) as info:
        build_environment(text, fixture_loader)
    assert message in str(info.value)
    assert (info.value.line, info.value.column) == (line, column)


def test_print_examples():
    split = PatchSplit(("x1",), ("y1",), 2)
    assert declaration("vform", "Z", VectorForm.zero(split, 1)) == "vform Z deg 1 = 0"
    env = build_environment("patch (x1 | y1) jet 2\nsform a = [x1] (-3/6)\n")
    assert print_environment(env).splitlines()[1] == "sform a deg 1 = [x1] (-1/2)"
    assert parse_poly("x1*(x1 - 1) / 2", split).to_text() == "1/2*x1^2 - 1/2*x1"


def _values(env):
    from psideform.cli.printer import value_text
    out = {}
    for name in env.order:
        e = env.entries[name]
        out[name] = value_text(e.kind, e.value) if e.kind == "map" else e.value
    return out


def test_random_round_trips():
    rng = random.Random(31)
    for _ in range(40):
        text = random_document(rng)
        env = build_environment(text)
        canon = print_environment(env)
        env2 = build_environment(canon)
        assert _values(env) == _values(env2)
        assert print_environment(env2) == canon


def test_run_and_exit_codes(tmp_path):
    doc = tmp_path / "d.psd"
    doc.write_text("load omega-r4\nsquare-zero Omegahat\n")
    code, out, _ = run_cli("run", str(doc))
    assert code == 0 and out.splitlines()[-1] == "RESULT ZERO"
    doc.write_text("load j-line\nsection s = y1 (x1)\ngraph-check J s o p1\n")
    assert run_cli("run", str(doc))[0] == 1
    code, _, err = run_cli("run", str(tmp_path / "missing.psd"))
    assert code == 2 and "error" in err
    assert run_cli("bogus")[0] == 2


def test_ell1_matrix_example():
    code, out, _ = run_cli("run", "-", stdin="load j-line\nell1-matrix J 2\n")
    assert code == 0
    assert out.splitlines()[-1] == "RESULT kernel-dim 6"
    assert sum(1 for line in out.splitlines() if line.strip().startswith("kernel ")) == 6


def test_json_mirrors_text():
    text = "load j-line\nsquare-zero J\nsection s = y1 (x1/2)\nell 1 J s\n"
    _, out_text, _ = run_cli("run", "-", stdin=text)
    code, out_json, _ = run_cli("run", "-", "--format", "json", stdin=text)
    data = json.loads(out_json)
    assert code == 0
    results = [line[len("RESULT "):] for line in out_text.splitlines() if line.startswith("RESULT ")]
    assert [r["result"] for r in data["results"]] == results
    assert data["results"][0]["verdict"] is True
    assert "1/2" in data["results"][1]["result"]


def test_fixture_command_and_listing():
    code, out, _ = run_cli("list-fixtures")
    assert code == 0 and out.split() == fixture_names()
    code, out, _ = run_cli("fixture", "g2-phi")
    assert code == 0 and out.splitlines()[-1] == "RESULT PASS"
    assert "PASS hl-oracle phi chi 20" in out
    code, out, _ = run_cli("fixture", "nope")
    assert code == 1 and "unknown fixture" in out


def test_corrupted_fixture_fails_closed():
    text = fixture_text("g2-phi").replace("[x2 y2 y4] (-1)", "[x2 y2 y4] (1)")
    with pytest.raises(FixtureError) as info:
        load_fixture_text("g2-phi-corrupt", text)
    assert "violates" in str(info.value)
    assert "expect" not in str(info.value) or "line" in str(info.value)


def test_fixture_with_commands_rejected():
    with pytest.raises(FixtureError):
        load_fixture_text("x", "patch (x1 | y1) jet 2\nvform K = [x1]->y1 (1)\nsquare-zero K\n")


@pytest.mark.parametrize("name", sorted(GOLDEN_EXIT))
def test_golden_outputs(name):
    path = GOLDEN / f"{name}.psd"
    runs = [run_cli("run", str(path)) for _ in range(2)]
    assert runs[0] == runs[1]
    code, out, _ = runs[0]
    assert code == GOLDEN_EXIT[name]
    assert out == (GOLDEN / f"{name}.out").read_text()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "psideform.cli.main", "list-fixtures"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "j-line" in proc.stdout
