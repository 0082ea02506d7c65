"""Named fixtures shipped with the package.

A fixture is a document whose ``expect`` lines form its manifest.  Loading
runs every manifest check and refuses the fixture if one fails.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import List, Optional, Tuple

from .algebra import AlgebraError
from .cli.document import Environment, build_environment
from .cli.parser import ParseError


class FixtureError(ValueError):
    pass


@dataclass
class Fixture:
    name: str
    env: Environment
    manifest: Tuple[str, ...]
    notes: Tuple[str, ...] = ()

    @property
    def split(self):
        return self.env.split

    def __getitem__(self, key: str):
        return self.env.entries[key].value


def _resource(name: str):
    return resources.files("psideform").joinpath("fixtures", f"{name}.psd")


def fixture_names() -> List[str]:
    root = resources.files("psideform").joinpath("fixtures")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".psd"))


def fixture_text(name: str) -> str:
    res = _resource(name)
    if not res.is_file():
        raise FixtureError(f"unknown fixture {name!r}")
    return res.read_text(encoding="utf-8")


def _notes(text: str) -> Tuple[str, ...]:
    return tuple(line[len("#:"):].strip() for line in text.splitlines() if line.startswith("#:"))


def load_fixture_text(name: str, text: str, loader=None) -> Fixture:
    """Build and verify a fixture from source; fails closed on any manifest violation."""
    from .cli.commands import CommandError, run_statement

    try:
        env = build_environment(text, loader or _env_loader)
    except ParseError as exc:
        raise FixtureError(f"fixture {name!r} does not parse: {exc}") from None
    if env.commands:
        raise FixtureError(f"fixture {name!r} contains commands; only declarations and expect lines are allowed")
    passed = []
    for st in env.expects:
        check = " ".join(st.text.split()[1:])
        try:
            res = run_statement(env, st, skip_head=1)
        except (ParseError, CommandError, AlgebraError, ValueError, ZeroDivisionError) as exc:
            raise FixtureError(f"fixture {name!r}: check '{check}' (line {st.line}) could not run: {exc}") from None
        if res.verdict is not True:
            raise FixtureError(f"fixture {name!r} violates '{check}' (line {st.line}): got {res.result}")
        passed.append(check)
    return Fixture(name, env, tuple(passed), _notes(text))


@lru_cache(maxsize=None)
def load_fixture(name: str) -> Fixture:
    return load_fixture_text(name, fixture_text(name))


def _env_loader(name: str) -> Environment:
    try:
        return load_fixture(name).env
    except FixtureError as exc:
        raise ParseError(str(exc)) from None


def fixture_loader(name: str) -> Environment:
    """Loader callback for documents that ``load`` fixtures."""
    return _env_loader(name)
