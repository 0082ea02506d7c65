"""Input language, fixture-backed command runner and canonical printer."""
from .commands import CommandResult, InvariantBreach, run_statement
from .document import Environment, build_environment
from .parser import ParseError, parse_poly
from .printer import print_environment, render

__all__ = ["CommandResult", "Environment", "InvariantBreach", "ParseError", "build_environment",
           "parse_poly", "print_environment", "render", "run_statement"]
