"""Loop invariant inference by weakening postconditions."""

from .parser import parse_expr, parse_program
from .printer import expr_str, pretty_print
from .verifier import infer
from .weakening import HeuristicLevel, generate_candidates

__all__ = ["HeuristicLevel", "expr_str", "generate_candidates", "infer", "parse_expr",
           "parse_program", "pretty_print"]
__version__ = "0.1.0"
