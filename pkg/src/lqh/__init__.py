"""lqh: a refinement-type checker with first-class typed holes.

Programs in a small Haskell-like language carry refinement-type signatures.
The checker discharges verification conditions with an external SMT solver,
captures the logical environment at every hole, simplifies hole goals, and
offers machine-assisted edits (case split, unit fill, induction hint).
"""

__version__ = "0.1.0"

from lqh.checker import CheckConfig, CheckResult, check_program
from lqh.driver import Analysis, analyze
from lqh.evaluator import evaluate
from lqh.holes import apply_edit, case_split, enumerate_actions, fill, hole_goal
from lqh.parser import ParseError, parse_expr, parse_program
from lqh.printer import print_program
from lqh.syntax import Program, holes_of

__all__ = [
    "Analysis",
    "CheckConfig",
    "CheckResult",
    "ParseError",
    "Program",
    "__version__",
    "analyze",
    "apply_edit",
    "case_split",
    "check_program",
    "enumerate_actions",
    "evaluate",
    "fill",
    "hole_goal",
    "holes_of",
    "parse_expr",
    "parse_program",
    "print_program",
]
