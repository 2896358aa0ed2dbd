"""Inside and all-prefix probabilities for weighted CNF grammars.

The prefix algorithms are Jelinek-Lafferty (``jl``) and its factored
O(N^2 |N|^3 + N^3 |N|^2) variant (``fast_jl``, ``fast_semiring_jl``).
"""

from .errors import (
    ClosureError,
    DimensionMismatch,
    DuplicateRule,
    GenerationFailed,
    GrammarError,
    GrammarSyntaxError,
    InsufficientData,
    NegativeEntry,
    NonConvergent,
    PrefixProbError,
    Singular,
    UnknownStartSymbol,
    UnknownToken,
    YieldTooLong,
)
from .grammar import Grammar, format_grammar, load_grammar, parse_grammar, tightness_estimate, validate
from .inside import Chart, PairChart, cky, cky_factored
from .leftcorner import LeftCornerTables, build_p_matrix, left_corner_expectations
from .linalg import SquareMatrix, invert_closure, lehmann_closure, mat_add, mat_mul
from .prefix import PrefixResult, fast_jl, fast_semiring_jl, jl
from .semiring import BOOLEAN, LOG, PROB, VITERBI, get_semiring

__version__ = "0.1.0"
