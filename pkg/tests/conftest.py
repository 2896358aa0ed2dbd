import sys

import numpy as np
import pytest

from prefixprob.grammar import parse_grammar

G1_TEXT = """\
@start S
S -> S S : 0.4
S -> 'a' : 0.6
"""

# S -> S S : 0.9 puts mass 8/9 on infinite trees
NON_TIGHT_TEXT = """\
S -> S S : 0.9
S -> 'a' : 0.1
"""

DIVERGENT_TEXT = "S -> S S : 1.0\n"

LEXICAL_ONLY_TEXT = """\
S -> 'a' : 0.5
S -> 'b' : 0.5
"""

SAB_TEXT = """\
S -> A B : 1.0
A -> 'a' : 1.0
B -> 'b' : 1.0
"""

# { a^n b^n : n >= 1 }
ANBN_TEXT = """\
S -> A B : 0.5
S -> A T : 0.5
T -> S B : 1.0
A -> 'a' : 1.0
B -> 'b' : 1.0
"""

# two nonterminals, two terminals, right- and left-branching recursion
MIXED_TEXT = """\
@start S
S -> S A : 0.2
S -> A S : 0.1
S -> 'a' : 0.4
S -> 'b' : 0.3
A -> A A : 0.25
A -> 'b' : 0.75
"""


@pytest.fixture
def g1():
    return parse_grammar(G1_TEXT)


@pytest.fixture
def anbn():
    return parse_grammar(ANBN_TEXT)


@pytest.fixture
def mixed():
    return parse_grammar(MIXED_TEXT)


def rel_close(a, b, rtol, atol=1e-300):
    """Entrywise |a - b| <= rtol * max(|a|, |b|) + atol."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(np.abs(a), np.abs(b)) + atol))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
