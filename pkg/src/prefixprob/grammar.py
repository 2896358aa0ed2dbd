"""Weighted CNF grammars: file format, indexing, and validity checks.

File format (UTF-8, line based)::

    # comment
    @start S
    S -> S S : 0.4        # binary rule
    S -> 'a' : 0.6        # lexical rule; \\' escapes a quote
    S -> : 0.0            # S -> epsilon (start symbol only)

Weights are probabilities.  They are kept in the probability domain on the
``Grammar`` and converted per semiring by :meth:`Grammar.tensors`.
"""

import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DuplicateRule, GrammarError, GrammarSyntaxError, UnknownStartSymbol, UnknownToken
from .semiring import PROB, get_semiring

NORMALIZATION_TOL = 1e-9
TIGHT_TOL = 1e-6


class BinaryRule(NamedTuple):
    lhs: int
    left: int
    right: int
    weight: float


class LexicalRule(NamedTuple):
    lhs: int
    terminal: int
    weight: float


class EpsilonRule(NamedTuple):
    lhs: int
    weight: float


class GrammarTensors(NamedTuple):
    """Dense rule weights in one semiring.

    ``binary[X, Y, Z]`` is the weight of ``X -> Y Z``, ``lexical[X, a]`` the
    weight of ``X -> a``; absent rules hold the semiring zero.
    """

    semiring: object
    binary: np.ndarray
    lexical: np.ndarray
    epsilon: object


@dataclass(frozen=True, eq=False)
class Grammar:
    nonterminals: tuple
    alphabet: tuple
    start: int
    rules: tuple  # every rule in file order
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_nt_index", {x: i for i, x in enumerate(self.nonterminals)})
        object.__setattr__(self, "_term_index", {a: i for i, a in enumerate(self.alphabet)})

    @property
    def binary_rules(self):
        return tuple(r for r in self.rules if isinstance(r, BinaryRule))

    @property
    def lexical_rules(self):
        return tuple(r for r in self.rules if isinstance(r, LexicalRule))

    @property
    def epsilon_weight(self):
        for r in self.rules:
            if isinstance(r, EpsilonRule):
                return r.weight
        return None

    @property
    def binary_by_rhs(self):
        """``(left, right) -> [(lhs, weight), ...]`` over the binary rules."""
        if "by_rhs" not in self._cache:
            index = defaultdict(list)
            for r in self.binary_rules:
                index[r.left, r.right].append((r.lhs, r.weight))
            self._cache["by_rhs"] = dict(index)
        return self._cache["by_rhs"]

    @property
    def num_nt(self):
        return len(self.nonterminals)

    def nt_index(self, name):
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self._nt_index[name]
        except KeyError:
            raise GrammarError(f"unknown nonterminal {name!r}") from None

    def encode(self, tokens):
        """Terminal strings to indices; raises UnknownToken (1-based position)."""
        out = []
        for pos, tok in enumerate(tokens, start=1):
            if isinstance(tok, (int, np.integer)):
                if not 0 <= tok < len(self.alphabet):
                    raise UnknownToken(pos, tok)
                out.append(int(tok))
                continue
            try:
                out.append(self._term_index[tok])
            except KeyError:
                raise UnknownToken(pos, tok) from None
        return np.array(out, dtype=np.intp)

    def tensors(self, semiring=PROB):
        sr = get_semiring(semiring)
        key = ("tensors", sr.name)
        if key not in self._cache:
            self._cache[key] = build_tensors(self, sr)
        return self._cache[key]

    def __str__(self):
        return format_grammar(self)


def build_tensors(g, semiring=PROB):
    """Uncached dense weight tensors (see :class:`GrammarTensors`)."""
    sr = get_semiring(semiring)
    n, t = g.num_nt, len(g.alphabet)
    binary = np.zeros((n, n, n))
    lexical = np.zeros((n, t))
    for r in g.binary_rules:
        binary[r.lhs, r.left, r.right] = r.weight
    for r in g.lexical_rules:
        lexical[r.lhs, r.terminal] = r.weight
    eps = g.epsilon_weight
    return GrammarTensors(
        sr,
        sr.from_prob(binary),
        sr.from_prob(lexical),
        sr.zero if eps is None else sr.from_prob(eps)[()],
    )


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<arrow>->)
      | (?P<colon>:)
      | (?P<term>'(?:[^'\\]|\\.)*')
      | (?P<comment>\#.*)
      | (?P<word>(?:(?!->)[^\s'#:])+)
    )""",
    re.VERBOSE,
)


def _tokenize(line, lineno):
    out = []
    pos = 0
    line = line.rstrip("\r\n")
    while pos < len(line):
        if not line[pos:].strip():
            break
        m = _TOKEN.match(line, pos)
        if m is None:
            raise GrammarSyntaxError(lineno, f"cannot read {line[pos:].strip()!r}")
        kind = m.lastgroup
        pos = m.end()
        if kind == "comment":
            break
        out.append((kind, m.group(kind)))
    return out


def _unquote(lit):
    return re.sub(r"\\(['\\])", r"\1", lit[1:-1])


def _quote(term):
    return "'" + term.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _parse_weight(text, lineno):
    try:
        w = float(text)
    except ValueError:
        raise GrammarSyntaxError(lineno, f"bad weight {text!r}") from None
    if not np.isfinite(w) or w < 0:
        raise GrammarSyntaxError(lineno, f"weight must be a finite non-negative number, got {text!r}")
    return w


def parse_grammar(text):
    """Parse the line-based grammar format into an indexed :class:`Grammar`.

    Nonterminals are numbered by first appearance in the rules; terminals
    likewise.  The start symbol is the ``@start`` header if present, else
    the LHS of the first rule.
    """
    if hasattr(text, "read"):
        text = text.read()
    start_name = None
    nts, terms = {}, {}
    raw = []  # (lineno, kind, lhs, rhs, weight)
    seen = {}

    def nt(name):
        return nts.setdefault(name, len(nts))

    # only \n ends a line; other Unicode line breaks may sit inside a terminal
    for lineno, line in enumerate(text.split("\n"), start=1):
        toks = _tokenize(line, lineno)
        if not toks:
            continue
        kinds = [k for k, _ in toks]
        if kinds[0] == "word" and toks[0][1].startswith("@"):
            if toks[0][1] != "@start" or kinds != ["word", "word"]:
                raise GrammarSyntaxError(lineno, "expected '@start <SYMBOL>'")
            if start_name is not None:
                raise GrammarSyntaxError(lineno, "duplicate @start header")
            start_name = toks[1][1]
            continue
        if len(toks) < 4 or kinds[:2] != ["word", "arrow"] or kinds[-2:] != ["colon", "word"]:
            raise GrammarSyntaxError(lineno, "expected 'LHS -> RHS : weight'")
        lhs_name = toks[0][1]
        weight = _parse_weight(toks[-1][1], lineno)
        rhs = toks[2:-2]
        rhs_kinds = [k for k, _ in rhs]
        lhs = nt(lhs_name)
        if rhs_kinds == ["word", "word"]:
            key = ("bin", lhs, rhs[0][1], rhs[1][1])
            rule = ("bin", lhs, (nt(rhs[0][1]), nt(rhs[1][1])), weight)
            shown = f"{lhs_name} -> {rhs[0][1]} {rhs[1][1]}"
        elif rhs_kinds == ["term"]:
            term = _unquote(rhs[0][1])
            if not term:
                raise GrammarSyntaxError(lineno, "empty terminal")
            key = ("lex", lhs, term)
            rule = ("lex", lhs, terms.setdefault(term, len(terms)), weight)
            shown = f"{lhs_name} -> {rhs[0][1]}"
        elif not rhs_kinds:
            key = ("eps", lhs)
            rule = ("eps", lhs, None, weight)
            shown = f"{lhs_name} -> (empty)"
        else:
            raise GrammarSyntaxError(lineno, "RHS must be 'Y Z', a quoted terminal, or empty")
        if key in seen:
            raise DuplicateRule(lineno, shown)
        seen[key] = lineno
        raw.append((lineno, *rule))

    if not raw:
        raise GrammarSyntaxError(0, "grammar has no rules")
    if start_name is None:
        start = raw[0][2]
    elif start_name in nts:
        start = nts[start_name]
    else:
        raise UnknownStartSymbol(f"start symbol {start_name!r} does not occur in any rule")
    clash = set(nts) & set(terms)
    if clash:
        raise GrammarError(f"symbols used as both nonterminal and terminal: {sorted(clash)}")

    rules = []
    for lineno, kind, lhs, rhs, weight in raw:
        if kind == "bin":
            rules.append(BinaryRule(lhs, rhs[0], rhs[1], weight))
        elif kind == "lex":
            rules.append(LexicalRule(lhs, rhs, weight))
        else:
            if lhs != start:
                raise GrammarSyntaxError(lineno, "only the start symbol may rewrite to the empty string")
            rules.append(EpsilonRule(lhs, weight))
    if any(isinstance(r, EpsilonRule) for r in rules):
        if any(start in (r.left, r.right) for r in rules if isinstance(r, BinaryRule)):
            raise GrammarError("a start symbol with an epsilon rule may not occur on a right-hand side")
    return Grammar(tuple(nts), tuple(terms), start, tuple(rules))


def load_grammar(path):
    with open(path, encoding="utf-8") as fh:
        return parse_grammar(fh.read())


def format_grammar(g):
    names = g.nonterminals
    lines = [f"@start {names[g.start]}"]
    for r in g.rules:
        if isinstance(r, BinaryRule):
            rhs = f"{names[r.left]} {names[r.right]}"
        elif isinstance(r, LexicalRule):
            rhs = _quote(g.alphabet[r.terminal])
        else:
            rhs = ""
        lines.append(f"{names[r.lhs]} -> {rhs}{' ' if rhs else ''}: {r.weight!r}")
    return "\n".join(lines) + "\n"


def make_grammar(nonterminals, alphabet, start, binary=(), lexical=(), epsilon=None):
    """Build a Grammar from index-based rule lists (binary rules first).

    Indices are kept as given, so the result only round-trips through the
    file format unchanged if they follow first-appearance order.
    """
    rules = [BinaryRule(*r) for r in binary] + [LexicalRule(*r) for r in lexical]
    if epsilon is not None:
        rules.append(EpsilonRule(start, epsilon))
    return Grammar(tuple(nonterminals), tuple(alphabet), start, tuple(rules))


@dataclass
class ValidationReport:
    cnf_shape: bool
    rule_sums: dict  # nonterminal name -> total weight of its rules
    unreachable: list
    extinction: dict  # nonterminal name -> extinction probability
    start: str
    tol: float = NORMALIZATION_TOL

    @property
    def normalization_failures(self):
        return {x: s for x, s in self.rule_sums.items() if abs(s - 1.0) > self.tol}

    @property
    def local_normalization(self):
        return not self.normalization_failures

    @property
    def trim(self):
        return not self.unreachable

    @property
    def tight(self):
        return self.extinction[self.start] > 1.0 - TIGHT_TOL

    @property
    def ok(self):
        """Hard checks only; tightness is reported but never fails a grammar."""
        return self.cnf_shape and self.local_normalization and self.trim

    def lines(self):
        out = [f"cnf_shape: {'ok' if self.cnf_shape else 'FAIL'}"]
        if self.local_normalization:
            out.append("local_normalization: ok")
        else:
            out.append("local_normalization: FAIL")
            for x, s in self.normalization_failures.items():
                out.append(f"  {x}: rule weights sum to {s!r}")
        if self.trim:
            out.append("trim: ok")
        else:
            out.append(f"trim: FAIL (unreachable: {', '.join(self.unreachable)})")
        q = self.extinction[self.start]
        out.append(f"tight: {'yes' if self.tight else 'NO (warning)'} (extinction probability of {self.start} = {q:.12g})")
        return out


def reachable(g):
    succ = defaultdict(set)
    for r in g.binary_rules:
        succ[r.lhs].update((r.left, r.right))
    seen = {g.start}
    todo = deque([g.start])
    while todo:
        x = todo.popleft()
        for y in succ[x] - seen:
            seen.add(y)
            todo.append(y)
    return seen


def tightness_estimate(g, tol=1e-12, max_iter=10_000):
    """Extinction probabilities by fixed-point iteration from 0.

    ``q[X]`` is the probability that a derivation from ``X`` terminates;
    the grammar is tight iff ``q[start]`` is (numerically) 1.
    """
    t = g.tensors(PROB)
    base = t.lexical.sum(axis=1)
    if g.epsilon_weight is not None:
        base = base.copy()
        base[g.start] += g.epsilon_weight
    q = np.zeros(g.num_nt)
    for _ in range(max_iter):
        nxt = np.einsum("xyz,y,z->x", t.binary, q, q) + base
        done = np.max(np.abs(nxt - q)) < tol
        q = nxt
        if done:
            break
    return q


def validate(g):
    sums = defaultdict(float)
    for r in g.rules:
        sums[r.lhs] += r.weight
    names = g.nonterminals
    reach = reachable(g)
    q = tightness_estimate(g)
    return ValidationReport(
        cnf_shape=True,
        rule_sums={names[x]: s for x, s in sorted(sums.items())},
        unreachable=[names[x] for x in range(g.num_nt) if x not in reach],
        extinction={names[x]: float(q[x]) for x in range(g.num_nt)},
        start=names[g.start],
    )
