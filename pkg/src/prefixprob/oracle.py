"""Brute-force ground truth and random grammar fixtures.

Nothing in here touches the chart code in ``inside`` or ``prefix``: trees
are enumerated explicitly, and the truncated prefix sum runs its own
recursion, so a bug in the fast paths cannot hide behind a shared helper.
"""

import string
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GenerationFailed, UnknownToken, YieldTooLong
from .grammar import BinaryRule, LexicalRule, format_grammar, make_grammar, parse_grammar, tightness_estimate

MAX_YIELD = 8


@dataclass(frozen=True)
class DerivationTree:
    root: int
    rule: object  # BinaryRule or LexicalRule
    children: tuple  # (left, right) subtrees, or () for a lexical leaf
    weight: float

    @property
    def yield_(self):
        if not self.children:
            return (self.rule.terminal,)
        return self.children[0].yield_ + self.children[1].yield_

    def bracketed(self, g):
        name = g.nonterminals[self.root]
        if not self.children:
            return f"({name} {g.alphabet[self.rule.terminal]})"
        return f"({name} {self.children[0].bracketed(g)} {self.children[1].bracketed(g)})"


def enumerate_trees(g, root, tokens):
    """Every derivation subtree rooted at ``root`` whose yield is ``tokens``.

    Exhaustive over split points and rules; subtrees are shared between
    trees but each returned tree is distinct.  Unknown tokens give [].
    """
    if len(tokens) > MAX_YIELD:
        raise YieldTooLong(f"yield of length {len(tokens)} exceeds {MAX_YIELD}")
    try:
        w = tuple(int(a) for a in g.encode(tokens))
    except UnknownToken:
        return []
    root = g.nt_index(root)
    by_lhs_bin, by_lhs_lex = {}, {}
    for r in g.binary_rules:
        by_lhs_bin.setdefault(r.lhs, []).append(r)
    for r in g.lexical_rules:
        by_lhs_lex.setdefault((r.lhs, r.terminal), []).append(r)
    memo = {}

    def trees(x, i, k):
        key = (x, i, k)
        if key in memo:
            return memo[key]
        out = []
        if k == i + 1:
            for r in by_lhs_lex.get((x, w[i]), ()):
                out.append(DerivationTree(x, r, (), r.weight))
        else:
            for r in by_lhs_bin.get(x, ()):
                for j in range(i + 1, k):
                    for left in trees(r.left, i, j):
                        for right in trees(r.right, j, k):
                            out.append(DerivationTree(x, r, (left, right), r.weight * left.weight * right.weight))
        memo[key] = out
        return out

    if not w:
        return []
    return trees(root, 0, len(w))


def tree_sum(g, root, tokens):
    return sum(t.weight for t in enumerate_trees(g, root, tokens))


def length_masses(g, max_len):
    """``masses[l]`` = total probability of strings of length ``l`` from the start symbol.

    Plain recursion on yield length with every terminal merged into one;
    ``masses[0]`` is the epsilon weight.
    """
    m = g.num_nt
    binary = np.zeros((m, m, m))
    first = np.zeros(m)
    for r in g.rules:
        if isinstance(r, BinaryRule):
            binary[r.lhs, r.left, r.right] += r.weight
        elif isinstance(r, LexicalRule):
            first[r.lhs] += r.weight
    by_len = np.zeros((max_len + 1, m))
    if max_len >= 1:
        by_len[1] = first
    for length in range(2, max_len + 1):
        left = by_len[1:length]
        right = by_len[length - 1 : 0 : -1]
        by_len[length] = np.einsum("xyz,jy,jz->x", binary, left, right)
    masses = by_len[:, g.start].copy()
    masses[0] = g.epsilon_weight or 0.0
    return masses


def tail_bound(g, max_len):
    """Probability mass on strings longer than ``max_len`` (tight grammars)."""
    return max(0.0, 1.0 - float(np.sum(length_masses(g, max_len))))


def choose_max_len(g, target, min_len=1, limit=4000):
    """Smallest length cut-off whose tail bound is below ``target``."""
    masses = length_masses(g, limit)
    tails = 1.0 - np.cumsum(masses)
    ok = np.nonzero(tails[min_len:] < target)[0]
    if len(ok) == 0:
        raise ValueError(f"tail bound stays above {target} up to length {limit}")
    return int(ok[0]) + min_len


class PrefixBracket(NamedTuple):
    lower: float
    tail_bound: float


def prefix_oracle(g, tokens, max_total_len):
    """Bracket ``p_pi(tokens | S)`` by summing over bounded continuations.

    ``lower`` is the total probability of all strings ``tokens + u`` with
    ``len(tokens + u) <= max_total_len``; ``tail_bound`` is the mass on all
    strings longer than the cut-off, so for a tight grammar the true prefix
    probability lies in ``[lower, lower + tail_bound]``.

    The continuation ``u`` is summed position by position: a free position
    contributes ``sum_a p(X -> a)`` instead of a single lexical weight, so a
    span lying entirely in the continuation only depends on its length.
    """
    tail = tail_bound(g, max_total_len)
    try:
        w = [int(a) for a in g.encode(tokens)]
    except UnknownToken:
        return PrefixBracket(0.0, tail)
    n, total = len(w), max_total_len
    if n == 0:
        return PrefixBracket(float(np.sum(length_masses(g, total))), tail)
    if n > total:
        return PrefixBracket(0.0, tail)

    m = g.num_nt
    binary = np.zeros((m, m, m))
    lexical = np.zeros((m, len(g.alphabet)))
    for r in g.rules:
        if isinstance(r, BinaryRule):
            binary[r.lhs, r.left, r.right] += r.weight
        elif isinstance(r, LexicalRule):
            lexical[r.lhs, r.terminal] += r.weight
    free = np.zeros((total + 1, m))  # free[l]: inside weight of l free positions
    free[1] = lexical.sum(axis=1)
    for length in range(2, total + 1):
        free[length] = np.einsum("xyz,jy,jz->x", binary, free[1:length], free[length - 1 : 0 : -1])

    # fixed[i][e]: inside weight of positions i..e (0-based) where i < n
    fixed = [[None] * total for _ in range(n)]
    for e in range(total):
        for i in range(min(e, n - 1), -1, -1):
            if i == e:
                fixed[i][e] = lexical[:, w[i]]
                continue
            left = np.array([fixed[i][j] for j in range(i, e)])
            right = np.array([fixed[j + 1][e] if j + 1 < n else free[e - j] for j in range(i, e)])
            fixed[i][e] = np.einsum("xyz,jy,jz->x", binary, left, right)
    lower = sum(float(fixed[0][e][g.start]) for e in range(n - 1, total))
    return PrefixBracket(lower, tail)


def _names(num_nt, num_terminals):
    nts = ["S"] + [f"X{i}" for i in range(1, num_nt)]
    if num_terminals <= len(string.ascii_lowercase):
        terms = list(string.ascii_lowercase[:num_terminals])
    else:
        terms = [f"t{i}" for i in range(num_terminals)]
    return nts, terms


def _is_tight(g):
    return tightness_estimate(g)[g.start] > 1.0 - 1e-6


def random_dense_grammar(num_nt, num_terminals, seed, lexical_mass=0.6, attempts=10):
    """Dense CNF grammar: every ``X -> Y Z`` and every ``X -> a`` is present.

    Each nonterminal puts a share of at least ``lexical_mass`` on its lexical
    rules.  Deterministic per seed; resampled until tight.
    """
    if num_nt < 1 or num_terminals < 1:
        raise ValueError("need at least one nonterminal and one terminal")
    if not 0.0 < lexical_mass < 1.0:
        raise ValueError("lexical_mass must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    nts, terms = _names(num_nt, num_terminals)
    for _ in range(attempts):
        binary, lexical = [], []
        for x in range(num_nt):
            share = rng.uniform(lexical_mass, 1.0)
            bw = rng.dirichlet(np.ones(num_nt * num_nt)) * (1.0 - share)
            lw = rng.dirichlet(np.ones(num_terminals)) * share
            binary += [(x, y, z, float(bw[y * num_nt + z])) for y in range(num_nt) for z in range(num_nt)]
            lexical += [(x, a, float(lw[a])) for a in range(num_terminals)]
        g = make_grammar(nts, terms, 0, binary, lexical)
        if _is_tight(g):
            return g
    raise GenerationFailed(f"no tight grammar after {attempts} attempts (seed {seed})")


def random_sparse_grammar(num_nt, num_terminals, seed, lexical_mass=0.6, rules_per_nt=2, attempts=10):
    """Trim random grammar with ``rules_per_nt`` binary rules per nonterminal.

    Used where dense grammars would make exhaustive tree enumeration blow up.
    Every nonterminal also gets at least one lexical rule.
    """
    rng = np.random.default_rng(seed)
    nts, terms = _names(num_nt, num_terminals)
    pairs = num_nt * num_nt
    for _ in range(attempts):
        mask = np.zeros((num_nt, pairs), dtype=bool)
        for x in range(num_nt):
            mask[x, rng.choice(pairs, size=min(rules_per_nt, pairs), replace=False)] = True
        mask = mask.reshape(num_nt, num_nt, num_nt)
        for x in range(1, num_nt):
            # keep every nonterminal reachable from S
            parent = int(rng.integers(0, x))
            other = int(rng.integers(0, num_nt))
            if rng.random() < 0.5:
                mask[parent, x, other] = True
            else:
                mask[parent, other, x] = True
        lex_mask = rng.random((num_nt, num_terminals)) < 0.5
        lex_mask[np.arange(num_nt), rng.integers(0, num_terminals, num_nt)] = True
        binary, lexical = [], []
        for x in range(num_nt):
            rhs = np.argwhere(mask[x])
            share = rng.uniform(lexical_mass, 1.0) if len(rhs) else 1.0
            if len(rhs):
                bw = rng.dirichlet(np.ones(len(rhs))) * (1.0 - share)
                binary += [(x, int(y), int(z), float(v)) for (y, z), v in zip(rhs, bw)]
            (lex,) = np.nonzero(lex_mask[x])
            lw = rng.dirichlet(np.ones(len(lex))) * share
            lexical += [(x, int(a), float(v)) for a, v in zip(lex, lw)]
        # renumber nonterminals/terminals into first-appearance order
        g = parse_grammar(format_grammar(make_grammar(nts, terms, 0, binary, lexical)))
        if _is_tight(g):
            return g
    raise GenerationFailed(f"no tight grammar after {attempts} attempts (seed {seed})")
