"""All-prefix probabilities: Jelinek-Lafferty and the factored speed-up.

``jl``                O(N^3 |N|^3 + |N|^4), probability semiring
``fast_jl``           O(N^2 |N|^3 + N^3 |N|^2), probability semiring
``fast_semiring_jl``  same dataflow as ``fast_jl`` over any semiring, with
                      the left-corner closure from Lehmann's algorithm

All three return a :class:`PrefixResult` whose chart holds
``p_pi(i, k | X)``, the weight of ``X`` deriving ``w_i .. w_k`` followed by
any continuation.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .inside import Chart, PairChart, _chart_zeros, _diagonal, _encode, _fold_splits, _left_parts, _pair_zeros, _right_parts, cky, cky_factored
from .leftcorner import LeftCornerTables, left_corner_expectations
from .semiring import PROB, Semiring, get_semiring


@dataclass(frozen=True, eq=False)
class PrefixResult:
    chart: Chart
    per_prefix: np.ndarray  # p_pi(1, k | S) for k = 1..n
    per_token_conditional: Optional[np.ndarray]  # None without division
    inside: Chart
    semiring: Semiring = PROB
    gamma: Optional[PairChart] = None
    delta: Optional[PairChart] = None

    @property
    def n(self):
        return len(self.per_prefix)


def _finish(p, beta, g, sr, gamma=None, delta=None):
    per_prefix = p[0, :, g.start].copy()
    cond = None
    if sr.has_division:
        prev = np.concatenate([[sr.one], per_prefix[:-1]])
        cond = sr.div(per_prefix, prev)
    return PrefixResult(Chart(p, sr), per_prefix, cond, Chart(beta, sr), sr, gamma, delta)


def _base_case(sr, e_lc, lexical, w, num_nt):
    """``p_pi(k, k | X) = sum_Y E_lc(Y | X) * p(Y -> w_k)`` on the diagonal."""
    n = len(w)
    p = _chart_zeros(sr, n, num_nt)
    idx = np.arange(n)
    p[idx, idx] = sr.einsum("xy,yk->kx", e_lc, lexical[:, w])
    return p


def _check_tables(tables, sr):
    if tables.semiring is not sr:
        raise ValueError(f"left-corner tables are over {tables.semiring.name}, expected {sr.name}")


def jl(tokens, g, tables=None):
    """Jelinek-Lafferty prefix probabilities (probability semiring).

    The recursion contracts ``E_lc(Y Z | X)`` against every split ``j`` and
    every ``(Y, Z)`` pair in one loop nest, which is where the
    ``N^3 |N|^3`` cost comes from.
    """
    w = _encode(tokens, g)
    if tables is None:
        tables = left_corner_expectations(g, "inversion", PROB, with_pairs=True)
    _check_tables(tables, PROB)
    pair = tables.e_lc_pair
    if pair is None:
        raise ValueError("jl needs left-corner tables built with with_pairs=True")
    t = g.tensors(PROB)
    beta = cky(w, g).values
    n = len(w)
    p = _base_case(PROB, tables.e_lc.entries, t.lexical, w, g.num_nt)
    for length in range(2, n + 1):
        i, k = _diagonal(n, length)
        left, right = _left_parts(beta, length), _right_parts(p, length)
        p[i, k] = np.einsum("xyz,ijy,ijz->ix", pair, left, right, optimize=False)
    return _finish(p, beta, g, PROB)


def fast_jl(tokens, g, tables=None, inside=None):
    """Factored Jelinek-Lafferty (probability semiring).

    ``delta[i, j](X, Z) = sum_X' E_lc(X' | X) * gamma[i, j](X', Z)`` is
    precomputed for every span, after which
    ``p_pi(i, k | X) = sum_{j, Z} delta[i, j](X, Z) * p_pi(j + 1, k | Z)``.
    ``inside`` may pass a precomputed ``cky_factored`` result to share gamma.
    """
    w = _encode(tokens, g)
    if tables is None:
        tables = left_corner_expectations(g, "inversion", PROB, with_pairs=False)
    _check_tables(tables, PROB)
    t = g.tensors(PROB)
    beta, gamma = inside if inside is not None else cky_factored(w, g)
    beta, gamma = beta.values, gamma.values
    n = len(w)
    e_lc = tables.e_lc.entries
    delta = _pair_zeros(PROB, n, g.num_nt)
    for i in range(n):
        np.matmul(e_lc, gamma[i, i:], out=delta[i, i:])

    p = _base_case(PROB, e_lc, t.lexical, w, g.num_nt)
    for length in range(2, n + 1):
        i, k = _diagonal(n, length)
        p[i, k] = _fold_splits(PROB, delta, p, length)
    return _finish(p, beta, g, PROB, PairChart(gamma), PairChart(delta))


def fast_semiring_jl(tokens, g, semiring=PROB, tables=None, inside=None):
    """Factored Jelinek-Lafferty over an arbitrary complete semiring.

    Rule weights are mapped into ``semiring`` from their probabilities; the
    left-corner closure defaults to Lehmann's algorithm.
    """
    sr = get_semiring(semiring)
    w = _encode(tokens, g)
    if tables is None:
        tables = left_corner_expectations(g, "lehmann", sr, with_pairs=False)
    _check_tables(tables, sr)
    t = g.tensors(sr)
    beta, gamma = inside if inside is not None else cky_factored(w, g, sr)
    beta, gamma = beta.values, gamma.values
    n = len(w)
    e_lc = tables.e_lc.entries
    delta = _pair_zeros(sr, n, g.num_nt)
    for i in range(n):
        delta[i, i:] = sr.einsum("xy,jyz->jxz", e_lc, gamma[i, i:])

    p = _base_case(sr, e_lc, t.lexical, w, g.num_nt)
    for length in range(2, n + 1):
        i, k = _diagonal(n, length)
        p[i, k] = _fold_splits(sr, delta, p, length)
    return _finish(p, beta, g, sr, PairChart(gamma, sr), PairChart(delta, sr))


ALGORITHMS = {
    "jl": jl,
    "fastjl": fast_jl,
    "semiring-fastjl": fast_semiring_jl,
}


def prefix_tables(g, algo, semiring=PROB):
    """Left-corner tables suited to ``algo``, for reuse across sentences."""
    sr = get_semiring(semiring)
    if algo == "jl":
        return left_corner_expectations(g, "inversion", PROB, with_pairs=True)
    if algo == "fastjl":
        return left_corner_expectations(g, "inversion", PROB, with_pairs=False)
    if algo == "semiring-fastjl":
        return left_corner_expectations(g, "lehmann", sr, with_pairs=False)
    raise ValueError(f"unknown prefix algorithm {algo!r}")
