"""Inside charts: textbook CKY and the factored dense-grammar variant.

Charts are dense.  ``values[i - 1, k - 1, X]`` holds the weight for the span
``w_i .. w_k`` (1-based, inclusive, as in the public accessors); cells with
``i > k`` stay at the semiring zero and are never read.  ``values`` may be a
transposed view: the storage order is chosen so split windows are contiguous.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .semiring import PROB, Semiring, get_semiring


@dataclass(frozen=True, eq=False)
class Chart:
    values: np.ndarray  # (n, n, |N|)
    semiring: Semiring = PROB

    @property
    def n(self):
        return self.values.shape[0]

    def __getitem__(self, key):
        i, k, x = key
        return self.values[i - 1, k - 1, x]


@dataclass(frozen=True, eq=False)
class PairChart:
    values: np.ndarray  # (n, n, |N|, |N|)
    semiring: Semiring = PROB

    @property
    def n(self):
        return self.values.shape[0]

    def __getitem__(self, key):
        i, j, x, z = key
        return self.values[i - 1, j - 1, x, z]


def _encode(tokens, g):
    w = g.encode(tokens)
    if len(w) == 0:
        raise ValueError("inside charts need a non-empty sentence")
    return w


def _diagonal(n, length):
    """Start and end indices (0-based) of all spans of ``length`` tokens."""
    i = np.arange(n - length + 1)
    return i, i + length - 1


def _left_parts(chart, length):
    """Read-only view ``[i, t] -> chart[i, i + t]``: left parts of every span of ``length``.

    Split cells lie on a regular diagonal stride, so no copy is needed.
    """
    n = chart.shape[0]
    s0, s1 = chart.strides[:2]
    shape = (n - length + 1, length - 1) + chart.shape[2:]
    return as_strided(chart, shape, (s0 + s1, s1) + chart.strides[2:], writeable=False)


def _right_parts(chart, length):
    """Read-only view ``[i, t] -> chart[i + t + 1, i + length - 1]``: the matching right parts."""
    n = chart.shape[0]
    s0, s1 = chart.strides[:2]
    shape = (n - length + 1, length - 1) + chart.shape[2:]
    return as_strided(chart[1:, length - 1 :], shape, (s0 + s1, s0) + chart.strides[2:], writeable=False)


def _chart_zeros(sr, n, m):
    """Chart as an [i, k, X] view over k-major storage.

    The right parts of a span, ``chart[j + 1, k]`` for consecutive ``j``, are
    then one contiguous block.
    """
    return sr.zeros((n, n, m)).transpose(1, 0, 2)


def _pair_zeros(sr, n, m):
    """Pair chart as an (X, Z) view over z-major storage.

    With ``Z`` outermost in each cell, the split index and ``Z`` of a window
    merge into one axis, so ``_fold_splits`` can hand each window to BLAS.
    """
    return sr.zeros((n, n, m, m)).transpose(0, 1, 3, 2)


def _fold_splits(sr, pairs, chart, length):
    """``out[i](X) = (+)_{t, Z} pairs[i, i + t](X, Z) (x) chart[i + t + 1, i + length - 1](Z)``."""
    left, right = _left_parts(pairs, length), _right_parts(chart, length)
    s = left.strides
    if sr is not PROB or s[1] != s[3] * left.shape[3]:
        return sr.einsum("ijxz,ijz->ix", left, right)
    spans, splits, m = right.shape
    flat = as_strided(left, (spans, splits * m, m), (s[0], s[3], s[2]), writeable=False)
    return np.matmul(right.reshape(spans, 1, splits * m), flat)[:, 0]


def _lexical_init(sr, lexical, w, num_nt):
    n = len(w)
    beta = _chart_zeros(sr, n, num_nt)
    idx = np.arange(n)
    beta[idx, idx] = lexical[:, w].T
    return beta


def cky(tokens, g, semiring=PROB):
    """Inside chart by CKY, O(N^3 |N|^3).

    For each span the rule loop and the split loop are contracted together
    (X, Y, Z and j in one pass), as in the textbook algorithm.
    """
    sr = get_semiring(semiring)
    t = g.tensors(sr)
    w = _encode(tokens, g)
    n = len(w)
    beta = _lexical_init(sr, t.lexical, w, g.num_nt)
    for length in range(2, n + 1):
        i, k = _diagonal(n, length)
        left, right = _left_parts(beta, length), _right_parts(beta, length)
        beta[i, k] = sr.einsum("xyz,ijy,ijz->ix", t.binary, left, right, optimize=False)
    return Chart(beta, sr)


def cky_factored(tokens, g, semiring=PROB):
    """Inside chart in O(N^2 |N|^3 + N^3 |N|^2), plus the gamma pair chart.

    ``gamma[i, j](X, Z) = sum_Y p(X -> Y Z) * beta(i, j | Y)`` folds the left
    child into the rule weight once per span, after which
    ``beta(i, k | X) = sum_{j, Z} gamma[i, j](X, Z) * beta(j + 1, k | Z)``.
    Each gamma cell is written once, as soon as its span is complete.
    """
    sr = get_semiring(semiring)
    t = g.tensors(sr)
    w = _encode(tokens, g)
    n, m = len(w), g.num_nt
    beta = _lexical_init(sr, t.lexical, w, m)
    gamma = _pair_zeros(sr, n, m)

    if sr is PROB:
        by_child = t.binary.transpose(1, 0, 2).reshape(m, m * m)  # [Y, (X, Z)]

    def fold(length):
        i, j = _diagonal(n, length)
        if sr is PROB:
            gamma[i, j] = np.matmul(beta[i, j], by_child).reshape(-1, m, m)
        else:
            gamma[i, j] = sr.einsum("xyz,iy->ixz", t.binary, beta[i, j])

    fold(1)
    for length in range(2, n + 1):
        i, k = _diagonal(n, length)
        beta[i, k] = _fold_splits(sr, gamma, beta, length)
        fold(length)
    return Chart(beta, sr), PairChart(gamma, sr)
