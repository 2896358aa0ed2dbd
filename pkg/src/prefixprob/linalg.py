"""Square matrices over a complete semiring and their Kleene closure."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEntry, Singular
from .semiring import PROB, STAR_TOL, Semiring, get_semiring


@dataclass(frozen=True, eq=False)
class SquareMatrix:
    """A ``dim x dim`` matrix whose entries all live in ``semiring``."""

    entries: np.ndarray
    semiring: Semiring = PROB

    def __post_init__(self):
        sr = get_semiring(self.semiring)
        a = np.array(self.entries, dtype=sr.dtype)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "semiring", sr)

    @property
    def dim(self):
        return self.entries.shape[0]

    @classmethod
    def zero(cls, dim, semiring=PROB):
        sr = get_semiring(semiring)
        return cls(sr.zeros((dim, dim)), sr)

    @classmethod
    def identity(cls, dim, semiring=PROB):
        sr = get_semiring(semiring)
        return cls(sr.eye(dim), sr)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __add__(self, other):
        return mat_add(self, other)

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _check_pair(a, b):
    if a.semiring is not b.semiring:
        raise TypeError(f"semiring mismatch: {a.semiring.name} vs {b.semiring.name}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim}x{a.dim} vs {b.dim}x{b.dim}")


def mat_add(a, b):
    _check_pair(a, b)
    return SquareMatrix(a.semiring.add(a.entries, b.entries), a.semiring)


def mat_mul(a, b):
    _check_pair(a, b)
    return SquareMatrix(a.semiring.matmul(a.entries, b.entries), a.semiring)


def lehmann_closure(m):
    """Kleene closure ``M* = I + M + M^2 + ...`` by Lehmann's algorithm.

    Works over any complete semiring in O(d^3).  The update is done in a
    single buffer: pivot ``j`` reads a snapshot of row ``j`` and column ``j``
    taken before the step, which is exactly what the two-buffer recurrence
    ``M(j) = M(j-1) + M(j-1)[:, j] * star(M(j-1)[j, j]) * M(j-1)[j, :]`` reads.

    Raises NonConvergent if some pivot has no star.
    """
    sr = m.semiring
    a = np.array(m.entries)
    for j in range(m.dim):
        pivot = sr.star(a[j, j])
        col = a[:, j].copy()
        row = sr.mul(pivot, a[j, :])
        a = sr.add(a, sr.mul(col[:, None], row[None, :]))
    return SquareMatrix(sr.add(sr.eye(m.dim), a), sr)


def invert_closure(m, neg_tol=1e-9):
    """``(I - M)^-1`` for a probability-semiring matrix, via LAPACK solve."""
    if m.semiring is not PROB:
        raise TypeError("invert_closure is only defined over the probability semiring")
    d = m.dim
    a = np.eye(d) - m.entries
    try:
        inv = np.linalg.solve(a, np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise Singular(f"I - M is singular: {exc}") from None
    if not np.all(np.isfinite(inv)) or np.linalg.cond(a) > 1.0 / STAR_TOL:
        raise Singular("I - M is numerically singular")
    if np.any(inv < -neg_tol):
        raise NegativeEntry(f"(I - M)^-1 has entry {inv.min():.3g} < 0; the series diverges")
    return SquareMatrix(np.maximum(inv, 0.0), PROB)


def closure(m, method=None):
    """Dispatch to ``invert_closure`` or ``lehmann_closure``.

    ``method=None`` picks inversion for the probability semiring and
    Lehmann's algorithm otherwise.
    """
    if method is None:
        method = "inversion" if m.semiring is PROB else "lehmann"
    if method == "inversion":
        return invert_closure(m)
    if method == "lehmann":
        return lehmann_closure(m)
    raise ValueError(f"unknown closure method {method!r}")
