"""Complete semirings with a Kleene star, operating on numpy arrays.

A semiring instance is chosen once when a chart or matrix is built; every
operation is vectorized so dense kernels never branch per element.  Values
are plain numpy scalars/arrays over the instance's carrier:

* ``prob``     non-negative reals, (+, *)
* ``log``      natural logs of non-negative reals, (logaddexp, +), zero = -inf
* ``viterbi``  reals in [0, 1], (max, *)
* ``boolean``  truth values, (or, and)
"""

import numpy as np

from .errors import NonConvergent

# a star argument within this distance of 1 is treated as divergent
STAR_TOL = 1e-12


class Semiring:
    name = None
    zero = None
    one = None
    dtype = float
    idempotent = False
    has_division = False

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def sum(self, a, axis=None):
        """Fold ``add`` over ``axis`` (all axes when None)."""
        raise NotImplementedError

    def star(self, a):
        raise NotImplementedError

    def from_prob(self, p):
        """Map probability-domain weights into the carrier set."""
        raise NotImplementedError

    def div(self, a, b):
        raise TypeError(f"the {self.name} semiring has no division")

    def zeros(self, shape):
        return np.full(shape, self.zero, dtype=self.dtype)

    def ones(self, shape):
        return np.full(shape, self.one, dtype=self.dtype)

    def eye(self, d):
        out = self.zeros((d, d))
        np.fill_diagonal(out, self.one)
        return out

    def asarray(self, a):
        return np.asarray(a, dtype=self.dtype)

    def matmul(self, a, b):
        a, b = self.asarray(a), self.asarray(b)
        return self.sum(self.mul(a[..., :, :, None], b[..., None, :, :]), axis=-2)

    def einsum(self, spec, *operands, optimize=True):
        """Semiring analogue of ``np.einsum`` for explicit-output specs.

        Every operand is broadcast into the joint index space, multiplied,
        and the indices missing from the output are folded with ``sum``.
        Repeated indices within one operand are not supported.
        """
        lhs, out = spec.replace(" ", "").split("->")
        subs = lhs.split(",")
        if len(subs) != len(operands):
            raise ValueError(f"{spec!r} expects {len(subs)} operands")
        letters = []
        for s in subs:
            letters.extend(c for c in s if c not in letters)
        sizes = {}
        expanded = []
        for s, op in zip(subs, operands):
            op = self.asarray(op)
            if len(set(s)) != len(s) or op.ndim != len(s):
                raise ValueError(f"bad subscripts {s!r} for shape {op.shape}")
            for c, n in zip(s, op.shape):
                sizes.setdefault(c, n)
            present = [c for c in letters if c in s]
            op = np.transpose(op, [s.index(c) for c in present])
            op = op.reshape([op.shape[present.index(c)] if c in s else 1 for c in letters])
            expanded.append(op)
        prod = expanded[0]
        for op in expanded[1:]:
            prod = self.mul(prod, op)
        prod = np.broadcast_to(prod, [sizes[c] for c in letters])
        reduced = tuple(i for i, c in enumerate(letters) if c not in out)
        kept = [c for c in letters if c in out]
        res = self.sum(prod, axis=reduced) if reduced else np.array(prod)
        return np.transpose(res, [kept.index(c) for c in out])

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"

    def __reduce__(self):
        # instances are singletons; keep them that way across pickling
        return (get_semiring, (self.name,))


class ProbabilitySemiring(Semiring):
    name = "prob"
    zero = 0.0
    one = 1.0
    has_division = True

    def add(self, a, b):
        return np.add(a, b)

    def mul(self, a, b):
        return np.multiply(a, b)

    def sum(self, a, axis=None):
        return np.sum(a, axis=axis)

    def star(self, a):
        a = np.asarray(a, dtype=float)
        if np.any(a >= 1.0 - STAR_TOL):
            raise NonConvergent(f"star of {a.max()!r} diverges in the probability semiring")
        return 1.0 / (1.0 - a)

    def from_prob(self, p):
        return np.asarray(p, dtype=float)

    def zeros(self, shape):
        # calloc-backed: cells never written (the unused chart triangle) cost nothing
        return np.zeros(shape)

    def div(self, a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(np.asarray(b) == 0, np.nan, np.divide(a, b))

    def matmul(self, a, b):
        return np.matmul(a, b)

    def einsum(self, spec, *operands, optimize=True):
        return np.einsum(spec, *operands, optimize=optimize)


def _logsumexp(a, axis=None):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.full(np.sum(a, axis=axis).shape, -np.inf)[()]
    m = np.max(a, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(np.exp(a - shift), axis=axis, keepdims=True)) + shift
    if axis is None:
        return s.reshape(())[()]
    return np.squeeze(s, axis=axis)


class LogSemiring(Semiring):
    name = "log"
    zero = -np.inf
    one = 0.0
    has_division = True

    def add(self, a, b):
        return np.logaddexp(a, b)

    def mul(self, a, b):
        return np.add(a, b)

    def sum(self, a, axis=None):
        return _logsumexp(a, axis=axis)

    def star(self, a):
        a = np.asarray(a, dtype=float)
        if np.any(a >= np.log1p(-STAR_TOL)):
            raise NonConvergent(f"star of exp({a.max()!r}) diverges in the log semiring")
        # log(1 / (1 - e^a)), accurate for a close to 0
        return -np.log(-np.expm1(a))

    def from_prob(self, p):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(p, dtype=float))

    def div(self, a, b):
        with np.errstate(invalid="ignore"):
            return np.where(np.asarray(b) == -np.inf, np.nan, np.subtract(a, b))


class ViterbiSemiring(Semiring):
    name = "viterbi"
    zero = 0.0
    one = 1.0
    idempotent = True

    def add(self, a, b):
        return np.maximum(a, b)

    def mul(self, a, b):
        return np.multiply(a, b)

    def sum(self, a, axis=None):
        return np.max(a, axis=axis, initial=0.0)

    def star(self, a):
        # sup of {a^n} is a^0 = 1 whenever a <= 1
        a = np.asarray(a, dtype=float)
        if np.any(a > 1.0):
            raise NonConvergent(f"star of {a.max()!r} diverges in the Viterbi semiring")
        return np.ones_like(a)

    def from_prob(self, p):
        return np.asarray(p, dtype=float)


class BooleanSemiring(Semiring):
    name = "boolean"
    zero = False
    one = True
    dtype = bool
    idempotent = True

    def add(self, a, b):
        return np.logical_or(a, b)

    def mul(self, a, b):
        return np.logical_and(a, b)

    def sum(self, a, axis=None):
        return np.any(a, axis=axis)

    def star(self, a):
        return np.ones_like(np.asarray(a, dtype=bool))

    def from_prob(self, p):
        return np.asarray(p) > 0


PROB = ProbabilitySemiring()
LOG = LogSemiring()
VITERBI = ViterbiSemiring()
BOOLEAN = BooleanSemiring()

SEMIRINGS = {sr.name: sr for sr in (PROB, LOG, VITERBI, BOOLEAN)}


def get_semiring(name):
    if isinstance(name, Semiring):
        return name
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise ValueError(f"unknown semiring {name!r}; choose from {sorted(SEMIRINGS)}") from None
