"""Left-corner transition matrix and left-corner expectations."""

from dataclasses import dataclass

import numpy as np

from .linalg import SquareMatrix, closure
from .semiring import PROB, Semiring, get_semiring


@dataclass(frozen=True, eq=False)
class LeftCornerTables:
    p_matrix: SquareMatrix  # P[X, Y] = sum_Z p(X -> Y Z)
    e_lc: SquareMatrix  # P* ; e_lc[X, Y] = E_lc(Y | X)
    e_lc_pair: np.ndarray  # [X, Y, Z] = E_lc(Y Z | X), or None if not requested
    semiring: Semiring
    method: str
    rhs_pairs: tuple = ()

    @property
    def e_lc_rule(self):
        """``{(X, (Y, Z)): E_lc(Y Z | X)}`` for every RHS pair used by a rule."""
        if self.e_lc_pair is None:
            return {}
        d = self.e_lc.dim
        return {(x, yz): self.e_lc_pair[x, yz[0], yz[1]] for x in range(d) for yz in self.rhs_pairs}


def build_p_matrix(g, semiring=PROB):
    sr = get_semiring(semiring)
    return SquareMatrix(sr.sum(g.tensors(sr).binary, axis=2), sr)


def pair_expectations(e_lc, binary, semiring):
    """``E_lc(Y Z | X) = sum_X' E_lc(X' | X) * p(X' -> Y Z)``, O(|N|^4)."""
    return semiring.einsum("xa,ayz->xyz", np.asarray(e_lc), binary)


def left_corner_expectations(g, method=None, semiring=PROB, with_pairs=True):
    """Compute P, its closure P*, and (optionally) the pair expectations.

    ``method`` is ``"inversion"`` (probability semiring only) or
    ``"lehmann"``; the default is inversion for probabilities and Lehmann
    otherwise.  Closure errors propagate.
    """
    sr = get_semiring(semiring)
    p = build_p_matrix(g, sr)
    if method is None:
        method = "inversion" if sr is PROB else "lehmann"
    star = closure(p, method)
    pairs = pair_expectations(star.entries, g.tensors(sr).binary, sr) if with_pairs else None
    return LeftCornerTables(p, star, pairs, sr, method, tuple(g.binary_by_rhs))
