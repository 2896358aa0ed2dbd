import numpy as np
import pytest

from prefixprob.errors import ClosureError, NonConvergent
from prefixprob.grammar import parse_grammar
from prefixprob.leftcorner import build_p_matrix, left_corner_expectations
from prefixprob.linalg import SquareMatrix, mat_add, mat_mul
from prefixprob.oracle import random_dense_grammar, random_sparse_grammar
from prefixprob.semiring import BOOLEAN, LOG, PROB, VITERBI

from .conftest import DIVERGENT_TEXT, LEXICAL_ONLY_TEXT, NON_TIGHT_TEXT, SAB_TEXT, rel_close


class TestPMatrix:
    def test_g1(self, g1):
        assert np.array_equal(build_p_matrix(g1).entries, [[0.4]])

    def test_lexical_only(self):
        assert np.array_equal(build_p_matrix(parse_grammar(LEXICAL_ONLY_TEXT)).entries, [[0.0]])

    def test_sab(self):
        g = parse_grammar(SAB_TEXT)
        p = build_p_matrix(g).entries
        want = np.zeros((3, 3))
        want[g.nt_index("S"), g.nt_index("A")] = 1.0
        assert np.array_equal(p, want)

    def test_mixed_sums_over_right_child(self, mixed):
        # S -> S A : 0.2 and S -> A S : 0.1; A -> A A : 0.25
        assert np.allclose(build_p_matrix(mixed).entries, [[0.2, 0.1], [0.0, 0.25]], rtol=0, atol=1e-15)

    def test_semirings(self, mixed):
        assert np.allclose(np.exp(build_p_matrix(mixed, LOG).entries), build_p_matrix(mixed).entries)
        assert np.array_equal(build_p_matrix(mixed, BOOLEAN).entries, [[True, True], [False, True]])


class TestExpectations:
    def test_g1(self, g1):
        t = left_corner_expectations(g1)
        assert t.e_lc[0, 0] == pytest.approx(5 / 3, rel=1e-14)
        assert t.e_lc_pair[0, 0, 0] == pytest.approx(2 / 3, rel=1e-14)
        assert t.e_lc_rule == {(0, (0, 0)): pytest.approx(2 / 3, rel=1e-14)}
        assert t.method == "inversion"

    def test_lexical_only(self):
        t = left_corner_expectations(parse_grammar(LEXICAL_ONLY_TEXT))
        assert np.array_equal(t.e_lc.entries, [[1.0]])
        assert t.e_lc_rule == {}

    def test_mixed_analytic(self, mixed):
        # upper-triangular P: E = [[1/0.8, 0.1/(0.8*0.75)], [0, 1/0.75]]
        e = left_corner_expectations(mixed).e_lc.entries
        assert rel_close(e, [[1.25, 0.1 / 0.6], [0.0, 4 / 3]], 1e-14)

    def test_without_pairs(self, g1):
        assert left_corner_expectations(g1, with_pairs=False).e_lc_pair is None

    def test_default_method_per_semiring(self, g1):
        assert left_corner_expectations(g1, semiring=LOG).method == "lehmann"

    @pytest.mark.parametrize("seed", range(10))
    def test_methods_agree(self, seed):
        g = random_dense_grammar(1 + seed, 3, seed)
        a = left_corner_expectations(g, "inversion")
        b = left_corner_expectations(g, "lehmann")
        assert rel_close(a.e_lc.entries, b.e_lc.entries, 1e-9)
        assert rel_close(a.e_lc_pair, b.e_lc_pair, 1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_fixed_point_and_diagonal(self, seed):
        g = random_sparse_grammar(6, 3, seed)
        t = left_corner_expectations(g)
        back = mat_add(SquareMatrix.identity(6), mat_mul(t.p_matrix, t.e_lc))
        assert rel_close(back.entries, t.e_lc.entries, 1e-9, atol=1e-15)
        assert np.all(np.diag(t.e_lc.entries) >= 1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_truncated_powers(self, seed):
        g = random_dense_grammar(5, 2, seed)
        t = left_corner_expectations(g)
        p, e = t.p_matrix.entries, t.e_lc.entries
        partial, power, prev = np.zeros_like(p), np.eye(len(p)), np.inf
        for _ in range(31):
            partial += power
            power = power @ p
            assert np.all(partial <= e + 1e-12)
            gap = np.max(e - partial)
            assert gap <= prev
            prev = gap
        assert prev < 1e-3

    @pytest.mark.parametrize("seed", range(5))
    def test_pairs_by_naive_loop(self, seed):
        g = random_sparse_grammar(5, 2, seed)
        t = left_corner_expectations(g)
        m = g.num_nt
        want = np.zeros((m, m, m))
        for x in range(m):
            for r in g.binary_rules:
                want[x, r.left, r.right] += t.e_lc[x, r.lhs] * r.weight
        assert rel_close(t.e_lc_pair, want, 1e-12)
        rule_pairs = {(r.left, r.right) for r in g.binary_rules}
        assert {yz for _, yz in t.e_lc_rule} == rule_pairs

    def test_viterbi_and_boolean(self, mixed):
        v = left_corner_expectations(mixed, semiring=VITERBI).e_lc.entries
        assert np.array_equal(v, [[1.0, 0.1], [0.0, 1.0]])
        b = left_corner_expectations(mixed, semiring=BOOLEAN).e_lc.entries
        assert np.array_equal(b, [[True, True], [False, True]])

    def test_log_matches_prob(self, mixed):
        a = left_corner_expectations(mixed, semiring=LOG)
        b = left_corner_expectations(mixed, semiring=PROB)
        assert rel_close(np.exp(a.e_lc.entries), b.e_lc.entries, 1e-12)
        assert rel_close(np.exp(a.e_lc_pair), b.e_lc_pair, 1e-12)


class TestDivergence:
    @pytest.mark.parametrize("method", ["inversion", "lehmann"])
    def test_divergent_fixture(self, method):
        with pytest.raises(ClosureError):
            left_corner_expectations(parse_grammar(DIVERGENT_TEXT), method)

    def test_log_divergent(self):
        with pytest.raises(NonConvergent):
            left_corner_expectations(parse_grammar(DIVERGENT_TEXT), semiring=LOG)

    def test_non_tight_still_has_finite_closure(self):
        t = left_corner_expectations(parse_grammar(NON_TIGHT_TEXT))
        assert t.e_lc[0, 0] == pytest.approx(10.0)
