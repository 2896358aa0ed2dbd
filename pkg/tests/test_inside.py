import itertools

import numpy as np
import pytest

from prefixprob.errors import UnknownToken
from prefixprob.grammar import parse_grammar
from prefixprob.inside import _chart_zeros, _fold_splits, _left_parts, _pair_zeros, _right_parts, cky, cky_factored
from prefixprob.oracle import enumerate_trees, random_dense_grammar, random_sparse_grammar, tree_sum
from prefixprob.semiring import BOOLEAN, LOG, PROB, VITERBI

from .conftest import rel_close


class TestCkyExamples:
    def test_single_token(self, g1):
        assert cky(["a"], g1)[1, 1, 0] == 0.6

    def test_two_tokens(self, g1):
        assert cky(["a", "a"], g1)[1, 2, 0] == pytest.approx(0.144, rel=1e-15)

    def test_three_tokens(self, g1):
        assert cky(["a", "a", "a"], g1)[1, 3, 0] == pytest.approx(0.06912, abs=1e-12)

    def test_sub_spans(self, g1):
        chart = cky("a a a a".split(), g1)
        # Catalan numbers of binary bracketings: 1, 1, 2, 5
        for length, trees in zip(range(1, 5), (1, 1, 2, 5)):
            want = trees * 0.4 ** (length - 1) * 0.6**length
            for i in range(1, 5 - length + 1):
                assert chart[i, i + length - 1, 0] == pytest.approx(want, rel=1e-14)

    def test_unknown_token(self, g1):
        with pytest.raises(UnknownToken) as exc:
            cky(["a", "b", "a"], g1)
        assert exc.value.position == 2

    def test_empty_sentence(self, g1):
        with pytest.raises(ValueError):
            cky([], g1)

    def test_indices_accepted(self, mixed):
        assert np.array_equal(cky([0, 1, 1], mixed).values, cky(["a", "b", "b"], mixed).values)

    def test_not_derivable(self, anbn):
        assert cky(["b", "a"], anbn)[1, 2, anbn.start] == 0.0
        # a^n b^n has a single tree of weight 0.5^n
        assert cky("a a b b".split(), anbn)[1, 4, anbn.start] == pytest.approx(0.25)


class TestFactored:
    def test_g1_gamma(self, g1):
        beta, gamma = cky_factored(["a", "a"], g1)
        assert np.array_equal(beta.values, cky(["a", "a"], g1).values)
        assert gamma[1, 1, 0, 0] == pytest.approx(0.24, rel=1e-15)
        assert gamma[1, 2, 0, 0] == pytest.approx(0.4 * 0.144, rel=1e-15)

    def test_single_token(self, mixed):
        beta, gamma = cky_factored(["b"], mixed)
        t = mixed.tensors()
        assert np.array_equal(beta.values[0, 0], t.lexical[:, 1])
        assert gamma.values.shape == (1, 1, 2, 2)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_cky_dense(self, seed):
        rng = np.random.default_rng(seed)
        g = random_dense_grammar(int(rng.integers(1, 9)), 3, seed)
        w = list(rng.integers(0, 3, size=int(rng.integers(1, 11))))
        want = cky(w, g).values
        got, gamma = cky_factored(w, g)
        assert rel_close(got.values, want, 1e-12)
        # gamma definition, checked from the cky chart
        t = g.tensors()
        n = len(w)
        for i in range(n):
            for j in range(i, n):
                assert rel_close(gamma.values[i, j], np.einsum("xyz,y->xz", t.binary, want[i, j]), 1e-12)

    @pytest.mark.parametrize("sr", [LOG, VITERBI, BOOLEAN])
    def test_matches_cky_other_semirings(self, sr, mixed):
        w = "a b b a b".split()
        a = cky(w, mixed, sr).values
        b = cky_factored(w, mixed, sr)[0].values
        if sr is BOOLEAN:
            assert np.array_equal(a, b)
        else:
            assert rel_close(np.exp(a) if sr is LOG else a, np.exp(b) if sr is LOG else b, 1e-12)


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(4))
    def test_tree_sum(self, seed):
        g = random_sparse_grammar(1 + seed, 2, seed)
        for n in range(1, 6):
            for w in itertools.product(g.alphabet, repeat=n):
                got = cky(w, g)[1, n, g.start]
                assert rel_close(got, tree_sum(g, g.start, w), 1e-10)

    def test_g1_trees(self, g1):
        trees = enumerate_trees(g1, 0, ["a", "a", "a"])
        assert len(trees) == 2
        assert sum(t.weight for t in trees) == pytest.approx(0.06912, abs=1e-15)

    @pytest.mark.parametrize("seed", range(3))
    def test_boolean_recognizer(self, seed):
        g = random_sparse_grammar(3, 2, seed)
        for w in itertools.product(g.alphabet, repeat=5):
            chart = cky(w, g, BOOLEAN)
            for i in range(1, 6):
                for k in range(i, 6):
                    for x in range(g.num_nt):
                        assert chart[i, k, x] == bool(enumerate_trees(g, x, w[i - 1 : k]))

    @pytest.mark.parametrize("seed", range(3))
    def test_viterbi_is_best_tree(self, seed):
        g = random_sparse_grammar(3, 2, seed)
        for w in itertools.product(g.alphabet, repeat=4):
            best = max((t.weight for t in enumerate_trees(g, g.start, w)), default=0.0)
            assert rel_close(cky(w, g, VITERBI)[1, 4, g.start], best, 1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_viterbi_below_prob_and_range(seed):
    rng = np.random.default_rng(100 + seed)
    g = random_dense_grammar(4, 3, seed)
    w = list(rng.integers(0, 3, size=8))
    p = cky(w, g).values
    v = cky(w, g, VITERBI).values
    assert np.all(v <= p * (1 + 1e-12))
    assert np.all((p >= 0) & (p <= 1))


def test_log_matches_prob(mixed):
    w = "b a b b".split()
    assert rel_close(np.exp(cky(w, mixed, LOG).values), cky(w, mixed, PROB).values, 1e-12)


def test_epsilon_does_not_enter_spans():
    g = parse_grammar("S -> A A : 0.3\nS -> 'a' : 0.5\nS -> : 0.2\nA -> 'a' : 1\n")
    assert cky(["a", "a"], g)[1, 2, 0] == pytest.approx(0.3)
    assert cky(["a"], g)[1, 1, 0] == pytest.approx(0.5)


@pytest.mark.parametrize("n", [2, 3, 7])
def test_split_windows(n):
    chart = np.random.default_rng(n).random((n, n, 3, 2))
    for length in range(2, n + 1):
        left, right = _left_parts(chart, length), _right_parts(chart, length)
        for i in range(n - length + 1):
            for t in range(length - 1):
                assert np.array_equal(left[i, t], chart[i, i + t])
                assert np.array_equal(right[i, t], chart[i + t + 1, i + length - 1])
        assert not left.flags.writeable


@pytest.mark.parametrize("n", [2, 3, 7])
@pytest.mark.parametrize("fast_layout", [True, False])
def test_fold_splits(n, fast_layout):
    rng = np.random.default_rng(n)
    m = 3
    pairs = _pair_zeros(PROB, n, m) if fast_layout else np.zeros((n, n, m, m))
    pairs[...] = rng.random((n, n, m, m))
    chart = _chart_zeros(PROB, n, m) if fast_layout else np.zeros((n, n, m))
    chart[...] = rng.random((n, n, m))
    for length in range(2, n + 1):
        got = _fold_splits(PROB, pairs, chart, length)
        for i in range(n - length + 1):
            k = i + length - 1
            want = sum(pairs[i, j] @ chart[j + 1, k] for j in range(i, k))
            assert np.allclose(got[i], want, rtol=1e-13, atol=0)
