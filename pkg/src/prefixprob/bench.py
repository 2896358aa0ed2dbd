"""Timing harness for the inside and prefix algorithms on dense grammars.

Each grid point yields two records per algorithm: ``precompute`` (dense
weight tensors plus whatever left-corner tables the algorithm needs) and
``per_sentence`` (chart allocation and filling).  Times are the median of
``repeats`` runs.
"""

import csv
import gc
import statistics
import time
from collections import defaultdict
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import InsufficientData
from .grammar import Grammar
from .inside import cky, cky_factored
from .leftcorner import left_corner_expectations
from .oracle import random_dense_grammar
from .prefix import fast_jl, fast_semiring_jl, jl
from .semiring import PROB

ALGOS = ("cky", "cky_factored", "jl", "fast_jl", "fast_semiring_jl")
PREFIX_ALGOS = ("jl", "fast_jl", "fast_semiring_jl")
PHASES = ("precompute", "per_sentence")
CSV_HEADER = ("algo", "num_nt", "sentence_len", "seed", "phase", "wall_time_ns", "repeats")


@dataclass(frozen=True)
class BenchRecord:
    algo: str
    num_nt: int
    sentence_len: int
    seed: int
    phase: str
    wall_time_ns: int
    repeats: int

    def row(self):
        return astuple(self)


class BenchMismatch(AssertionError):
    """Two algorithms disagreed on the same grid point."""


def _fresh(g):
    # drops the cached tensors so precompute is timed from scratch
    return Grammar(g.nonterminals, g.alphabet, g.start, g.rules)


def _precompute(algo, g):
    g.tensors(PROB)
    if algo == "jl":
        return left_corner_expectations(g, "inversion", PROB, with_pairs=True)
    if algo == "fast_jl":
        return left_corner_expectations(g, "inversion", PROB, with_pairs=False)
    if algo == "fast_semiring_jl":
        return left_corner_expectations(g, "lehmann", PROB, with_pairs=False)
    return None


def _run(algo, w, g, tables):
    if algo == "cky":
        return cky(w, g)
    if algo == "cky_factored":
        return cky_factored(w, g)[0]
    if algo == "jl":
        return jl(w, g, tables)
    if algo == "fast_jl":
        return fast_jl(w, g, tables)
    return fast_semiring_jl(w, g, PROB, tables)


def _median_ns(fn, repeats):
    times = []
    gc.collect()
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            fn()
            times.append(time.perf_counter_ns() - t0)
    finally:
        if enabled:
            gc.enable()
    return int(statistics.median(times))


def _check(outputs, rtol):
    groups = {
        "inside": [(a, o if a in ("cky", "cky_factored") else o.inside) for a, o in outputs.items()],
        "prefix": [(a, o.chart) for a, o in outputs.items() if a in PREFIX_ALGOS],
    }
    for what, charts in groups.items():
        for (a, x), (b, y) in zip(charts, charts[1:]):
            if not np.allclose(x.values, y.values, rtol=rtol, atol=0.0):
                raise BenchMismatch(f"{a} and {b} disagree on the {what} chart")


def run_grid(nt_values, len_values, seeds, algos=ALGOS, repeats=5, num_terminals=4, lexical_mass=0.6, check=True, rtol=1e-9):
    """Time every algorithm on every (|N|, N, seed) combination.

    The grammar for ``(|N|, seed)`` is ``random_dense_grammar`` and the
    sentence is drawn uniformly over its alphabet.  With ``check`` the
    outputs of all algorithms are compared at each grid point.
    """
    algos = list(algos)
    unknown = set(algos) - set(ALGOS)
    if unknown:
        raise ValueError(f"unknown algorithms {sorted(unknown)}")
    if repeats < 5:
        raise ValueError("repeats must be at least 5")
    records = []
    if not algos:
        return records
    for num_nt in nt_values:
        for seed in seeds:
            g = random_dense_grammar(num_nt, num_terminals, seed, lexical_mass)
            rng = np.random.default_rng(seed)
            for n in len_values:
                w = [g.alphabet[a] for a in rng.integers(0, num_terminals, n)]
                outputs = {}
                for algo in algos:
                    pre = _median_ns(lambda: _precompute(algo, _fresh(g)), repeats)
                    tables = _precompute(algo, g)
                    outputs[algo] = _run(algo, w, g, tables)
                    per = _median_ns(lambda: _run(algo, w, g, tables), repeats)
                    for phase, ns in zip(PHASES, (pre, per)):
                        records.append(BenchRecord(algo, num_nt, n, seed, phase, ns, repeats))
                if check:
                    _check(outputs, rtol)
    return records


def write_csv(records, fh, delimiter=","):
    out = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for r in records:
        out.writerow(r.row())


def read_csv(fh):
    types = {f.name: f.type for f in fields(BenchRecord)}
    return [BenchRecord(**{k: types[k](v) for k, v in row.items()}) for row in csv.DictReader(fh)]


def fit_exponents(records, axis, phase="per_sentence"):
    """Least-squares slope of log(time) against log(axis value), per algorithm.

    ``axis`` is ``"nt"`` or ``"len"``; the other axis must be held fixed.
    With several seeds per axis value the fit runs through the per-value
    median, so one slow seed cannot tilt the line.
    """
    if axis not in ("nt", "len"):
        raise ValueError("axis must be 'nt' or 'len'")
    key, other = ("num_nt", "sentence_len") if axis == "nt" else ("sentence_len", "num_nt")
    by_algo = defaultdict(list)
    for r in records:
        if r.phase == phase:
            by_algo[r.algo].append(r)
    slopes = {}
    for algo, recs in by_algo.items():
        if len({getattr(r, other) for r in recs}) > 1:
            raise ValueError(f"{algo}: {other} varies; fix it to fit along {key}")
        groups = defaultdict(list)
        for r in recs:
            groups[getattr(r, key)].append(r.wall_time_ns)
        if len(groups) < 4:
            raise InsufficientData(f"{algo}: need at least 4 distinct {key} values, got {len(groups)}")
        xs = np.array(sorted(groups), dtype=float)
        ts = np.array([statistics.median(groups[x]) for x in sorted(groups)], dtype=float)
        slopes[algo] = float(np.polyfit(np.log(xs), np.log(ts), 1)[0])
    return slopes


def median_times(records, algo, axis, phase="per_sentence"):
    """``{axis value: median wall time}`` for one algorithm, over seeds."""
    key = "num_nt" if axis == "nt" else "sentence_len"
    groups = defaultdict(list)
    for r in records:
        if r.algo == algo and r.phase == phase:
            groups[getattr(r, key)].append(r.wall_time_ns)
    return {x: statistics.median(ts) for x, ts in sorted(groups.items())}


def speedup(records, slow, fast, axis, phase="per_sentence"):
    """``{axis value: median(slow) / median(fast)}``."""
    a = median_times(records, slow, axis, phase)
    b = median_times(records, fast, axis, phase)
    return {x: a[x] / b[x] for x in a if x in b}
