"""Command-line interface: ``prefixprob {check,score,oracle,bench}``.

Exit codes: 0 success, 1 validation/scoring failure, 2 unreadable input
(missing file, grammar syntax error, bad arguments).
"""

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bench as bench_mod
from .errors import ClosureError, GrammarError, UnknownToken
from .grammar import load_grammar, validate
from .inside import cky
from .leftcorner import left_corner_expectations
from .oracle import choose_max_len, prefix_oracle, random_dense_grammar
from .prefix import ALGORITHMS, fast_jl, prefix_tables
from .semiring import PROB, get_semiring

ALGO_CHOICES = ("cky", "jl", "fastjl", "semiring-fastjl")
PROB_ONLY = ("jl", "fastjl")
SCORE_HEADER = ("sentence_id", "k", "token", "prefix_value", "conditional_value", "status")
ORACLE_HEADER = ("sentence_id", "k", "token", "oracle_lower", "oracle_upper", "fastjl_value", "bracketed")


@dataclass
class RunConfig:
    command: str
    grammar_path: Optional[str] = None
    input_path: Optional[str] = None
    algo: str = "fastjl"
    semiring: str = "prob"
    output_format: str = "csv"
    precision: int = 12
    jobs: int = 1
    seed: Optional[int] = None
    max_len: Optional[int] = None
    left_corner: bool = False

    def __post_init__(self):
        if self.algo in PROB_ONLY and self.semiring != "prob":
            raise ValueError(f"--algo {self.algo} requires --semiring prob")
        if self.precision < 1:
            raise ValueError("--precision must be positive")
        if self.jobs < 1:
            raise ValueError("--jobs must be positive")


class _Exit(Exception):
    def __init__(self, code, message):
        self.code = code
        self.message = message


def _load(cfg):
    if cfg.grammar_path is None:
        raise _Exit(2, "--grammar is required")
    try:
        return load_grammar(cfg.grammar_path)
    except OSError as exc:
        raise _Exit(2, f"cannot read grammar: {exc}") from None
    except GrammarError as exc:
        raise _Exit(2, f"{cfg.grammar_path}: {exc}") from None


def _sentences(cfg):
    if cfg.input_path is None:
        lines = sys.stdin.read().splitlines()
    else:
        try:
            with open(cfg.input_path, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise _Exit(2, f"cannot read input: {exc}") from None
    return [line.split() for line in lines if line.strip()]


def _fmt(v, precision):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), f".{precision}g")


class _Table:
    """Row sink for csv, tsv, or column-aligned human output."""

    def __init__(self, fmt, header, out):
        self.fmt = fmt
        self.header = header
        self.rows = []
        self.out = out

    def add(self, row):
        self.rows.append([str(c) for c in row])

    def flush(self):
        if self.fmt == "human":
            cols = [self.header] + self.rows
            widths = [max(len(r[i]) for r in cols) for i in range(len(self.header))]
            for r in cols:
                self.out.write("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() + "\n")
            return
        writer = csv.writer(self.out, delimiter="\t" if self.fmt == "tsv" else ",", lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)


def cmd_check(cfg, out=sys.stdout, err=sys.stderr):
    g = _load(cfg)
    report = validate(g)
    out.write(f"grammar: {cfg.grammar_path}\n")
    out.write(f"nonterminals: {g.num_nt}  terminals: {len(g.alphabet)}  rules: {len(g.rules)}  start: {report.start}\n")
    for line in report.lines():
        out.write(line + "\n")
    status = 0 if report.ok else 1
    if cfg.left_corner:
        sr = get_semiring(cfg.semiring)
        try:
            tables = left_corner_expectations(g, semiring=sr, with_pairs=False)
        except ClosureError as exc:
            out.write(f"left-corner closure: FAIL ({exc})\n")
            return 1
        out.write(f"left-corner expectations E_lc(column | row), {sr.name} semiring, {tables.method}:\n")
        table = _Table("human", ("",) + g.nonterminals, out)
        for x, row in zip(g.nonterminals, tables.e_lc.entries):
            table.add([x] + [_fmt(v, cfg.precision) for v in row])
        table.flush()
    return status


def _score_sentence(tokens, g, cfg, tables):
    sr = get_semiring(cfg.semiring)
    try:
        if cfg.algo == "cky":
            chart = cky(tokens, g, sr)
            values = [chart[1, k, g.start] for k in range(1, len(tokens) + 1)]
            cond = None
        else:
            fn = ALGORITHMS[cfg.algo]
            res = fn(tokens, g, sr, tables) if cfg.algo == "semiring-fastjl" else fn(tokens, g, tables)
            values, cond = res.per_prefix, res.per_token_conditional
    except UnknownToken as exc:
        return None, str(exc)
    rows = []
    for k, (tok, v) in enumerate(zip(tokens, values), start=1):
        c = "" if cond is None else _fmt(cond[k - 1], cfg.precision)
        rows.append((k, tok, _fmt(v, cfg.precision), c, "OK"))
    return rows, None


def cmd_score(cfg, out=sys.stdout, err=sys.stderr):
    g = _load(cfg)
    report = validate(g)
    if not report.ok:
        for line in report.lines():
            err.write(line + "\n")
        return 1
    sr = get_semiring(cfg.semiring)
    tables = None
    if cfg.algo != "cky":
        try:
            tables = prefix_tables(g, cfg.algo, sr)
        except ClosureError as exc:
            err.write(f"left-corner closure failed: {exc}\n")
            return 1
    sentences = _sentences(cfg)

    def work(tokens):
        return _score_sentence(tokens, g, cfg, tables)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(work, sentences))
    else:
        results = [work(s) for s in sentences]

    table = _Table(cfg.output_format, SCORE_HEADER, out)
    any_ok = not sentences
    for sid, (rows, error) in enumerate(results, start=1):
        if error is not None:
            table.add((sid, "", "", "", "", f"ERROR: {error}"))
            continue
        any_ok = True
        for row in rows:
            table.add((sid, *row))
    table.flush()
    return 0 if any_ok else 1


def cmd_oracle(cfg, out=sys.stdout, err=sys.stderr, tail_target=1e-6):
    if cfg.grammar_path is None and cfg.seed is not None:
        g = random_dense_grammar(2, 2, cfg.seed, lexical_mass=0.9)
        err.write(f"# random grammar (seed {cfg.seed}):\n")
        err.write("".join(f"#   {line}\n" for line in str(g).splitlines()))
    else:
        g = _load(cfg)
    report = validate(g)
    if not report.ok:
        for line in report.lines():
            err.write(line + "\n")
        return 1
    if not report.tight:
        err.write("warning: grammar is not tight; the oracle bracket is not guaranteed\n")
    sentences = _sentences(cfg)
    max_len = cfg.max_len
    if max_len is None:
        longest = max((len(s) for s in sentences), default=1)
        max_len = choose_max_len(g, tail_target, min_len=longest)
    tables = prefix_tables(g, "fastjl")
    table = _Table(cfg.output_format, ORACLE_HEADER, out)
    all_ok = True
    for sid, tokens in enumerate(sentences, start=1):
        try:
            res = fast_jl(tokens, g, tables)
        except UnknownToken as exc:
            table.add((sid, "", "", "", "", "", f"ERROR: {exc}"))
            continue
        for k in range(1, len(tokens) + 1):
            lower, tail = prefix_oracle(g, tokens[:k], max_len)
            v = res.per_prefix[k - 1]
            inside = lower - 1e-12 <= v <= lower + tail + 1e-12
            all_ok &= inside
            table.add((sid, k, tokens[k - 1], _fmt(lower, cfg.precision), _fmt(lower + tail, cfg.precision),
                       _fmt(v, cfg.precision), "yes" if inside else "NO"))
    table.flush()
    err.write(f"# max_len={max_len}\n")
    return 0 if all_ok else 1


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_bench(cfg, args, out=sys.stdout, err=sys.stderr):
    algos = [a for a in args.algos.split(",") if a]
    seeds = _ints(args.seeds) if args.seeds else [cfg.seed or 0]
    records = bench_mod.run_grid(_ints(args.nt), _ints(args.lens), seeds, algos, repeats=args.repeats)
    bench_mod.write_csv(records, out, delimiter="\t" if cfg.output_format == "tsv" else ",")
    if args.fit:
        for algo, slope in sorted(bench_mod.fit_exponents(records, args.fit).items()):
            err.write(f"# {algo}: log-log slope along {args.fit} = {slope:.3f}\n")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grammar", metavar="PATH")
    common.add_argument("--input", metavar="PATH", help="sentences, one per line (default: stdin)")
    common.add_argument("--semiring", choices=("prob", "log", "viterbi", "boolean"), default="prob")
    common.add_argument("--output", choices=("csv", "tsv", "human"), default="csv")
    common.add_argument("--precision", type=int, default=12, metavar="N")
    common.add_argument("--seed", type=int, metavar="N")

    parser = argparse.ArgumentParser(prog="prefixprob", description="Inside and prefix probabilities under CNF PCFGs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate a grammar")
    p.add_argument("--left-corner", action="store_true", help="also print the left-corner expectation matrix")

    p = sub.add_parser("score", parents=[common], help="prefix probabilities of every prefix of each sentence")
    p.add_argument("--algo", choices=ALGO_CHOICES, default="fastjl")
    p.add_argument("--jobs", type=int, default=1, metavar="K")

    p = sub.add_parser("oracle", parents=[common], help="bracket fastjl values by truncated enumeration")
    p.add_argument("--max-len", type=int, metavar="N", help="longest string summed (default: tail bound < 1e-6)")

    p = sub.add_parser("bench", parents=[common], help="time the algorithms on random dense grammars (CSV)")
    p.add_argument("--nt", default="8,16,32", help="comma-separated nonterminal counts")
    p.add_argument("--lens", default="20", help="comma-separated sentence lengths")
    p.add_argument("--seeds", default=None, help="comma-separated seeds (default: --seed or 0)")
    p.add_argument("--algos", default=",".join(bench_mod.ALGOS))
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--fit", choices=("nt", "len"), help="print log-log slopes along this axis to stderr")
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            grammar_path=args.grammar,
            input_path=args.input,
            algo=getattr(args, "algo", "fastjl"),
            semiring=args.semiring,
            output_format=args.output,
            precision=args.precision,
            jobs=getattr(args, "jobs", 1),
            seed=args.seed,
            max_len=getattr(args, "max_len", None),
            left_corner=getattr(args, "left_corner", False),
        )
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if cfg.command == "check":
            return cmd_check(cfg, out, err)
        if cfg.command == "score":
            return cmd_score(cfg, out, err)
        if cfg.command == "oracle":
            return cmd_oracle(cfg, out, err)
        return cmd_bench(cfg, args, out, err)
    except _Exit as exc:
        err.write(f"prefixprob: {exc.message}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
