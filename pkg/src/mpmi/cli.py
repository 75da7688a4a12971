"""Command-line entry point: ``mpmi <command> ...``.

Exit codes: 0 success, 2 parse error, 3 non-tree primal graph, 4 unbounded
variable, 5 undefined distribution (MI = 0), 6 unsupported weight, 1 other.
"""
from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .engine import (
    marginal,
    mi,
    moment,
    query_bivariate,
    query_univariate,
    run,
    run_rooted,
)
from .errors import MPMIError, NonConformingQuery, NonTreeError, UndefinedDistribution
from .formula import evaluate, formula_vars, to_cnf
from .parser import format_formula, format_problem, parse_document, parse_formula, parse_problem
from .problem import GraphStats, establish_support, graph_stats, primal_graph, problem_to_json, root_at
from .rational import Q, decimal, fmt
from .wmi import WMIProblem, reduce_wmi


@dataclass
class RunReport:
    path: str
    stats: GraphStats | None = None
    mi: str = ""
    times: dict = field(default_factory=dict)
    queries: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"problem": self.path, "stats": self.stats.to_json() if self.stats else None,
                "mi": self.mi, "times": self.times, "queries": self.queries}


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load(path: str):
    t0 = time.perf_counter()
    p = establish_support(parse_problem(_read(path)))
    return p, time.perf_counter() - t0


def _solve(p, root: str):
    g = primal_graph(p)
    if root in ("auto", None):
        return run(p)
    return run(p, root_at(g, p.index(root)))


def cmd_solve(args) -> int:
    p, t_parse = _load(args.file)
    t0 = time.perf_counter()
    table = _solve(p, args.root)
    value = mi(table)
    t_run = time.perf_counter() - t0
    report = RunReport(args.file, graph_stats(p, table.tree), fmt(value),
                       {"parse": t_parse, "passes": t_run})
    payload = report.to_json()
    if args.table:
        payload["table"] = table.to_json()
    _emit(args, payload, f"MI = {fmt(value)} ≈ {decimal(value)}")
    return 0


def _classify(table, phi):
    vs = sorted(formula_vars(phi))
    if not vs:
        return "const", vs
    if len(vs) == 1:
        return "uni", vs
    if len(vs) == 2 and (vs[0], vs[1]) in table.messages:
        return "bi", vs
    return "nonconforming", vs


def answer_query(table, p, phi):
    """(probability, classification) for one query against a finished table."""
    kind, vs = _classify(table, phi)
    if kind == "const":
        return Q(1 if evaluate(phi, {}) else 0), kind
    if kind == "uni":
        return query_univariate(table, p, vs[0], phi), kind
    if kind == "bi":
        return query_bivariate(table, p, vs[0], vs[1], phi), kind
    return fresh_query(p, phi) / table.mi_value, kind


def fresh_query(p, phi):
    """MI(p and phi) from scratch; structure-blind integration if phi breaks the tree."""
    from .verification.nested import MAX_VARS, oracle_nested_mi

    constrained = p.with_clauses(to_cnf(phi))
    try:
        return run_rooted(constrained)
    except NonTreeError:
        if p.n > MAX_VARS:
            raise NonConformingQuery(
                f"query closes a cycle and the problem has more than {MAX_VARS} variables")
        return oracle_nested_mi(establish_support(constrained))


def _query_lines(text: str) -> list:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith(";")]


def cmd_query(args) -> int:
    p, t_parse = _load(args.file)
    t0 = time.perf_counter()
    table = _solve(p, "auto")
    value = mi(table)
    t_run = time.perf_counter() - t0
    if value == 0:
        raise UndefinedDistribution()
    results = []
    t0 = time.perf_counter()
    for line in _query_lines(_read(args.queries)):
        phi = parse_formula(line, p.variables)
        prob, kind = answer_query(table, p, phi)
        if kind == "nonconforming":
            print(f"warning: nonconforming query answered by a fresh run: {line}", file=sys.stderr)
        results.append({"query": line, "kind": kind, "probability": fmt(prob),
                        "decimal": decimal(prob)})
    t_q = time.perf_counter() - t0
    report = RunReport(args.file, graph_stats(p, table.tree), fmt(value),
                       {"parse": t_parse, "passes": t_run, "queries": t_q}, results)
    lines = [f"MI = {fmt(value)} ≈ {decimal(value)}"]
    lines += [f"{r['kind']:>13}  {r['probability']}  ≈ {r['decimal']}  {r['query']}" for r in results]
    _emit(args, report.to_json(), "\n".join(lines))
    return 0


def cmd_marginal(args) -> int:
    p, _ = _load(args.file)
    table = run(p)
    dens = marginal(table, p, p.index(args.var))
    data = dens.to_json()
    _emit(args, {"variable": args.var, "marginal": data}, json.dumps(data))
    return 0


def cmd_moment(args) -> int:
    p, _ = _load(args.file)
    table = run(p)
    value = moment(table, p, p.index(args.var), args.k)
    _emit(args, {"variable": args.var, "k": args.k, "moment": fmt(value)},
          f"E[{args.var}^{args.k}] = {fmt(value)} ≈ {decimal(value)}")
    return 0


def reduce_text(text: str) -> str:
    """Reduce a WMI document to an MI problem file; plain MI files pass through unchanged."""
    doc = parse_document(text)
    if doc.is_plain:
        return text
    origin: dict = {}
    p = reduce_wmi(WMIProblem.from_document(doc), origin)
    header = "\n".join(f"{k}: {v}" for k, v in origin.items())
    return format_problem(p, header="variable origins\n" + header if header else "")


def cmd_reduce(args) -> int:
    out = reduce_text(_read(args.file))
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    if args.json:
        print(json.dumps({"problem": problem_to_json(parse_problem(out))}, indent=2))
    elif not args.output:
        sys.stdout.write(out)
    return 0


def _parse_S(text: str) -> tuple:
    return tuple(int(s) for s in text.split(",") if s.strip())


def cmd_gen(args) -> int:
    from .verification import generators as gen
    from .verification.montecarlo import oracle_monte_carlo
    from .verification.nested import MAX_VARS, oracle_nested_mi

    truth: dict = {"shape": args.shape}
    query_text = None
    if args.shape in gen.GENERATORS:
        if args.seed is None or args.n is None:
            raise SystemExit("gen: --n and --seed are required for random shapes")
        p = gen.GENERATORS[args.shape](args.n, args.seed)
        truth.update(n=args.n, seed=args.seed)
        if p.n <= MAX_VARS:
            truth["mi"] = fmt(oracle_nested_mi(p))
        else:
            est = oracle_monte_carlo(p, args.samples, args.seed)
            truth.update(mi_estimate=est.estimate, mi_std_error=est.std_error, samples=est.samples)
    elif args.shape in ("subset-chain", "subset-tree"):
        if args.S is None or args.L is None:
            raise SystemExit("gen: --S and --L are required for subset shapes")
        inst = gen.SubsetInstance(_parse_S(args.S), args.L)
        if args.shape == "subset-chain":
            p, q = gen.gen_subset_chain(inst)
            truth["mi"] = fmt(gen.chain_mi(inst))
            truth["query_mi"] = fmt(gen.subset_count(inst) * gen.chain_mi(inst) / 2 ** inst.n)
        else:
            p, q = gen.gen_subset_tree(inst)
            truth["mi"] = fmt(gen.tree_mi(inst))
            truth["query_mi"] = fmt(gen.subset_count(inst) * gen.tree_mi(inst) / 2 ** inst.n)
        truth.update(S=list(inst.S), L=inst.L, subset_count=gen.subset_count(inst))
        query_text = format_formula(q, p.variables)
        truth["query"] = query_text
    else:
        raise SystemExit(f"gen: unknown shape {args.shape}")
    text = format_problem(p)
    if args.output:
        out = Path(args.output)
        out.write_text(text, encoding="utf-8")
        gen.write_sidecar(str(out) + ".json", truth)
        if query_text:
            Path(str(out) + ".queries").write_text(query_text + "\n", encoding="utf-8")
        _emit(args, truth, f"wrote {out}")
    else:
        if args.json:
            print(json.dumps({"problem": text, "truth": truth}, indent=2))
        else:
            sys.stdout.write(text)
            for k, v in truth.items():
                print(f"; {k} = {v}")
    return 0


def cmd_oracle(args) -> int:
    from .verification.montecarlo import oracle_monte_carlo
    from .verification.nested import oracle_nested_mi

    text = _read(args.file)
    p = establish_support(parse_problem_any(text))
    if args.mode == "nested":
        value = oracle_nested_mi(p)
        _emit(args, {"mode": "nested", "mi": fmt(value)}, f"MI = {fmt(value)} ≈ {decimal(value)}")
    else:
        if args.seed is None:
            raise SystemExit("oracle: --seed is required for Monte-Carlo mode")
        est = oracle_monte_carlo(p, args.samples, args.seed, region=args.region)
        _emit(args, {"mode": "mc", **est.to_json()},
              f"MI ≈ {est.estimate:.12g} ± {est.std_error:.3g} ({est.samples} samples, seed {est.seed})")
    return 0


def parse_problem_any(text: str):
    """Parse a problem, allowing clauses over three or more variables (oracle input only)."""
    from .formula import Clause
    from .problem import Problem

    doc = parse_document(text)
    if not doc.is_plain:
        return reduce_wmi(WMIProblem.from_document(doc))
    return Problem(tuple(doc.real_vars), tuple(Clause(c) for c in doc.clauses))


def benchmark(p, queries) -> list:
    """Cumulative seconds for table answers vs per-query from-scratch rooted runs.

    ``queries`` is a list of formulas.  Returns rows
    (index, kind, table_cumulative, baseline_cumulative); row 0 is the
    message-passing phase charged to the table side.
    """
    t0 = time.perf_counter()
    table = run(p)
    base = mi(table)
    table_time = time.perf_counter() - t0
    baseline_time = 0.0
    rows = [(0, "passes", table_time, baseline_time)]
    for k, phi in enumerate(queries, start=1):
        t0 = time.perf_counter()
        a, kind = answer_query(table, p, phi)
        table_time += time.perf_counter() - t0
        t0 = time.perf_counter()
        b = fresh_query(p, phi) / base
        baseline_time += time.perf_counter() - t0
        if a != b:
            raise MPMIError(f"query {k} disagrees: table {a} vs scratch {b}")
        rows.append((k, kind, table_time, baseline_time))
    return rows


def cmd_bench(args) -> int:
    from .verification import generators as gen

    if args.seed is None:
        raise SystemExit("bench: --seed is required")
    rng = random.Random(args.seed)
    if args.file:
        p = establish_support(parse_problem(_read(args.file)))
    else:
        p = establish_support(gen.GENERATORS[args.shape](args.n, args.seed))
    if args.queries_file:
        queries = [parse_formula(ln, p.variables) for ln in _query_lines(_read(args.queries_file))]
    else:
        queries = []
        for _ in range(args.queries):
            if args.kind == "bi" or (args.kind == "mixed" and rng.random() < 0.5):
                queries.append(gen.random_bivariate_query(p, rng)[2])
            else:
                queries.append(gen.random_univariate_query(p, rng)[1])
    rows = benchmark(p, queries)
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["query", "kind", "table_cumulative_s", "baseline_cumulative_s"])
    for k, kind, a, b in rows:
        writer.writerow([k, kind, f"{a:.6f}", f"{b:.6f}"])
    if args.output:
        out.close()
    total_t, total_b = rows[-1][2], rows[-1][3]
    speed = (total_b / total_t) if total_t else float("inf")
    print(f"speedup {speed:.1f}x over {len(queries)} queries", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpmi", description="Exact model integration on tree-shaped formulas")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("solve", cmd_solve, "compute MI")
    sp.add_argument("file")
    sp.add_argument("--root", default="auto")
    sp.add_argument("--table", action="store_true", help="include messages and beliefs in --json output")

    sp = add("query", cmd_query, "answer queries from one message-passing run")
    sp.add_argument("file")
    sp.add_argument("queries")

    sp = add("marginal", cmd_marginal, "normalized marginal density of a variable")
    sp.add_argument("file")
    sp.add_argument("var")

    sp = add("moment", cmd_moment, "k-th moment of a variable")
    sp.add_argument("file")
    sp.add_argument("var")
    sp.add_argument("k", type=int)

    sp = add("reduce", cmd_reduce, "reduce a WMI file to an MI file")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("gen", cmd_gen, "generate a problem and its ground truth")
    sp.add_argument("--shape", required=True,
                    choices=["path", "star", "snow", "subset-chain", "subset-tree"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--S")
    sp.add_argument("--L", type=int)
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("-o", "--output")

    sp = add("oracle", cmd_oracle, "independent MI oracles")
    sp.add_argument("file")
    sp.add_argument("--mode", choices=["nested", "mc"], default="nested")
    sp.add_argument("--samples", type=int, default=1000000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--region", choices=["union", "box"], default="union")

    sp = add("bench", cmd_bench, "amortization benchmark (CSV)")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--shape", choices=["path", "star", "snow"], default="path")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--queries", type=int, default=100)
    sp.add_argument("--queries-file")
    sp.add_argument("--kind", choices=["uni", "bi", "mixed"], default="uni")
    sp.add_argument("--seed", type=int)
    sp.add_argument("-o", "--output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except MPMIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
