"""Command line front end.

``kavymc check FILE`` prints an HWMCC-style verdict line (``0`` safe, ``1``
unsafe followed by the stimulus, ``2`` unknown).  ``bench`` writes benchmark
families to disk and ``experiment`` runs engines over a family into CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable

from .aiger import AigerError, TransitionSystem, read_aiger, to_aag
from .bench import OracleBoundExceeded, bfs_reachable, gen_counter, gen_random_aig, gen_shift
from .certify import check_invariant, check_k_induction, check_witness, format_invariant
from .engines import bmc, kind
from .kavy import kavy_engine
from .pdr import pdr_engine
from .result import CheckResult, Verdict
from .sat import BudgetExceeded

__all__ = ["ENGINES", "FAMILIES", "run_engine", "experiment_rows", "main"]

ENGINES = ("kavy", "vanilla", "pdr", "kind", "bmc")
STATS_SCHEMA = "# kavymc-stats schema=1"
EXPERIMENT_SCHEMA = "# kavymc-experiment schema=1"


def run_engine(
    name: str,
    ts: TransitionSystem,
    max_frames: int = 50,
    sel: str = "topdown",
    gen: bool = True,
    seed: int = 0,
    conflict_budget: int | None = None,
    time_limit: float | None = None,
    **kw,
) -> CheckResult:
    """Run one engine; an exhausted budget turns into UNKNOWN."""
    t0 = time.perf_counter()
    try:
        if name in ("kavy", "vanilla"):
            return kavy_engine(ts, max_frames, sel_strategy=sel, gen=gen, seed=seed,
                               conflict_budget=conflict_budget, vanilla=name == "vanilla",
                               time_limit=time_limit, **kw)
        if name == "pdr":
            return pdr_engine(ts, max_frames, gen=gen, seed=seed, conflict_budget=conflict_budget,
                              time_limit=time_limit)
        if name == "kind":
            return kind(ts, max_frames, seed=seed, conflict_budget=conflict_budget, time_limit=time_limit)
        if name == "bmc":
            return bmc(ts, max_frames, seed=seed, conflict_budget=conflict_budget, time_limit=time_limit)
    except BudgetExceeded:
        return CheckResult(Verdict.UNKNOWN, name, seconds=time.perf_counter() - t0, extra={"timeout": True})
    raise ValueError(f"unknown engine {name!r}")


def _sel_column(res: CheckResult) -> str:
    if res.engine == "kind" and res.safe:
        return f"k={res.depth}"
    sels = res.extra.get("sels")
    if sels:
        return " ".join(f"({s.i},{s.k})" for s in sels)
    return ""


def write_stats(res: CheckResult, fh) -> None:
    fh.write(STATS_SCHEMA + "\n")
    w = csv.DictWriter(fh, ["iteration", "frames", "sel", "queries", "clauses", "time"], lineterminator="\n")
    w.writeheader()
    for n, row in enumerate(res.rows, 1):
        w.writerow({"iteration": n, **row})


# families: name -> parameter -> system
FAMILIES: dict[str, Callable[[int], TransitionSystem]] = {
    "shift": gen_shift,
    # 8-bit counter shape scaled by width: reset at 2^(w-2), property c < reset + 2
    "counter": lambda w: gen_counter(w, 1 << (w - 2), (1 << (w - 2)) + 2),
    "random": lambda seed: gen_random_aig(seed, latches=1 + seed % 8, gates=seed % 41),
}


def parse_range(text: str) -> list[int]:
    """``"3"``, ``"1..12"`` or ``"1,4,9"``."""
    out: list[int] = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out += range(int(lo), int(hi) + 1)
        elif part.strip():
            out.append(int(part))
    return out


def _experiment_row(job: tuple) -> list[dict]:
    family, param, engines, opts = job
    ts = FAMILIES[family](param)
    try:
        oracle = bfs_reachable(ts)
        ref = Verdict.SAFE if oracle.safe else Verdict.UNSAFE
    except OracleBoundExceeded:
        oracle, ref = None, None
    rows = []
    for eng in engines:
        res = run_engine(eng, ts, **opts)
        agree = ""
        if ref is not None and res.verdict is not Verdict.UNKNOWN:
            agree = "yes" if res.verdict is ref else "NO"
        note = "timeout" if res.extra.get("timeout") else ""
        if eng == "bmc" and res.unsafe and oracle is not None and res.depth != oracle.cex_length:
            note = f"cex length {res.depth} != oracle {oracle.cex_length}"
        rows.append({
            "family": family, "param": param, "engine": eng, "verdict": res.verdict.name,
            "frames": res.depth if res.depth is not None else "", "sel_or_k": _sel_column(res),
            "queries": res.queries, "time": f"{res.seconds:.4f}",
            "oracle": ref.name if ref is not None else "n/a", "agree": agree, "note": note,
        })
    return rows


EXPERIMENT_FIELDS = ["family", "param", "engine", "verdict", "frames", "sel_or_k", "queries",
                     "time", "oracle", "agree", "note"]


def experiment_rows(family: str, params, engines, jobs: int = 1, **opts) -> list[dict]:
    if not engines:
        raise ValueError("empty engine list")
    work = [(family, p, tuple(engines), opts) for p in params]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_experiment_row, work))
    else:
        parts = [_experiment_row(j) for j in work]
    return [r for part in parts for r in part]


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)


def cmd_check(args) -> int:
    try:
        ts = read_aiger(args.file, args.property)
    except (OSError, AigerError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    res = run_engine(args.engine, ts, args.max_frames, args.sel, not args.no_indgen, args.seed,
                     args.conflict_budget, args.time_limit)
    if res.unsafe:
        text = res.witness.to_text()
        sys.stdout.write(text)
        if args.witness:
            _write_text(args.witness, text)
    else:
        print(int(res.verdict))
    if args.stats_csv:
        with open(args.stats_csv, "w", newline="") as fh:
            write_stats(res, fh)
    if args.certify is not None:
        if res.safe and res.invariant is not None:
            dest = args.certify or str(args.file) + ".inv"
            _write_text(dest, format_invariant(res.invariant, ts))
            ok, why = check_invariant(res.invariant, ts)
            print(f"certificate {dest}: {'OK' if ok else 'FAILED: ' + why}", file=sys.stderr)
            if not ok:
                return 1
        elif res.unsafe:
            ok, why = check_witness(res.witness, ts)
            print(f"witness: {'OK' if ok else 'FAILED: ' + why}", file=sys.stderr)
            if not ok:
                return 1
        elif res.safe and "k" in res.extra:
            ok, why = check_k_induction(ts, res.extra["k"])
            print(f"k-induction at k={res.extra['k']}: {'OK' if ok else 'FAILED: ' + why}", file=sys.stderr)
            if not ok:
                return 1
    return 2 if res.verdict is Verdict.UNKNOWN else 0


def cmd_bench(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["file", "family", "param", "inputs", "latches", "ands", "oracle", "cex_length"])
        for p in parse_range(args.range):
            ts = FAMILIES[args.family](p)
            name = f"{args.family}_{p}.aag"
            (out / name).write_text(to_aag(ts))
            try:
                r = bfs_reachable(ts)
                verdict, cex = ("SAFE" if r.safe else "UNSAFE"), r.cex_length
            except OracleBoundExceeded:
                verdict, cex = "n/a", None
            w.writerow([name, args.family, p, ts.num_inputs, ts.num_latches, len(ts.ands), verdict,
                        "" if cex is None else cex])
    print(out / "manifest.csv")
    return 0


def cmd_experiment(args) -> int:
    engines = [e for e in args.engines.split(",") if e]
    if not engines:
        print("error: empty engine list", file=sys.stderr)
        return 1
    bad = [e for e in engines if e not in ENGINES]
    if bad:
        print(f"error: unknown engine(s) {', '.join(bad)}", file=sys.stderr)
        return 1
    rows = experiment_rows(args.family, parse_range(args.range), engines, args.jobs,
                           max_frames=args.max_frames, seed=args.seed,
                           conflict_budget=args.conflict_budget, time_limit=args.time_limit)
    buf = io.StringIO()
    buf.write(EXPERIMENT_SCHEMA + "\n")
    w = csv.DictWriter(buf, EXPERIMENT_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        _write_text(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    disagreements = sum(r["agree"] == "NO" for r in rows)
    if disagreements:
        print(f"{disagreements} verdict disagreement(s) with the oracle", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kavymc", description="Safety model checking of AIGER circuits.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def budget_flags(p):
        p.add_argument("--max-frames", type=int, default=50, help="frame / depth bound")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--conflict-budget", type=int, default=None, help="conflicts per SAT query")
        p.add_argument("--time-limit", type=float, default=None, help="seconds, checked between iterations")

    c = sub.add_parser("check", help="check one AIGER file")
    c.add_argument("file")
    c.add_argument("--engine", choices=ENGINES, default="kavy")
    c.add_argument("--sel", choices=("topdown", "bottomup"), default="topdown")
    c.add_argument("--no-indgen", action="store_true", help="learn whole cubes")
    c.add_argument("--property", type=int, default=None, help="index of the bad-state property")
    c.add_argument("--certify", nargs="?", const="", default=None, metavar="PATH",
                   help="check the certificate; write the invariant to PATH (default FILE.inv)")
    c.add_argument("--witness", metavar="PATH", default=None, help="also write the stimulus here")
    c.add_argument("--stats-csv", metavar="PATH", default=None)
    budget_flags(c)
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="write a benchmark family with a manifest")
    b.add_argument("family", choices=sorted(FAMILIES))
    b.add_argument("--range", default="1..8")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("experiment", help="run engines over a family into CSV")
    e.add_argument("family", choices=sorted(FAMILIES))
    e.add_argument("--range", default="1..8")
    e.add_argument("--engines", default="kavy,vanilla,pdr,kind")
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out", default=None)
    budget_flags(e)
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
