"""Command-line entry point.

Exit codes: 0 ok, 1 usage, 2 matrix parse error, 3 dimension cap exceeded,
4 search budget refused, 5 verification failure, 6 checkpoint error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .constructions import (
    hadamard_power,
    known_matrix,
    lift,
    random_pm_matrix,
    random_unit_matrix,
    tree_beta_formula,
    tree_matrix,
)
from .errors import BudgetExceeded, CheckpointError, DimensionCapExceeded, MatrixFormatError
from .evaluate import DIMENSION_CAP, beta, lp_beta, partition
from .matrix import Matrix, load_matrix, matrix_to_obj, serialize_matrix
from .search import (
    DEFAULT_BUDGET,
    candidate_rows,
    check_structure,
    exhaustive_search,
    structure_iterate,
    subset_norm_max,
)
from .surd import SurdValue
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_DIM = 3
EXIT_BUDGET = 4
EXIT_VERIFY = 5
EXIT_CHECKPOINT = 6

log = logging.getLogger("badsci")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    input: Path | None = None
    output: Path | None = None
    engine: str = "auto"
    threads: int = 1
    precision_cap: int | None = None
    budget: int = DEFAULT_BUDGET
    seed: int | None = None
    format: str = "json"

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("--threads must be >= 1")
        if self.precision_cap is not None and self.precision_cap < 64:
            raise ValueError("--precision-cap must be >= 64")
        if self.engine not in ("auto", "exact", "float"):
            raise ValueError(f"unknown engine {self.engine!r}")

    @classmethod
    def from_args(cls, args) -> RunConfig:
        return cls(
            subcommand=args.command,
            input=getattr(args, "input", None),
            output=getattr(args, "output", None),
            engine=getattr(args, "engine", "auto"),
            threads=getattr(args, "threads", 1),
            precision_cap=args.precision_cap,
            budget=getattr(args, "budget", DEFAULT_BUDGET),
            seed=getattr(args, "seed", None),
            format=args.format,
        )


def _emit(cfg: RunConfig, payload: dict, table: str) -> None:
    text = json.dumps(payload, indent=2) if cfg.format == "json" else table
    if cfg.output is not None and cfg.subcommand != "construct":
        cfg.output.write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _value_text(exact: SurdValue | None, approx: float) -> str:
    return f"{exact.pretty()} ~ {approx:.10f}" if exact is not None else f"{approx:.12f}"


def _load(cfg: RunConfig) -> Matrix:
    if cfg.input is None:
        raise MatrixFormatError("--input is required")
    try:
        return load_matrix(cfg.input)
    except OSError as exc:
        raise MatrixFormatError(str(exc)) from None


def cmd_eval(args, cfg: RunConfig) -> int:
    A = _load(cfg)
    cap = args.cap
    if args.p is not None and not math.isinf(args.p):
        value = lp_beta(A, args.p, cap=cap)
        _emit(cfg, {"p": args.p, "approx": value}, f"l{args.p:g} average = {value:.12f}")
        return EXIT_OK
    if args.partition:
        report = partition(A, threads=cfg.threads, cap=cap)
        payload = report.to_json(with_sets=args.sets)
        lines = [f"beta = {_value_text(report.beta.exact, report.beta.approx)}"]
        for e in report.histogram:
            lines.append(f"  {_value_text(e.value, e.value_approx):>40}  x {e.count}")
        lines.append(f"  |W_i| = {report.sizes()}")
        _emit(cfg, payload, "\n".join(lines))
        return EXIT_OK
    r = beta(A, engine=cfg.engine, threads=cfg.threads, cap=cap)
    _emit(cfg, r.to_json(), f"beta = {_value_text(r.exact, r.approx)}")
    return EXIT_OK


def _construct(args) -> Matrix:
    fam = args.family
    if fam == "tree":
        return tree_matrix(_need(args.n, "--n"))
    if fam == "hadamard-power":
        return hadamard_power(_need(args.k, "--k"))
    if fam == "known":
        return known_matrix(_need(args.name, "--name"), n=args.n)
    if fam == "random-pm":
        return random_pm_matrix(_need(args.n, "--n"), seed=args.seed)
    if fam == "lift":
        A = load_matrix(_need(args.input, "--input"))
        return lift(A, beta(A))
    raise ValueError(f"unknown family {fam!r}")


def _need(value, flag):
    if value is None:
        raise ValueError(f"{flag} is required for this family")
    return value


def cmd_construct(args, cfg: RunConfig) -> int:
    A = _construct(args)
    text = serialize_matrix(A)
    if cfg.output is not None:
        cfg.output.write_text(text + "\n", encoding="utf-8")
    elif not args.check:
        print(text)
    if args.check:
        r = beta(A, engine=cfg.engine, threads=cfg.threads)
        payload = {"matrix": matrix_to_obj(A), **r.to_json()}
        if args.family == "tree":
            payload["formula"] = tree_beta_formula(args.n).to_json()
        lines = [str(A), f"beta = {_value_text(r.exact, r.approx)}"]
        print(json.dumps(payload, indent=2) if cfg.format == "json" else "\n".join(lines))
    return EXIT_OK


def cmd_search(args, cfg: RunConfig) -> int:
    cands = candidate_rows(args.n, antipode_free=args.antipode_free)

    def progress(state):
        log.info("block %d: %d/%d combinations, best %s", state.next_block, state.checked, state.total,
                 state.best_beta)

    state = exhaustive_search(
        args.m,
        args.n,
        cands,
        threads=cfg.threads,
        checkpoint_path=args.checkpoint,
        resume=args.resume,
        budget=cfg.budget,
        force=args.force,
        checkpoint_every=args.checkpoint_every,
        max_blocks=args.max_blocks,
        progress=progress,
    )
    payload = state.to_json()
    payload["candidates"] = cands.counts()
    if args.matrices:
        payload["matrices"] = [matrix_to_obj(cands.matrix(t)) for t in state.best_tuples[: args.matrices]]
    table = "\n".join(
        [
            f"{args.m}x{args.n}: {len(cands)} candidate rows, {state.checked}/{state.total} combinations",
            f"best beta = {_value_text(state.best_beta, float(state.best_beta)) if state.best_beta else 'n/a'}",
            f"maximizers: {state.maximizer_count}" + ("" if state.complete else " (incomplete)"),
            f"elapsed: {state.elapsed:.2f}s",
        ]
    )
    _emit(cfg, payload, table)
    return EXIT_OK


def cmd_improve(args, cfg: RunConfig) -> int:
    starts = []
    if cfg.input is not None:
        starts.append(_load(cfg))
    if args.random is not None:
        m, n = args.random
        base = 0 if cfg.seed is None else cfg.seed
        starts.extend(random_unit_matrix(m, n, seed=base + r) for r in range(args.restarts))
    if not starts:
        raise MatrixFormatError("give --input or --random M N")
    best = None
    runs = []
    for A in starts:
        res = structure_iterate(A, max_iters=args.max_iters)
        final = float(res.beta)
        runs.append({"start": A.label, "trace": [float(v) for v in res.trace], "converged": res.converged})
        if best is None or final > float(best.beta) + 1e-12:
            best = res
    checks = check_structure(best.matrix)
    payload = {
        "beta_approx": float(best.beta),
        "beta": best.beta.to_json() if isinstance(best.beta, SurdValue) else None,
        "matrix": matrix_to_obj(best.matrix),
        "structure": [c.to_json() for c in checks],
        "runs": runs,
    }
    table = f"{best.matrix}\nbeta = {best.beta}\nstructure rows passing: {sum(c.passes for c in checks)}/{len(checks)}"
    _emit(cfg, payload, table)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = {}
    failed = 0
    lines = []
    for name in names:
        checks = run_suite(name, args.max_n)
        bad = [c for c in checks if not c.ok]
        failed += len(bad)
        results[name] = {"passed": len(checks) - len(bad), "failed": len(bad), "checks": [c.to_json() for c in checks]}
        lines.append(f"[{'PASS' if not bad else 'FAIL'}] {name}: {len(checks) - len(bad)}/{len(checks)}")
        lines.extend(f"    FAIL {c.name}: {c.detail}" for c in bad)
        if name == "subset-norm":
            lines.extend(f"    {c.name}: {c.detail}" for c in checks)
    _emit(cfg, {"suites": results, "ok": failed == 0}, "\n".join(lines))
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_subset_norm(args, cfg: RunConfig) -> int:
    ns = [args.n] if args.n is not None else list(range(1, args.max_n + 1))
    results = [subset_norm_max(n) for n in ns]
    table = "\n".join(
        f"n={r.n}: max norm {r.max_norm:g} (norm^2 {r.max_norm_sq}), {r.maximizer_count} maximizers, "
        f"half-cubes {'attain' if r.half_cubes_attain else 'miss'}"
        for r in results
    )
    _emit(cfg, {"results": [r.to_json() for r in results]}, table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--precision-cap", type=int, default=None,
                        help="bit cap for exact surd comparison (env BADSCI_PRECISION_CAP)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="badsci", description="Bad science matrix toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def evaluation(p):
        p.add_argument("--input", type=Path, required=True)
        p.add_argument("--output", type=Path)
        p.add_argument("--engine", choices=("auto", "exact", "float"), default="auto")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--cap", type=int, default=DIMENSION_CAP, help="largest n to enumerate")
        p.add_argument("--p", type=float, default=None, help="l^p norm instead of l^inf")
        p.add_argument("--sets", action="store_true", help="include W_i vertex masks")

    p = sub.add_parser("eval", parents=[common], help="evaluate beta of a matrix file")
    evaluation(p)
    p.add_argument("--partition", action="store_true")
    p = sub.add_parser("partition", parents=[common], help="alias for eval --partition")
    evaluation(p)
    p.set_defaults(partition=True)

    p = sub.add_parser("construct", parents=[common], help="emit a matrix family as JSON")
    p.add_argument("family", choices=("tree", "hadamard-power", "known", "random-pm", "lift"))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--name")
    p.add_argument("--seed", type=int)
    p.add_argument("--input", type=Path, help="matrix to lift")
    p.add_argument("--output", type=Path)
    p.add_argument("--engine", choices=("auto", "exact", "float"), default="auto")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--check", action="store_true", help="also evaluate beta")

    p = sub.add_parser("search", parents=[common], help="exhaustive search over candidate rows")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--checkpoint-every", type=float, default=30.0, help="seconds between checkpoint writes")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--force", action="store_true", help="ignore the budget")
    p.add_argument("--antipode-free", action="store_true")
    p.add_argument("--max-blocks", type=int, help="stop after this many blocks (resume later)")
    p.add_argument("--matrices", type=int, default=0, help="emit up to this many maximizing matrices")
    p.add_argument("--output", type=Path)

    p = sub.add_parser("improve", parents=[common], help="structure iteration from a matrix or random starts")
    p.add_argument("--input", type=Path)
    p.add_argument("--random", type=int, nargs=2, metavar=("M", "N"))
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--output", type=Path)

    p = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    p.add_argument("--suite", choices=tuple(SUITES) + ("all",), required=True)
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--output", type=Path)

    p = sub.add_parser("subset-norm", parents=[common], help="brute-force subset-norm maxima")
    p.add_argument("--n", type=int)
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--output", type=Path)
    return parser


COMMANDS = {
    "eval": cmd_eval,
    "partition": cmd_eval,
    "construct": cmd_construct,
    "search": cmd_search,
    "improve": cmd_improve,
    "verify": cmd_verify,
    "subset-norm": cmd_subset_norm,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.precision_cap is not None:
        os.environ["BADSCI_PRECISION_CAP"] = str(cfg.precision_cap)
    try:
        return COMMANDS[args.command](args, cfg)
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
