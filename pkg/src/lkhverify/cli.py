"""Batch-verification command line.

Exit codes: 0 all trials pass, 1 a violation was found, 2 usage error,
3 numerical failure (non-convergence or an ill-conditioned instance that
survived the retry budget).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from math import prod
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import verifier as V
from .entropy import lkh3_gap, ssa_gap
from .errors import EpsilonTooLarge, IllConditioned, NonConvergence
from .states import DensityMatrix, make_rng, product_density, product_vector, random_density
from .tensor import DEFAULT_MAX_DIM

log = logging.getLogger("lkhverify")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
FORMATS = ("human", "json", "csv")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    dims: tuple[int, ...] = (2, 2, 2)
    trials: int = 100
    seed: int = 0
    tol: float = 1e-9
    eps_sweep: tuple[float, float, int, bool] | None = None
    output_format: str = "human"
    max_dim: int = DEFAULT_MAX_DIM
    epsilon: float | None = None
    rank: int | None = None
    product: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if any(d < 1 for d in self.dims):
            raise UsageError(f"invalid dims {self.dims}")
        if prod(self.dims) > self.max_dim:
            raise UsageError(f"total dimension {prod(self.dims)} exceeds max-dim {self.max_dim}")
        if self.output_format not in FORMATS:
            raise UsageError(f"unknown format {self.output_format!r}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        if self.eps_sweep is not None:
            d["eps_sweep"] = list(self.eps_sweep)
        return d


# -- state files -------------------------------------------------------------


def state_to_text(mat: np.ndarray, dims: Sequence[int]) -> str:
    data = [[float(z.real), float(z.imag)] for z in np.asarray(mat).ravel()]
    return json.dumps({"dims": [int(d) for d in dims], "data": data}) + "\n"


def state_from_text(text: str, as_state: bool = True):
    """Parse a state file into ``(matrix, dims)``, or a
    :class:`DensityMatrix` when ``as_state`` is set."""
    obj = json.loads(text)
    dims = tuple(int(d) for d in obj["dims"])
    n = prod(dims)
    data = obj["data"]
    if len(data) != n * n or any(len(pair) != 2 for pair in data):
        raise ValueError(f"state file holds {len(data)} entries, expected {n * n} [re, im] pairs")
    arr = np.array(data, dtype=float)
    mat = (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)
    return DensityMatrix(mat, dims) if as_state else (mat, dims)


def cmd_gen_state(config: RunConfig, rank: int, out_path: str | Path) -> Path:
    rho = random_density(config.dims, rank, config.seed, max_dim=config.max_dim)
    path = Path(out_path)
    path.write_text(state_to_text(rho.mat, rho.dims))
    return path


# -- suites -------------------------------------------------------------------


def _tripartite_state(config: RunConfig, index: int) -> DensityMatrix:
    rng = make_rng(config.seed, index)
    if config.product:
        return product_density(*(random_density((d,), None, rng) for d in config.dims))
    return random_density(config.dims, config.rank, rng, max_dim=config.max_dim)


def _trial(gap: float, verdict: bool, **diagnostics) -> dict:
    return {"gap": float(gap), "verdict": bool(verdict), "diagnostics": diagnostics}


def trial_lkh(config: RunConfig, index: int) -> dict:
    r = V.check_lkh_operator(V.random_lkh_instance(config.dims, config.seed, index), config.tol)
    return _trial(r.min_eig_gap, r.verdict, relative_tol=r.relative_tol, **r.diagnostics)


def trial_lkh_log(config: RunConfig, index: int) -> dict:
    r = V.check_lkh_log(V.random_lkh_instance(config.dims, config.seed, index), config.tol)
    return _trial(r.min_eig_gap, r.verdict, **r.diagnostics)


def trial_ssa(config: RunConfig, index: int) -> dict:
    gap = ssa_gap(_tripartite_state(config, index))
    return _trial(gap, gap >= -config.tol)


def trial_lkh3(config: RunConfig, index: int) -> dict:
    rho = _tripartite_state(config, index)
    gap = lkh3_gap(rho)
    return _trial(gap, gap >= -config.tol, trace_form=V.lkh3_from_trace(rho))


def trial_lemma(config: RunConfig, index: int) -> dict:
    inst = V.random_lemma_instance(config.dims, config.seed, index, config.epsilon)
    r = V.lemma_bound_check(inst, config.tol)
    bare = V.lemma_bound_check(inst, config.tol, with_factor=False)
    return _trial(r.min_eig_gap, r.verdict, bare_gap=bare.min_eig_gap, bare_verdict=bare.verdict, **r.diagnostics)


def trial_equality_gap(config: RunConfig, index: int) -> dict:
    eq = V.equality_gap_check(V.random_lkh_instance(config.dims, config.seed, index))
    d2 = eq["d2"]
    if d2 > 1:
        ok = eq["gap"] > V.STRICT_GAP and eq["inv_trace_product"] >= d2 * d2 - config.tol
    else:
        ok = eq["verdict"]
    keys = ("inv_trace_product", "trace_B", "tr2_X_deviation", "tr2_Y_deviation", "equality_residual", "mu")
    return _trial(eq["gap"], ok, **{k: eq[k] for k in keys})


SUITES: dict[str, Callable[[RunConfig, int], dict]] = {
    "lkh": trial_lkh,
    "lkh-log": trial_lkh_log,
    "ssa": trial_ssa,
    "lkh3": trial_lkh3,
    "lemma": trial_lemma,
    "equality-gap": trial_equality_gap,
}


def _run_one(suite: str, config: RunConfig, index: int) -> dict:
    result = SUITES[suite](config, index)
    return {"suite": suite, "index": index, "seed": config.seed, **result}


def _summary(trials: list[dict], dims: Sequence[int], wall_time: float) -> dict:
    gaps = [t["gap"] for t in trials]
    bad = [t for t in trials if not t["verdict"]]
    return {
        "min_gap": min(gaps) if gaps else 0.0,
        "median_gap": statistics.median(gaps) if gaps else 0.0,
        "failures": len(bad),
        "violations": [
            {"suite": t["suite"], "dims": list(dims), "seed": t["seed"], "index": t["index"]} for t in bad
        ],
        "wall_time": wall_time,
    }


def run_suite(suite: str, config: RunConfig, workers: int = 1) -> dict:
    """Run ``config.trials`` seeded trials of one suite (or ``"all"``) and
    assemble a report ordered by trial index."""
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}")
    start = time.perf_counter()
    trials: list[dict] = []
    for name in names:
        run = partial(_run_one, name, config)
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                trials.extend(pool.map(run, range(config.trials), chunksize=max(1, config.trials // (4 * workers))))
        else:
            trials.extend(run(i) for i in range(config.trials))
    return {
        "suite": suite,
        "config": config.to_json(),
        "trials": trials,
        "summary": _summary(trials, config.dims, time.perf_counter() - start),
    }


def empty_report(suite: str, config: RunConfig) -> dict:
    return {"suite": suite, "config": config.to_json(), "trials": [], "summary": _summary([], config.dims, 0.0)}


# -- epsilon sweep ---------------------------------------------------------------


def parse_eps(spec: str) -> tuple[float, float, int, bool]:
    """``start:stop:points[:log|lin]``; log spacing is the default."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"bad --eps {spec!r}; expected start:stop:points[:log|lin]")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad --eps {spec!r}: {exc}") from None
    spacing = parts[3] if len(parts) == 4 else "log"
    if spacing not in ("log", "lin"):
        raise UsageError(f"bad spacing {spacing!r} in --eps")
    if points < 1 or start <= 0 or stop <= 0:
        raise UsageError("--eps needs positive endpoints and at least one point")
    return start, stop, points, spacing == "log"


def eps_grid(sweep: tuple[float, float, int, bool]) -> np.ndarray:
    start, stop, points, logspaced = sweep
    if logspaced:
        return np.logspace(np.log10(start), np.log10(stop), points)
    return np.linspace(start, stop, points)


def _sweep_pair(config: RunConfig) -> V.LemmaInstance:
    d1, d2, d3 = config.dims
    if not config.product:
        return V.random_lemma_instance(config.dims, config.seed, 0, 1.0)
    rng = make_rng(config.seed, 0)

    def vec(d):
        return rng.standard_normal(d) + 1j * rng.standard_normal(d)

    # with d3 = 1 the product phi has sigma3 = 1; otherwise sigma3 is rank one
    return V.LemmaInstance(product_vector(vec(d1), vec(d2)), product_vector(vec(d2), vec(d3)), 1.0)


def cmd_sweep_epsilon(config: RunConfig) -> dict:
    """Lemma gap and regularized theorem gap over a grid of epsilons."""
    if config.eps_sweep is None:
        raise UsageError("sweep needs --eps")
    start = time.perf_counter()
    pair = _sweep_pair(config)
    inst = V.random_lkh_instance(config.dims, config.seed, 0)
    direct = V.check_lkh_operator(inst, config.tol).min_eig_gap
    d2_tilde = config.dims[1] + 1
    rows = []
    for eps in eps_grid(config.eps_sweep):
        eps = float(eps)
        r = V.lemma_bound_check(pair.with_epsilon(eps), config.tol, enforce_threshold=False)
        rows.append(
            {
                "epsilon": eps,
                "lemma_gap": r.min_eig_gap,
                "lemma_verdict": r.verdict,
                "within_eps_star": eps <= pair.epsilon_star,
                "regularized_gap": V.regularized_lkh_gap(inst, d2_tilde, eps),
                "direct_gap": direct,
            }
        )
    bad = [row for row in rows if row["within_eps_star"] and not row["lemma_verdict"]]
    return {
        "suite": "sweep",
        "config": config.to_json(),
        "epsilon_star": pair.epsilon_star,
        "rows": rows,
        "summary": {"failures": len(bad), "wall_time": time.perf_counter() - start},
    }


# -- rendering -------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _scalar_keys(rows: list[dict]) -> list[str]:
    keys: list[str] = []
    for row in rows:
        for k, v in row.get("diagnostics", {}).items():
            if k not in keys and not isinstance(v, (list, dict)):
                keys.append(k)
    return keys


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in report:
        header = list(report["rows"][0]) if report["rows"] else ["epsilon"]
        writer.writerow(header)
        for row in report["rows"]:
            writer.writerow([_fmt(row[k]) for k in header])
        return buf.getvalue()
    diag = _scalar_keys(report["trials"])
    writer.writerow(["suite", "index", "seed", "gap", "verdict"] + diag)
    for t in report["trials"]:
        d = t["diagnostics"]
        writer.writerow(
            [t["suite"], t["index"], t["seed"], _fmt(t["gap"]), _fmt(t["verdict"])]
            + [_fmt(d.get(k, "")) for k in diag]
        )
    return buf.getvalue()


def render_human(report: dict) -> str:
    lines = []
    if "rows" in report:
        lines.append(f"epsilon sweep, epsilon* = {report['epsilon_star']:.3e}")
        lines.append(f"{'epsilon':>12} {'lemma gap':>14} {'ok':>5} {'<=eps*':>6} {'regularized':>14} {'direct':>14}")
        for r in report["rows"]:
            lines.append(
                f"{r['epsilon']:12.3e} {r['lemma_gap']:14.6e} {_fmt(r['lemma_verdict']):>5} "
                f"{_fmt(r['within_eps_star']):>6} {r['regularized_gap']:14.6e} {r['direct_gap']:14.6e}"
            )
        lines.append(f"failures: {report['summary']['failures']}")
        return "\n".join(lines) + "\n"
    lines.append(f"suite {report['suite']}  dims {report['config']['dims']}  seed {report['config']['seed']}")
    lines.append(f"{'suite':>12} {'index':>6} {'gap':>16} {'ok':>5}")
    for t in report["trials"]:
        lines.append(f"{t['suite']:>12} {t['index']:>6} {t['gap']:16.8e} {_fmt(t['verdict']):>5}")
    s = report["summary"]
    lines.append(f"min gap {s['min_gap']:.6e}  median gap {s['median_gap']:.6e}  failures {s['failures']}")
    for v in s["violations"]:
        lines.append(f"VIOLATION suite={v['suite']} dims={v['dims']} seed={v['seed']} index={v['index']}")
    lines.append(f"wall time {s['wall_time']:.2f}s")
    return "\n".join(lines) + "\n"


def cmd_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "csv":
        return render_csv(report)
    if fmt == "human":
        return render_human(report)
    raise UsageError(f"unknown format {fmt!r}")


# -- argument parsing -------------------------------------------------------------


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad dims {text!r}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dims", type=_dims, default=(2, 2, 2), help="comma-separated local dimensions")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    common.add_argument("--out", help="write output here instead of stdout")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--tol", type=float, default=1e-9)
    run.add_argument("--format", choices=FORMATS, default="human")
    run.add_argument("--product", action="store_true", help="use product states / product vectors")
    run.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lkhverify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-state", parents=[common], help="write a random density matrix")
    gen.add_argument("--rank", type=int, default=None)

    ver = sub.add_parser("verify", parents=[common, run], help="run a verification suite")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    ver.add_argument("--epsilon", type=float, default=None, help="fixed epsilon for the lemma suite")
    ver.add_argument("--rank", type=int, default=None, help="rank of random tripartite states")
    ver.add_argument("--workers", type=int, default=1)

    sweep = sub.add_parser("sweep", parents=[common, run], help="epsilon sweep of the lemma bound")
    sweep.add_argument("--eps", required=True, help="start:stop:points[:log|lin]")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING)
    try:
        if args.command == "gen-state":
            config = RunConfig(dims=args.dims, seed=args.seed, max_dim=args.max_dim)
            if not args.out:
                raise UsageError("gen-state needs --out")
            cmd_gen_state(config, args.rank, args.out)
            return EXIT_OK
        config = RunConfig(
            dims=args.dims,
            trials=args.trials,
            seed=args.seed,
            tol=args.tol,
            eps_sweep=parse_eps(args.eps) if args.command == "sweep" else None,
            output_format=args.format,
            max_dim=args.max_dim,
            epsilon=getattr(args, "epsilon", None),
            rank=getattr(args, "rank", None),
            product=args.product,
        )
        if args.command == "sweep":
            report = cmd_sweep_epsilon(config)
        else:
            if len(config.dims) != 3:
                raise UsageError("verification suites need three dims d1,d2,d3")
            report = run_suite(args.suite, config, workers=args.workers)
        _emit(cmd_report(report, config.output_format), args.out)
        if report["summary"]["failures"]:
            for v in report["summary"].get("violations", []):
                log.error("violation: suite=%s dims=%s seed=%s index=%s", v["suite"], v["dims"], v["seed"], v["index"])
            return EXIT_VIOLATION
        return EXIT_OK
    except (UsageError, EpsilonTooLarge, ValueError) as exc:
        print(f"lkhverify: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IllConditioned, NonConvergence) as exc:
        print(f"lkhverify: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"lkhverify: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
