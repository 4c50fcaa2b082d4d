"""Command-line entry point.

Subcommands: ``sample`` (independent DPP / fixed-size draws), ``chain``
(disjoint-step trajectories), ``oracle-check`` (the analytic invariant
battery), and ``experiment`` (the fixed-quality and learning protocols).
Parameters live in a JSON config document; ``--seed``, ``--out`` and
``--threads`` override the matching config fields.  Every output embeds the
effective config so results are exactly reproducible from the file alone.

Exit codes: 0 success, 2 config/usage error, 3 kernel or sampling-math
error, 4 invariant-check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .checks import run_battery
from .errors import (
    ChainUndefinedError,
    DppError,
    DynamicRangeError,
    GroundSetTooLargeError,
    IllConditionedError,
    InfeasibleCardinalityError,
    InvalidArgumentError,
    SingularKernelError,
)
from .experiments import (
    FixedQualityConfig,
    LearningExperimentConfig,
    Row,
    run_fixed_quality,
    run_learning_experiment,
)
from .kernel import Kernel, KernelForm, random_ensemble_kernel
from .learning import Strategy
from .markov import ChainVariant, mdpp_init, mkdpp_init, run_chain
from .oracle import ENUM_MAX_N
from .rng import RandomSource, derive_seed
from .sampler import sample_dpp, sample_kdpp
from .textio import format_subset, load_matrix_csv

log = logging.getLogger("mdpp")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_KERNEL = 3
EXIT_CHECKS = 4

_KERNEL_ERRORS = (
    SingularKernelError,
    ChainUndefinedError,
    IllConditionedError,
    InfeasibleCardinalityError,
    DynamicRangeError,
)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise InvalidArgumentError("config document must be a JSON object")
    return cfg


def _apply_overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["out"] = args.out
    if args.threads is not None:
        cfg["threads"] = args.threads
    return cfg


def _open_out(cfg: dict):
    out = cfg.get("out")
    if out in (None, "-"):
        return sys.stdout, False
    return open(out, "w", encoding="utf-8"), True


def _config_line(cfg: dict) -> str:
    # out/threads are delivery parameters; dropping them keeps outputs
    # byte-identical wherever and however parallel the rerun happens.
    payload = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
    return "# config " + json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _load_kernel(cfg: dict) -> Kernel:
    path = cfg.get("kernel_csv")
    if path is None:
        raise InvalidArgumentError("config needs kernel_csv")
    return Kernel(load_matrix_csv(path), KernelForm.ENSEMBLE)


def cmd_sample(cfg: dict) -> int:
    """Independent draws, one subset per line (blank line = empty set)."""
    kernel = _load_kernel(cfg)
    n_samples = int(cfg.get("n_samples", 1))
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1")
    k = cfg.get("k")
    rng = RandomSource(int(cfg.get("seed", 0)))
    fh, close = _open_out(cfg)
    try:
        fh.write(_config_line(cfg) + "\n")
        for i in range(n_samples):
            draw_rng = rng.derive("sample", i)
            if k is None:
                drawn = sample_dpp(kernel.decomposition, draw_rng)
            else:
                drawn = sample_kdpp(kernel.decomposition, int(k), draw_rng)
            fh.write(format_subset(drawn) + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_chain(cfg: dict) -> int:
    """One trajectory, one line per step; consecutive lines are disjoint."""
    kernel = _load_kernel(cfg)
    steps = int(cfg.get("steps", 1))
    variant = ChainVariant(cfg.get("variant", "mdpp"))
    rng = RandomSource(int(cfg.get("seed", 0)))
    if variant is ChainVariant.MDPP:
        state, _ = mdpp_init(kernel, rng)
    else:
        if "k" not in cfg:
            raise InvalidArgumentError("mkdpp chain needs k")
        state, _ = mkdpp_init(kernel, int(cfg["k"]), rng)
    trajectory = run_chain(state, steps, rng)
    fh, close = _open_out(cfg)
    try:
        fh.write(_config_line(cfg) + "\n")
        for subset in trajectory:
            fh.write(format_subset(subset) + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_oracle_check(cfg: dict) -> int:
    """Run the invariant battery, print one line per check, and emit a CSV
    report; nonzero exit if any check fails."""
    n = int(cfg.get("n", 6))
    if n > ENUM_MAX_N:
        raise GroundSetTooLargeError(f"enumeration supports n <= {ENUM_MAX_N}, got {n}")
    k = int(cfg.get("k", 2))
    if cfg.get("kernel_csv"):
        kernel = _load_kernel(cfg)
    else:
        rng = RandomSource(derive_seed(int(cfg.get("seed", 0)), "oracle-check"))
        kernel = random_ensemble_kernel(n, rng, lambda_max=float(cfg.get("lambda_max", 0.9)))
    results = run_battery(kernel, k)
    fh, close = _open_out(cfg)
    try:
        fh.write(_config_line(cfg) + "\n")
        fh.write("check,deviation,tolerance,status\n")
        for res in results:
            status = "pass" if res.passed else "FAIL"
            fh.write(f"{res.name},{res.deviation!r},{res.tolerance!r},{status}\n")
            print(f"{status:4s} {res.name}: max deviation {res.deviation:.3e}", file=sys.stderr)
    finally:
        if close:
            fh.close()
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECKS


def _write_rows(fh, cfg: dict, rows: list[Row], summaries: list[Row]) -> None:
    fh.write(_config_line(cfg) + "\n")
    fh.write("run,strategy,metric,t,value\n")
    for row in rows + summaries:
        t = "" if row.t is None else str(row.t)
        fh.write(f"{row.run},{row.strategy},{row.metric},{t},{row.value!r}\n")


def cmd_experiment(cfg: dict) -> int:
    """Fixed-quality or learning protocol; long-format CSV plus bootstrap
    summary rows."""
    kind = cfg.get("experiment")
    if kind not in ("fixed_quality", "learning"):
        raise InvalidArgumentError("config needs experiment: fixed_quality | learning")
    strategies = tuple(Strategy.parse(s) for s in cfg.get("strategies", []))
    if not strategies:
        raise InvalidArgumentError("config needs a nonempty strategies list")
    threads = int(cfg.get("threads", 1))
    common = dict(seed=int(cfg.get("seed", 0)), strategies=strategies)
    settable = {
        "n_items", "n_topics", "vocab_size", "topic_concentration", "m_neighbors",
        "k", "runs", "bootstrap_level", "bootstrap_resamples",
    }
    for key in settable:
        if key in cfg:
            common[key] = cfg[key]
    if kind == "fixed_quality":
        for key in ("alpha", "days", "days_per_week"):
            if key in cfg:
                common[key] = cfg[key]
        result = run_fixed_quality(FixedQualityConfig(**common), threads=threads)
    else:
        for key in ("n_preferred", "steps", "eta"):
            if key in cfg:
                common[key] = cfg[key]
        if "preference" in cfg:
            common["preference"] = tuple(cfg["preference"])
        result = run_learning_experiment(LearningExperimentConfig(**common), threads=threads)
    fh, close = _open_out(cfg)
    try:
        _write_rows(fh, cfg, result.rows, result.summaries)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdpp",
        description="Determinantal point process sampling, chains, and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("sample", cmd_sample),
        ("chain", cmd_chain),
        ("oracle-check", cmd_oracle_check),
        ("experiment", cmd_experiment),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config document")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--out", help="override output path ('-' for stdout)")
        p.add_argument("--threads", type=int, help="worker threads for run dispatch")
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _apply_overrides(_load_config(args.config), args)
        return args.handler(cfg)
    except _KERNEL_ERRORS as exc:
        log.error("%s", exc)
        return EXIT_KERNEL
    except (InvalidArgumentError, GroundSetTooLargeError, OSError, json.JSONDecodeError,
            ValueError, TypeError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except DppError as exc:
        log.error("%s", exc)
        return EXIT_KERNEL


if __name__ == "__main__":
    sys.exit(main())
