"""Command-line front end.

    prcnet run     --config CFG --out DIR [--seed N] [--quiet]
    prcnet compare --config CFG --out DIR --n-seeds K [--jobs J]
    prcnet sweep   --config CFG --out DIR --gains 0.25,0.5,1.0

Exit codes: 0 success, 2 invalid config or arguments, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import sys
from pathlib import Path

from prcnet import __version__
from prcnet.config import ExperimentConfig, load_config
from prcnet.coupling import check_gain
from prcnet.engine import run
from prcnet.errors import ConfigError
from prcnet.metrics import compare_methods
from prcnet.traceio import dump_json, fmt, write_summary, write_trace

log = logging.getLogger("prcnet")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class UsageError(Exception):
    """Bad command-line argument (maps to exit 2)."""


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _load(path: str, seed: int | None) -> ExperimentConfig:
    cfg = load_config(path)
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError(f"must be an unsigned 64-bit integer, got {seed}", "--seed")
        cfg = cfg.with_seed(seed)
    return cfg


def _prepare_out(out: str) -> Path:
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_run(config_file: str, output_dir: str, seed_override: int | None = None) -> int:
    cfg = _load(config_file, seed_override)
    started = _now()
    trace, summary = run(cfg)
    out = _prepare_out(output_dir)
    for stale in out.glob("agent_*.csv"):
        stale.unlink()
    write_trace(trace, out)
    write_summary(summary, out / "summary.json")
    dump_json(out / "manifest.json", {
        "config_path": str(config_file),
        "output_dir": str(output_dir),
        "seed": cfg.seed,
        "mode": cfg.mode,
        "version": __version__,
        "started": started,
        "finished": _now(),
    })
    log.info("run finished: convergence_time=%s final_metric=%.6g",
             summary.convergence_time, summary.final_metric)
    return EXIT_OK


COMPARE_COLUMNS = [
    "method", "n_runs", "converged_fraction",
    "convergence_time_mean", "convergence_time_min", "convergence_time_max",
    "censored_convergence_time_mean", "amplitude_mean", "amplitude_min", "amplitude_max",
]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def cmd_compare(config_file: str, output_dir: str, n_seeds: int, jobs: int = 1) -> int:
    if n_seeds < 1:
        raise UsageError(f"--n-seeds must be >= 1, got {n_seeds}")
    cfg = _load(config_file, None)
    seeds = [(cfg.seed + i) % 2**64 for i in range(n_seeds)]
    comp = compare_methods(cfg, seeds, jobs=jobs)
    out = _prepare_out(output_dir)
    with open(out / "comparison.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for row in comp.rows:
            d = row.as_dict()
            w.writerow([_cell(d[c]) for c in COMPARE_COLUMNS])
    dump_json(out / "comparison.json", comp.as_dict())
    for name, frac in comp.orderings.items():
        log.info("%-70s %.2f", name, frac)
    return EXIT_OK


SWEEP_COLUMNS = ["gain", "convergence_time", "rounds_to_converge",
                 "steady_state_amplitude", "final_metric", "truncated"]


def parse_gains(text: str) -> list[float]:
    try:
        gains = [float(g) for g in text.split(",") if g.strip()]
    except ValueError as exc:
        raise UsageError(f"--gains: {exc}") from exc
    if not gains:
        raise UsageError("--gains: empty list")
    if len(set(gains)) != len(gains):
        raise UsageError("--gains: duplicate gains")
    for g in gains:
        check_gain(g, "--gains")
    return gains


def cmd_sweep(config_file: str, output_dir: str, gain_list: list[float]) -> int:
    if len(set(gain_list)) != len(gain_list):
        raise UsageError("--gains: duplicate gains")
    for g in gain_list:
        check_gain(g, "--gains")
    cfg = _load(config_file, None)
    rows = []
    for g in gain_list:
        _, summary = run(cfg.with_gain(g))
        rows.append({"gain": g, **summary.as_dict()})
    out = _prepare_out(output_dir)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([_cell(r[c]) if c != "truncated" else str(r[c]).lower() for c in SWEEP_COLUMNS])
    dump_json(out / "sweep.json", {"seed": cfg.seed, "rows": rows})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prcnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"prcnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
        p.add_argument("--out", required=True, metavar="DIR", help="output directory")
        p.add_argument("--quiet", action="store_true", help="only report errors")

    p_run = sub.add_parser("run", help="run one experiment")
    common(p_run)
    p_run.add_argument("--seed", type=int, metavar="U64", help="override the config seed")

    p_cmp = sub.add_parser("compare", help="run all three actuation methods over several seeds")
    common(p_cmp)
    p_cmp.add_argument("--n-seeds", type=int, required=True)
    p_cmp.add_argument("--jobs", type=int, default=1, help="worker processes")

    p_sw = sub.add_parser("sweep", help="one run per coupling gain")
    common(p_sw)
    p_sw.add_argument("--gains", required=True, help="comma-separated gains in (0, 1]")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out, args.seed)
        if args.command == "compare":
            return cmd_compare(args.config, args.out, args.n_seeds, args.jobs)
        return cmd_sweep(args.config, args.out, parse_gains(args.gains))
    except (ConfigError, UsageError) as exc:
        print(f"prcnet: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        if isinstance(exc, FileNotFoundError) and exc.filename == args.config:
            print(f"prcnet: config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"prcnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
