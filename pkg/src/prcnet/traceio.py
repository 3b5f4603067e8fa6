"""Reading and writing run output files.

Layout of a run directory::

    agent_<id>.csv   t,phase,alive,commanded_delta,clamped
    metric.csv       t,metric,live_count,broadcaster
    summary.json     Summary fields, absent values as null
    manifest.json    run provenance

Floats are written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

from prcnet.metrics import Summary, Trace

AGENT_HEADER = ["t", "phase", "alive", "commanded_delta", "clamped"]
METRIC_HEADER = ["t", "metric", "live_count", "broadcaster"]


def fmt(x: float) -> str:
    return repr(float(x))


def agent_rows(trace: Trace) -> dict[int, list[list[str]]]:
    rows: dict[int, list[list[str]]] = {}
    for rec in trace.records:
        cmds = {aid: (delta, clamped) for aid, delta, clamped in rec.commands}
        for aid, phase, alive in rec.phases:
            cmd = cmds.get(aid)
            rows.setdefault(aid, []).append([
                fmt(rec.t),
                fmt(phase),
                "1" if alive else "0",
                "" if cmd is None else fmt(cmd[0]),
                "1" if cmd is not None and cmd[1] else "0",
            ])
    return rows


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_trace(trace: Trace, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    for aid, rows in sorted(agent_rows(trace).items()):
        p = out_dir / f"agent_{aid}.csv"
        _write_csv(p, AGENT_HEADER, rows)
        written.append(p)
    p = out_dir / "metric.csv"
    _write_csv(p, METRIC_HEADER, (
        [fmt(r.t), fmt(r.metric), str(r.live_count), "" if r.broadcaster is None else str(r.broadcaster)]
        for r in trace.records
    ))
    written.append(p)
    return written


def write_summary(summary: Summary, path: Path) -> None:
    dump_json(Path(path), summary.as_dict())


# --- readers ----------------------------------------------------------------

def _opt_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def read_agent_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != AGENT_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            {
                "t": float(t),
                "phase": float(phase),
                "alive": alive == "1",
                "commanded_delta": _opt_float(delta),
                "clamped": clamped == "1",
            }
            for t, phase, alive, delta, clamped in r
        ]


def read_metric_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != METRIC_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            {
                "t": float(t),
                "metric": float(m),
                "live_count": int(n),
                "broadcaster": None if b == "" else int(b),
            }
            for t, m, n, b in r
        ]


def read_summary(path) -> Summary:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return Summary(**d)


def read_run_dir(out_dir) -> tuple[dict[int, list[dict]], list[dict], Summary]:
    out_dir = Path(out_dir)
    agents = {
        int(p.stem.split("_", 1)[1]): read_agent_csv(p)
        for p in sorted(out_dir.glob("agent_*.csv"))
    }
    return agents, read_metric_csv(out_dir / "metric.csv"), read_summary(out_dir / "summary.json")


def cross_validate(out_dir, mode: str, tol: float = 1e-9) -> None:
    """Check metric.csv against the headings in the agent files.

    Raises ValueError naming the first row that disagrees by more than ``tol``.
    """
    from prcnet.phase import state_metric

    agents, metric_rows, _ = read_run_dir(out_dir)
    by_time: dict[float, list[float]] = {}
    counts: dict[float, int] = {}
    for rows in agents.values():
        for row in rows:
            counts[row["t"]] = counts.get(row["t"], 0)
            if row["alive"]:
                by_time.setdefault(row["t"], []).append(row["phase"])
                counts[row["t"]] += 1
    for row in metric_rows:
        live = by_time.get(row["t"], [])
        if len(live) != row["live_count"]:
            raise ValueError(f"t={row['t']}: live_count {row['live_count']} but {len(live)} live agent rows")
        m = state_metric(mode, live)
        if abs(m - row["metric"]) > tol:
            raise ValueError(f"t={row['t']}: metric {row['metric']} but agent files give {m}")
