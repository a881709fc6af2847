"""CSV rows and the run manifest.

Every float goes through :func:`fmt` (6 significant digits) and every
printed table is built from the same row dicts that reach the CSV files,
so nothing is shown that is not also on disk.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .config import ScenarioConfig, dump_config
from .engine import SweepRow, TrialSummary
from .stsi import Scheme

TICK_COLUMNS = ["trial", "step", "scheme", "wce", "reaction_latency_ms", "max_aoi"]
SUMMARY_COLUMNS = [
    "trial", "seed", "scheme", "wce_mean", "wce_std",
    "latency_mean_ms", "latency_std_ms", "decisions",
]
SWEEP_COLUMNS = [
    "parameter", "value", "scheme", "trial", "seed", "wce_mean", "wce_std",
    "latency_mean_ms", "latency_std_ms",
]
GRID_COLUMNS = [
    "parameter", "value", "scheme", "trials", "wce_mean", "wce_std_trials",
    "latency_mean_ms", "latency_std_trials_ms", "latency_std_samples_ms",
]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, Scheme):
        return x.value
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".6g")
    return str(x)


def to_csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def tick_rows(summaries: Sequence[TrialSummary]) -> list[dict]:
    return [
        {
            "trial": s.trial,
            "step": t.step,
            "scheme": s.scheme,
            "wce": t.wce,
            "reaction_latency_ms": t.mean_reaction_latency_ms,
            "max_aoi": t.max_aoi,
        }
        for s in summaries
        for t in s.ticks
    ]


def _aggregate(summaries: Sequence[TrialSummary]) -> dict:
    wce = np.array([s.wce_mean for s in summaries])
    lat = np.array([s.latency_mean for s in summaries])
    samples = np.concatenate(
        [np.concatenate([t.reaction_latency_ms for t in s.ticks]) for s in summaries]
    ) if all(s.ticks for s in summaries) else lat
    return {
        "trials": len(summaries),
        "wce_mean": float(wce.mean()),
        "wce_std_trials": float(wce.std()),
        "latency_mean_ms": float(lat.mean()),
        "latency_std_trials_ms": float(lat.std()),
        "latency_std_samples_ms": float(samples.std()),
        "decisions": sum(s.decisions for s in summaries),
    }


def summary_rows(summaries: Sequence[TrialSummary], master_seed: int) -> list[dict]:
    """Per-trial rows, then one ``trial=all`` row per scheme.

    Per-trial stds are over samples; the aggregate row's stds are over the
    trial means.
    """
    rows = [
        {
            "trial": s.trial,
            "seed": s.seed,
            "scheme": s.scheme,
            "wce_mean": s.wce_mean,
            "wce_std": s.wce_std,
            "latency_mean_ms": s.latency_mean,
            "latency_std_ms": s.latency_std,
            "decisions": s.decisions,
        }
        for s in summaries
    ]
    for scheme in Scheme:
        group = [s for s in summaries if s.scheme is scheme]
        if not group:
            continue
        agg = _aggregate(group)
        rows.append(
            {
                "trial": "all",
                "seed": master_seed,
                "scheme": scheme,
                "wce_mean": agg["wce_mean"],
                "wce_std": agg["wce_std_trials"],
                "latency_mean_ms": agg["latency_mean_ms"],
                "latency_std_ms": agg["latency_std_trials_ms"],
                "decisions": agg["decisions"],
            }
        )
    return rows


def sweep_rows(rows: Sequence[SweepRow]) -> list[dict]:
    return [
        {
            "parameter": r.parameter,
            "value": r.value,
            "scheme": r.scheme,
            "trial": r.summary.trial,
            "seed": r.summary.seed,
            "wce_mean": r.summary.wce_mean,
            "wce_std": r.summary.wce_std,
            "latency_mean_ms": r.summary.latency_mean,
            "latency_std_ms": r.summary.latency_std,
        }
        for r in rows
    ]


def grid_rows(rows: Sequence[SweepRow]) -> list[dict]:
    """One aggregate row per (value, scheme), in sweep order."""
    keys: list[tuple] = []
    for r in rows:
        k = (r.value, r.scheme)
        if k not in keys:
            keys.append(k)
    out = []
    for value, scheme in keys:
        group = [r.summary for r in rows if r.value == value and r.scheme is scheme]
        agg = _aggregate(group)
        agg.pop("decisions")
        out.append({"parameter": rows[0].parameter, "value": value, "scheme": scheme, **agg})
    return out


def render_table(columns: Sequence[str], rows: Iterable[dict]) -> str:
    cells = [list(columns)] + [[fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_grid(grid: Sequence[dict]) -> str:
    """Side-by-side EPIC vs traditional comparison, one line per value."""
    values = []
    for g in grid:
        if g["value"] not in values:
            values.append(g["value"])
    by = {(g["value"], g["scheme"]): g for g in grid}
    header = f"{grid[0]['parameter']:>12}  {'tau_R EPIC (ms)':>22}  {'tau_R trad (ms)':>22}  {'WCE EPIC':>20}  {'WCE trad':>20}"
    lines = [header, "-" * len(header)]
    for v in values:
        parts = [f"{fmt(v):>12}"]
        for key, width in (("latency", 22), ("wce", 20)):
            for scheme in (Scheme.EPIC, Scheme.TRADITIONAL):
                g = by.get((v, scheme))
                if g is None:
                    parts.append(" " * width)
                elif key == "latency":
                    parts.append(f"{fmt(g['latency_mean_ms']) + ' +- ' + fmt(g['latency_std_trials_ms']):>{width}}")
                else:
                    parts.append(f"{fmt(g['wce_mean']) + ' +- ' + fmt(g['wce_std_trials']):>{width}}")
        lines.append("  ".join(parts))
    return "\n".join(lines)


def manifest_text(config: ScenarioConfig, command: str, outputs: Sequence[str], extra: dict | None = None,
                  timestamp: str | None = None) -> str:
    """Resolved config in config-file syntax with run metadata as comments.

    The file loads back with ``--config``.
    """
    ts = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    head = [
        f"# epicsim {__version__}",
        f"# timestamp = {ts}",
        f"# command = {command}",
        f"# master_seed = {config.master_seed}",
        f"# outputs = {', '.join(outputs)}",
    ]
    for k, v in (extra or {}).items():
        head.append(f"# {k} = {v}")
    return "\n".join(head) + "\n" + dump_config(config)


def write_outputs(out_dir: Path, files: dict[str, str]) -> list[Path]:
    """Write all files or none.

    Each file is staged as ``.<name>.tmp`` and only renamed into place once
    every stage succeeded.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            tmp = out_dir / f".{name}.tmp"
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
    except OSError:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]
