"""CSV / JSON emission. Everything except the manifest timestamp is byte-stable."""

from __future__ import annotations

import csv
import io
import json
import time
from datetime import datetime, timezone
from pathlib import Path

from .config import ExperimentConfig
from .runner import RunResult, SweepResult, software_info

TRACE_COLUMNS = ["t", "x", "y", "o", "r_t", "R_t", "R_s_t"]
AGGREGATE_COLUMNS = ["t", "mean_R", "std_R", "p10", "p50", "p90", "bound", "frac_under_bound"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def trace_rows(run: RunResult) -> tuple[list[str], list[dict]]:
    """Checkpoint rows with 1-based item labels."""
    rows = []
    diag_cols: list[str] = []
    for row in run.regret.checkpoints:
        d = {"t": row.t, "x": row.x + 1, "y": row.y + 1, "o": row.o,
             "r_t": row.r_t, "R_t": row.R_t, "R_s_t": row.R_s_t}
        for key, val in row.diag.items():
            if key not in diag_cols:
                diag_cols.append(key)
            d[key] = val
        rows.append(d)
    return TRACE_COLUMNS + diag_cols, rows


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def emit_outputs(result: SweepResult, config: ExperimentConfig, out_dir=None,
                 formats=None, wall_clock: float | None = None) -> list[Path]:
    """Write per-seed traces, the aggregate table, the resolved config and a manifest.

    Returns the written paths.
    """
    out = Path(out_dir or config.output_dir or "out")
    formats = formats or config.formats
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def put(name: str, text: str):
        p = out / name
        p.write_text(text)
        written.append(p)

    agg_rows = result.summary.rows()
    for seed in sorted(result.runs):
        run = result.runs[seed]
        cols, rows = trace_rows(run)
        if "csv" in formats:
            put(f"trace_seed{seed}.csv", _csv(cols, rows))
        if "json" in formats:
            put(f"trace_seed{seed}.json", _dump({"summary": run.summary(), "rows": rows}))
    if "csv" in formats:
        put("aggregate.csv", _csv(AGGREGATE_COLUMNS, agg_rows))
    if "json" in formats:
        put("aggregate.json", _dump({"n_seeds": result.summary.n_seeds,
                                     "bound_label": result.summary.bound_label,
                                     "rows": agg_rows}))
    put("config.resolved.json", _dump(result.resolved))
    put("runs.json", _dump([result.runs[s].summary() for s in sorted(result.runs)]))
    manifest = {
        "software": software_info(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_clock_seconds": wall_clock,
        "files": sorted(p.name for p in written),
    }
    put("manifest.json", _dump(manifest))
    return written


class Stopwatch:
    def __enter__(self):
        self._t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self._t
