"""Delimited report output and companion figures.

CSV and JSON renderings are byte-deterministic for a fixed row list:
columns are fixed per command, floats are written with repr, missing
entries are empty.  When a report goes to a file, a matplotlib figure
is rendered next to it (same stem, .png) unless figures are disabled.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = [
    "rows_to_csv",
    "report_to_json",
    "write_report",
    "figure_path",
    "sweep_figure",
    "verify_figure",
    "necessary_figure",
    "char_figure",
]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return repr(value)
    return value


def report_to_json(doc: dict) -> str:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [clean(v) for v in obj]
        return _jsonable(obj)

    return json.dumps(clean(doc), indent=2) + "\n"


def write_report(
    out: str | None,
    fmt: str,
    doc: dict,
    table_columns: dict[str, list[str]],
) -> str:
    """Render the report; write to `out` if given, return the rendered text.

    `table_columns` maps doc keys holding row lists to their CSV column
    order; with format csv the first table goes to `out` and any further
    tables to '<stem>_<key>.csv'.
    """
    if fmt == "json":
        text = report_to_json(doc)
        if out:
            Path(out).write_text(text)
        return text
    pieces = []
    first = True
    for key, columns in table_columns.items():
        text = rows_to_csv(doc.get(key, []), columns)
        if out:
            path = Path(out)
            if not first:
                path = path.with_name(f"{path.stem}_{key}{path.suffix or '.csv'}")
            path.write_text(text)
        pieces.append(text)
        first = False
    return "\n".join(pieces)


def figure_path(out: str) -> Path:
    return Path(out).with_suffix(".png")


def _save(fig, path) -> None:
    fig.savefig(path, dpi=140, metadata={"Software": None})
    plt.close(fig)


def sweep_figure(rows: list[dict], slopes: list[dict], path, x_key: str = "a2") -> None:
    """Log-log norm vs characteristic with per-(m,n) slopes, plus the ratio panel."""
    fig, (ax_norm, ax_ratio) = plt.subplots(1, 2, figsize=(10.5, 4.2))
    groups: dict[tuple[int, int], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["m"], row["n"]), []).append(row)
    slope_by_mn = {(s["m"], s["n"]): s["slope"] for s in slopes}
    for (m, n), grp in sorted(groups.items()):
        xs = [r[x_key] for r in grp if r["measured_norm"] > 0]
        ys = [r["measured_norm"] for r in grp if r["measured_norm"] > 0]
        if not xs:
            continue
        slope = slope_by_mn.get((m, n))
        label = f"(m,n)=({m},{n})" + (f" slope {slope:.2f}" if slope is not None else "")
        ax_norm.loglog(xs, ys, ".", ms=4, label=label)
        ax_ratio.semilogx([r[x_key] for r in grp], [r["ratio"] for r in grp], ".", ms=4)
    ax_norm.set_xlabel(x_key)
    ax_norm.set_ylabel("measured norm")
    if ax_norm.get_legend_handles_labels()[0]:
        ax_norm.legend(fontsize=7)
    ax_ratio.set_xlabel(x_key)
    ax_ratio.set_ylabel("norm / bound denominator")
    fig.tight_layout()
    _save(fig, path)


def verify_figure(rows: list[dict], path) -> None:
    """Measured/bound margins for the pinned checks; recorded ratios listed below."""
    pinned = [r for r in rows if r["bound"] is not None]
    fig, ax = plt.subplots(figsize=(8.5, 0.34 * max(6, len(pinned)) + 1.2))
    labels = [f"{r['check']} [{r['params']}]" for r in pinned]
    margins = [r["measured"] / r["bound"] if r["bound"] else 0.0 for r in pinned]
    colors = ["tab:green" if r["status"] == "pass" else "tab:red" for r in pinned]
    ax.barh(range(len(pinned)), margins, color=colors)
    ax.axvline(1.0, color="k", lw=1, ls="--")
    ax.set_yticks(range(len(pinned)), labels, fontsize=6)
    ax.set_xlabel("measured / pinned bound")
    fig.tight_layout()
    _save(fig, path)


def necessary_figure(rows: list[dict], path) -> None:
    fig, ax = plt.subplots(figsize=(7.5, 4.0))
    disc = [max(r["max_discrepancy"], 1e-18) for r in rows]
    ax.semilogy(range(len(rows)), disc, "o", ms=4)
    ax.set_xlabel("report row (t, p, m, n)")
    ax.set_ylabel("max relative discrepancy")
    ax.axhline(1e-11, color="k", lw=1, ls="--")
    fig.tight_layout()
    _save(fig, path)


def char_figure(rows: list[dict], path) -> None:
    fig, ax = plt.subplots(figsize=(7.5, 4.0))
    labels = [f"{r['characteristic']}({r['param']})" if r["param"] is not None else r["characteristic"] for r in rows]
    ax.bar(range(len(rows)), [r["value"] for r in rows])
    ax.set_xticks(range(len(rows)), labels, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("characteristic value")
    fig.tight_layout()
    _save(fig, path)
