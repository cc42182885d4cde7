"""Report emission: CSV tables and SVG figures from a RunRecord.

CSV output is byte-reproducible for identical configs and seeds (floats are
written with repr, i.e. shortest round-trip).  Figures are rendered with
matplotlib to SVG with a fixed hash salt and no creation date, so reruns
differ at most in the renderer's version comment.
"""

from __future__ import annotations

import csv
import json
import math
import os

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .pipeline import RunRecord, StepRecord  # noqa: E402

_SVG_RC = {
    "svg.hashsalt": "anosov-lab",
    "svg.fonttype": "path",
    "figure.figsize": (6.0, 4.5),
    "figure.dpi": 100,
}

_PROXY_NOTE = (
    "box (net) dimension is an upper, desk-scale proxy for Hausdorff dimension"
)


def emit_reports(record: RunRecord, out_dir: str) -> list[str]:
    """Write CSV tables, SVG figures and record.json; return the manifest."""
    os.makedirs(out_dir, exist_ok=True)
    manifest: list[str] = []
    used_names: dict[str, int] = {}

    for step in record.steps:
        for name, (headers, rows) in step.tables.items():
            used_names[name] = used_names.get(name, 0) + 1
            suffix = "" if used_names[name] == 1 else f"_{used_names[name]}"
            csv_name = f"{name}{suffix}.csv"
            _write_csv(os.path.join(out_dir, csv_name), headers, rows)
            manifest.append(csv_name)
            fig_name = f"{name}{suffix}.svg"
            if _render_figure(name, step, headers, rows,
                              os.path.join(out_dir, fig_name), record):
                manifest.append(fig_name)

    meta = {
        "config_hash": record.config_hash,
        "config": record.config_text,
        "label": record.label,
        "seed": record.seed,
        "tool_version": record.tool_version,
        "started": record.started,
        "finished": record.finished,
        "dimension_note": _PROXY_NOTE,
        "files": list(manifest),
        "steps": [
            {
                "command": s.command,
                "params": s.params,
                "status": s.status,
                "error": s.error,
                "error_kind": s.error_kind,
                "summary": s.summary,
            }
            for s in record.steps
        ],
    }
    with open(os.path.join(out_dir, "record.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest.append("record.json")
    return manifest


def _write_csv(path: str, headers, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        writer.writerows(rows)


def _render_figure(name, step: StepRecord, headers, rows, path, record) -> bool:
    renderer = _FIGURES.get(name)
    if renderer is None or not rows:
        return False
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots()
        try:
            renderer(ax, step, rows, record)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return True


def _fig_certificate(ax, step, rows, record):
    ks = np.array([float(r[0]) for r in rows])
    neg_log = np.array([-float(r[2]) for r in rows])
    ax.plot(ks, neg_log, "o", label="worst gap over sphere")
    mu = step.summary.get("fitted_mu")
    c = step.summary.get("fitted_c")
    if mu is not None and c and c > 0:
        ax.plot(ks, mu * ks - math.log(c), "-", label=f"fit: mu={mu:.3f} nats/letter")
    ax.set_xlabel("word length k")
    ax.set_ylabel("-log worst gap ratio")
    ax.set_title(f"gap decay, index p={step.summary.get('p')} ({record.label or 'run'})")
    ax.legend()


def _fig_dimension(ax, step, rows, record):
    eps = np.array([float(r[0]) for r in rows])
    counts = np.array([float(r[1]) for r in rows])
    x = np.log(1.0 / eps)
    y = np.log(counts)
    ax.plot(x, y, "o", label="greedy net counts")
    slope = step.summary.get("slope", 0.0)
    ax.plot(x, y[0] + slope * (x - x[0]), "-", label=f"slope = {slope:.3f}")
    ax.set_xlabel("log 1/epsilon")
    ax.set_ylabel("log N(epsilon)")
    ax.set_title(f"net counts ({_PROXY_NOTE})", fontsize=9)
    ax.legend()


def _fig_profile(ax, step, rows, record):
    ks = np.array([float(r[0]) for r in rows])
    res = np.array([max(float(r[1]), 1e-300) for r in rows])
    ax.semilogy(ks, res, "o-")
    ax.set_xlabel("step i along the ray")
    ax.set_ylabel("residual distance")
    ax.set_title(
        f"pair-convergence profile, rate={step.summary.get('fitted_rate', 0.0):.3f}"
    )


def _fig_boundary(ax, step, rows, record):
    coords = np.array([[float(v) for v in row[1:]] for row in rows])
    d = coords.shape[1]
    chart_ok = np.abs(coords[:, 0]) > 1e-9
    pts = coords[chart_ok]
    xs = pts[:, 1] / pts[:, 0]
    ys = pts[:, 2] / pts[:, 0] if d >= 3 else np.zeros_like(xs)
    ax.plot(xs, ys, ".", markersize=2)
    ax.set_xlabel("x1/x0")
    ax.set_ylabel("x2/x0" if d >= 3 else "0")
    ax.set_title(f"limit set in the affine chart x0 != 0 ({record.label or 'run'})")


_FIGURES = {
    "certificate": _fig_certificate,
    "dimension": _fig_dimension,
    "profile": _fig_profile,
    "boundary": _fig_boundary,
}
