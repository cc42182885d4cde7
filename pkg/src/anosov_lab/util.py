"""Small shared numerics: least squares lines and stable log-sums."""

from __future__ import annotations

import numpy as np


def fit_line(x, y) -> tuple[float, float, float, float]:
    """Least squares y ~ slope * x + intercept.

    Returns (slope, intercept, r_squared, stderr_slope).  With fewer than
    three points the error fields degenerate to r^2 = 1, stderr = 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = float(xm @ xm)
    if sxx == 0.0:
        raise ValueError("degenerate fit: all x values coincide")
    slope = float(xm @ ym) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(ym @ ym)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if x.size > 2:
        stderr = np.sqrt(ss_res / (x.size - 2) / sxx)
    else:
        stderr = 0.0
    return slope, intercept, float(r2), float(stderr)


def logsumexp(values) -> float:
    """log(sum(exp(values))) without overflow; -inf for an empty input."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return -np.inf
    m = float(np.max(v))
    if not np.isfinite(m):
        return m
    return m + float(np.log(np.sum(np.exp(v - m))))
