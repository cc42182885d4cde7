"""Pipeline orchestration: execute a RunConfig, collect a RunRecord.

Commands run sequentially and share one Representation instance, so sphere
scans and certificates computed by early steps are reused by later ones.  A
falsified property (failing certificate verdict, near-zero margin) is a
successful run with a negative finding; only operational failures are
recorded as errors.
"""

from __future__ import annotations

import datetime
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import RunConfig, emit_config
from .dimension import (
    box_dimension,
    critical_exponent,
    least_angle_estimate,
    limit_points_array,
    ps_measure,
    shadow_ratio,
)
from .errors import AnosovLabError, BallTooLarge
from .hyperconvexity import convergence_profile, hyperconvexity_scan
from .representation import (
    Representation,
    certify_anosov,
    limit_set_sample,
)
from .words import BoundaryRay, sphere

DEFAULT_CERT_RADIUS = 8


def word_text(letters) -> str:
    """Dot-separated letter indices, the CSV encoding of a word or ray."""
    return ".".join(str(int(l)) for l in letters)


@dataclass
class StepRecord:
    command: str
    params: dict
    status: str = "ok"
    error: str | None = None
    error_kind: str | None = None
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (headers, rows)


@dataclass
class RunRecord:
    config_text: str
    config_hash: str
    seed: int
    label: str
    tool_version: str
    started: str
    finished: str = ""
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(s.status == "error" for s in self.steps)

    def budget_failed(self) -> bool:
        return any(s.error_kind == "BallTooLarge" for s in self.steps)


class _Context:
    def __init__(self, config: RunConfig, rep: Representation):
        self.config = config
        self.rep = rep
        self.seed = config.seed
        self.budget = config.budgets.max_ball

    def ensure_certified(self, level: int, radius: int = DEFAULT_CERT_RADIUS):
        if level == self.rep.dim:
            return None
        cert = self.rep.certificates.get(level)
        if cert is None or cert.radius < min(radius, DEFAULT_CERT_RADIUS):
            cert = certify_anosov(self.rep, level, radius, budget=self.budget)
        return cert


def run(config: RunConfig) -> RunRecord:
    """Execute every pipeline step; errors are recorded, not raised."""
    text = emit_config(config)
    record = RunRecord(
        config_text=text,
        config_hash=hashlib.sha256(text.encode()).hexdigest(),
        seed=config.seed,
        label=config.label,
        tool_version=__version__,
        started=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    rep = config.build_representation()
    ctx = _Context(config, rep)
    for step in config.pipeline:
        rec = StepRecord(command=step.command, params=dict(step.params))
        runner = _RUNNERS[step.command]
        try:
            runner(ctx, rec, dict(step.params))
        except AnosovLabError as exc:
            rec.status = "error"
            rec.error = str(exc)
            rec.error_kind = type(exc).__name__
        record.steps.append(rec)
    record.finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return record


def _run_certify(ctx: _Context, rec: StepRecord, params: dict):
    cert = certify_anosov(
        ctx.rep, params["p"], params["radius"], budget=ctx.budget
    )
    rows = [
        (k, repr(g), repr(math.log(g))) for k, g in cert.per_radius_worst_gap
    ]
    rec.tables["certificate"] = (("radius", "worst_gap", "log_worst_gap"), rows)
    rec.summary = {
        "p": cert.p,
        "radius": cert.radius,
        "fitted_mu": cert.fitted_mu,
        "fitted_c": cert.fitted_c,
        "r_squared": cert.r_squared,
        "verdict": "pass" if cert.verdict else "fail",
    }


def _run_exponent(ctx: _Context, rec: StepRecord, params: dict):
    ctx.ensure_certified(1, params["radius"])
    est = critical_exponent(
        ctx.rep, params["radius"], n_bins=params["bins"], budget=ctx.budget
    )
    rows = [
        (repr(float(t)), int(c), repr(float(np.log(c))))
        for t, c in zip(est.t_bins, est.counts)
    ]
    rec.tables["exponent"] = (("t_bin", "count", "log_count"), rows)
    rec.summary = {
        "h": est.h,
        "h_series": est.h_series,
        "confidence": est.confidence,
        "method": est.method,
        "window_lo": est.window[0],
        "window_hi": est.window[1],
    }


def _run_dimension(ctx: _Context, rec: StepRecord, params: dict):
    cert = ctx.ensure_certified(1)
    sample = limit_set_sample(
        ctx.rep, 1, params["points"], params["depth"],
        ctx.seed + params["seed_offset"], cert=cert,
    )
    pts = limit_points_array(sample)
    err = max(bp.error_bound for bp in sample)
    est = box_dimension(pts, params["scales"], max_point_error=err)
    rows = [(repr(float(e)), int(c)) for e, c in zip(est.scales, est.counts)]
    rec.tables["dimension"] = (("epsilon", "net_count"), rows)
    rec.summary = {
        "slope": est.slope,
        "stderr": est.stderr,
        "points": len(sample),
        "max_point_error": err,
        "note": "box (net) dimension: upper proxy for Hausdorff dimension",
    }


def _run_hyperconvex_scan(ctx: _Context, rec: StepRecord, params: dict):
    if params["triples"] > ctx.config.budgets.max_triples:
        raise BallTooLarge(
            f"requested {params['triples']} triples exceeds the budget of "
            f"{ctx.config.budgets.max_triples}"
        )
    p, q, r = params["p"], params["q"], params["r"]
    for level in sorted({1, p, q, ctx.rep.dim - r}):
        ctx.ensure_certified(level, params["cert_radius"])
    report = hyperconvexity_scan(
        ctx.rep, p, q, r, params["triples"], params["depth"], ctx.seed,
        separation_floor=params["separation_floor"],
    )
    rows = [
        (
            t,
            repr(float(report.margins[t])),
            "|".join(word_text(report.pool[i].letters) for i in report.triples[t]),
        )
        for t in range(report.triples_tested)
    ]
    rec.tables["scan"] = (("triple_id", "margin", "witness_words"), rows)
    rec.summary = {
        "p": p, "q": q, "r": r,
        "triples": report.triples_tested,
        "worst_margin": report.worst_margin,
        "separation_floor": report.separation_floor,
        "witness_words": "|".join(
            word_text(ray.letters) for ray in report.witness
        ) if report.witness else "",
    }


def _run_convergence_profile(ctx: _Context, rec: StepRecord, params: dict):
    p, q, r = params["p"], params["q"], params["r"]
    for level in sorted({p, q, r}):
        ctx.ensure_certified(level, params["cert_radius"])
    steps = params["steps"]
    depth_needed = max(steps, ctx.rep.certificates[r].depth_for(1e-6))
    if params["ray"]:
        letters = tuple(int(t) for t in params["ray"].split("."))
        ray = BoundaryRay.periodic(ctx.rep.alphabet, letters, depth_needed)
    else:
        from .words import sample_boundary_rays

        ray = sample_boundary_rays(ctx.rep.automaton(), 1, depth_needed, ctx.seed)[0]
    profile = convergence_profile(
        ctx.rep, p, q, r, ray, list(range(1, steps + 1)), ctx.seed
    )
    rows = [(i, repr(float(res))) for i, res in profile.steps]
    rec.tables["profile"] = (("step", "residual"), rows)
    rec.summary = {
        "p": p, "q": q, "r": r,
        "fitted_rate": profile.fitted_rate,
        "fitted_const": profile.fitted_const,
        "final_residual": profile.steps[-1][1],
        "ray": word_text(ray.letters[:steps]),
    }


def _run_shadow_check(ctx: _Context, rec: StepRecord, params: dict):
    cert = ctx.ensure_certified(1, params["radius"])
    s = params["s"]
    if s < 0:
        s = critical_exponent(ctx.rep, params["radius"], budget=ctx.budget).h
    measure = ps_measure(ctx.rep, s, params["radius"], budget=ctx.budget)
    sample = limit_set_sample(
        ctx.rep, 1, params["sample_points"], params["sample_depth"],
        ctx.seed, cert=cert,
    )
    angle = least_angle_estimate(
        ctx.rep, params["angle_window"], params["angle_count"], ctx.seed
    )
    rows = []
    violations = 0
    alphabet = ctx.rep.alphabet
    for k in range(1, params["eta_max"] + 1):
        for eta in sphere(alphabet, k):
            ratio, lower, upper = shadow_ratio(
                ctx.rep, eta, measure, sample, delta_hat=angle.delta
            )
            if not lower <= ratio <= upper:
                violations += 1
            rows.append(
                (
                    word_text(eta.letters),
                    repr(float(ratio)),
                    repr(float(lower)),
                    repr(float(upper)),
                )
            )
    rec.tables["shadow"] = (("eta", "ratio", "lower", "upper"), rows)
    rec.summary = {
        "s": s,
        "delta_hat": angle.delta,
        "eta_count": len(rows),
        "bracket_violations": violations,
        "radius": params["radius"],
    }


def _run_boundary_export(ctx: _Context, rec: StepRecord, params: dict):
    cert = ctx.ensure_certified(params["p"], params["cert_radius"])
    sample = limit_set_sample(
        ctx.rep, params["p"], params["points"], params["depth"], ctx.seed, cert=cert,
    )
    d = ctx.rep.dim
    p = params["p"]
    headers = ("ray",) + tuple(
        f"coord_{i}" for i in range(d * p)
    )
    rows = [
        (word_text(bp.ray.letters),)
        + tuple(repr(float(v)) for v in bp.subspace.frame.T.ravel())
        for bp in sample
    ]
    rec.tables["boundary"] = (headers, rows)
    rec.summary = {
        "p": p,
        "points": len(sample),
        "depth": params["depth"],
        "error_bound": sample[0].error_bound if sample else 0.0,
    }


_RUNNERS = {
    "certify": _run_certify,
    "exponent": _run_exponent,
    "dimension": _run_dimension,
    "hyperconvex-scan": _run_hyperconvex_scan,
    "convergence-profile": _run_convergence_profile,
    "shadow-check": _run_shadow_check,
    "boundary-export": _run_boundary_export,
}
