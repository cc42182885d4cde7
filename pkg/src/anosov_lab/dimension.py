"""Critical exponents, box dimension, Patterson-Sullivan style measures.

Box (net) dimension stands in for Hausdorff dimension throughout: upper box
dimension dominates Hausdorff dimension in general, and for the self-similar
desk-scale examples treated here the two agree within the stated tolerances.
Every report produced from these estimates repeats that caveat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyShadow, NoGap, ScaleRangeEmpty, WindowTooShort
from .linalg import TOL_GAP, projective_point, projective_sin_distance, singular_values
from .representation import (
    DEFAULT_BALL_BUDGET,
    BoundaryPoint,
    Representation,
    evaluate,
)
from .util import fit_line, logsumexp
from .words import Word


def poincare_partial(
    rep: Representation, s: float, R: int, budget: int = DEFAULT_BALL_BUDGET
) -> float:
    """Sum over the ball of radius R of (sigma_2/sigma_1)^s, exactly.

    Stabilized through log-sum-exp; the identity contributes 1.
    """
    if s < 0:
        raise ValueError("exponent must be non-negative")
    scan = rep.sphere_scan(R, budget)
    logs = np.concatenate([s * scan.log_gaps(k, 1) for k in range(R + 1)])
    return float(math.exp(logsumexp(logs)))


@dataclass
class ExponentEstimate:
    """Critical exponent from orbit counting, cross-checked by the series.

    `h` is the counting-regression value (primary); `h_series` is the
    exponent where per-radius increments of the partial Poincare series flip
    from growth to decay.  `confidence` is the 1.96-sigma half width of the
    counting slope.
    """

    h: float
    method: str
    window: tuple[int, int]
    confidence: float
    h_series: float
    t_window: tuple[float, float]
    t_bins: np.ndarray
    counts: np.ndarray


def critical_exponent(
    rep: Representation,
    R: int,
    n_bins: int = 12,
    budget: int = DEFAULT_BALL_BUDGET,
) -> ExponentEstimate:
    """Estimate the critical exponent of the first-root Dirichlet series.

    Counting form: regress log #{gamma in ball(R) : -log gap(gamma) <= t}
    against t.  The window [t_lo, t_hi] is delimited by the sphere minima of
    -log gap at radii R/2 and R, where truncation cannot yet bite.
    """
    scan = rep.sphere_scan(R, budget)
    neg_log_gaps = [-scan.log_gaps(k, 1) for k in range(R + 1)]
    k_lo = max(1, math.ceil(R / 2))
    t_lo = float(np.min(neg_log_gaps[k_lo]))
    t_hi = float(np.min(neg_log_gaps[R]))
    if not np.isfinite(t_hi) or t_hi - t_lo < 1e-9:
        raise WindowTooShort(
            f"gap window [{t_lo:.3g}, {t_hi:.3g}] is degenerate; no exponential decay"
        )
    all_vals = np.sort(np.concatenate(neg_log_gaps))
    bins = np.linspace(t_lo, t_hi, n_bins)
    counts = np.searchsorted(all_vals, bins, side="right")
    usable = counts > 0
    if int(np.sum(usable)) < 4:
        raise WindowTooShort(f"only {int(np.sum(usable))} usable t-bins")
    slope, _, _, stderr = fit_line(bins[usable], np.log(counts[usable]))
    h_series = _series_transition(neg_log_gaps, k_lo, R)
    return ExponentEstimate(
        h=float(max(slope, 0.0)),
        method="counting-regression",
        window=(k_lo, R),
        confidence=float(1.96 * stderr),
        h_series=h_series,
        t_window=(t_lo, t_hi),
        t_bins=bins[usable],
        counts=counts[usable],
    )


def _series_transition(neg_log_gaps, k_lo: int, R: int) -> float:
    """Bisect for the exponent where per-radius series increments stall."""
    ks = np.arange(k_lo, R + 1, dtype=float)

    def increment_slope(s: float) -> float:
        log_terms = [logsumexp(-s * neg_log_gaps[int(k)]) for k in ks]
        slope, _, _, _ = fit_line(ks, log_terms)
        return slope

    lo, hi = 0.0, 1.0
    for _ in range(60):
        if increment_slope(hi) < 0.0:
            break
        hi *= 2.0
        if hi > 1e6:
            return math.inf
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if increment_slope(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class DimensionEstimate:
    """Greedy net counts at dyadic scales and the fitted log-log slope.

    The slope is an (upper) box-dimension estimate; it bounds the Hausdorff
    dimension from above and is the desk-scale stand-in for it.
    """

    scales: list[float]
    counts: list[int]
    slope: float
    stderr: float


def box_dimension(
    points, scale_count: int, max_point_error: float = 0.0
) -> DimensionEstimate:
    """Greedy epsilon-net counting on projective points (rows, unit norm).

    Scales run dyadically from the sample diameter down to at most
    4 * max_point_error, so position errors never masquerade as structure.
    Nets are greedy in input order, hence deterministic; successive dyadic
    nets are provably monotone.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 100:
        raise ValueError("need at least 100 projective points (as rows)")
    if scale_count < 2:
        raise ValueError("need at least two scales")
    # 2-approximation of the diameter, deterministic
    d0 = projective_sin_distance(pts[0], pts)
    far = int(np.argmax(d0))
    diam = float(max(np.max(d0), np.max(projective_sin_distance(pts[far], pts))))
    if diam == 0.0:
        return DimensionEstimate(scales=[0.0], counts=[1], slope=0.0, stderr=0.0)
    floor = 4.0 * max_point_error
    scales = [diam / 2.0**j for j in range(scale_count)]
    scales = [e for e in scales if e >= floor]
    if len(scales) < 2:
        raise ScaleRangeEmpty(
            f"point error {max_point_error:.3e} leaves {len(scales)} scales "
            f"above the floor {floor:.3e}"
        )
    counts = [_greedy_net_count(pts, e) for e in scales]
    slope, _, _, stderr = fit_line(
        np.log(1.0 / np.asarray(scales)), np.log(counts)
    )
    return DimensionEstimate(
        scales=scales, counts=counts, slope=float(max(slope, 0.0)), stderr=float(stderr)
    )


def limit_points_array(sample) -> np.ndarray:
    """Stack level-1 boundary points into an (N, d) array of unit rows."""
    return np.array([bp.vector for bp in sample])


def _greedy_net_count(pts: np.ndarray, eps: float) -> int:
    net = np.empty((0, pts.shape[1]))
    for v in pts:
        if net.shape[0] == 0:
            net = v[None, :]
            continue
        dots = np.clip(np.abs(net @ v), 0.0, 1.0)
        if np.all(np.sqrt(1.0 - dots * dots) > eps):
            net = np.vstack([net, v])
    return net.shape[0]


@dataclass
class PSMeasure:
    """Finite-radius Patterson-Sullivan style measure.

    Atoms sit at the top Cartan directions of all non-identity ball words;
    the weight of gamma is proportional to gap(gamma)^s.  Fully
    deterministic given the radius.
    """

    s: float
    radius: int
    atoms: np.ndarray
    weights: np.ndarray
    word_lengths: np.ndarray
    skipped: int

    @property
    def size(self) -> int:
        return self.atoms.shape[0]


def ps_measure(
    rep: Representation, s: float, R: int, budget: int = DEFAULT_BALL_BUDGET
) -> PSMeasure:
    """Normalized atomic measure at the Cartan attractors of ball(R) \\ {e}.

    Words without an index-1 gap contribute no atom; their count is reported
    in `skipped`.
    """
    scan = rep.sphere_scan(R, budget)
    atom_blocks = []
    logw_blocks = []
    len_blocks = []
    skipped = 0
    for k in range(1, R + 1):
        lg = scan.log_gaps(k, 1)
        ok = lg < math.log(1.0 - TOL_GAP)
        skipped += int(np.sum(~ok))
        atom_blocks.append(scan.atoms[k][ok])
        logw_blocks.append(s * lg[ok])
        len_blocks.append(np.full(int(np.sum(ok)), k))
    logw = np.concatenate(logw_blocks)
    if logw.size == 0:
        raise NoGap("no word in the ball has an index-1 gap")
    log_z = logsumexp(logw)
    return PSMeasure(
        s=s,
        radius=R,
        atoms=np.concatenate(atom_blocks),
        weights=np.exp(logw - log_z),
        word_lengths=np.concatenate(len_blocks),
        skipped=skipped,
    )


def shadow_ratio(
    rep: Representation,
    eta: Word,
    measure: PSMeasure,
    limit_sample: list[BoundaryPoint],
    delta_hat: float,
) -> tuple[float, float, float]:
    """Measure ratio of the translated thickened cone type, with the
    two-sided singular-value bracket.

    Returns (ratio, lower, upper) where
      ratio = mu(eta . X(eta)) / mu(X(eta)),
      lower = (sigma_d/sigma_1)^s (rho(eta)),
      upper = (4/delta_hat^2) (sigma_2/sigma_1)^s (rho(eta)),
    and X(eta) collects the measure atoms within delta_hat/2 of the sampled
    limit points of the cone at infinity of eta.
    """
    if len(eta) < 1:
        raise ValueError("eta must have length at least 1")
    if delta_hat <= 0:
        raise ValueError("delta_hat must be positive")
    alphabet = rep.alphabet
    last = eta.letters[-1]
    forbidden = alphabet.inverse(last)
    cone_pts = np.array(
        [bp.vector for bp in limit_sample if bp.ray.letters[0] != forbidden]
    )
    if cone_pts.size == 0:
        raise EmptyShadow("no sampled limit points in the cone of eta")
    radius = delta_hat / 2.0

    def members(points: np.ndarray) -> np.ndarray:
        out = np.zeros(points.shape[0], dtype=bool)
        chunk = 8192
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            dist = projective_sin_distance(block, cone_pts)
            out[start:start + chunk] = dist.min(axis=1) <= radius
        return out

    in_base = members(measure.atoms)
    mu_base = float(np.sum(measure.weights[in_base]))
    g_inv = evaluate(rep, eta.inverse(alphabet)).mat
    moved = measure.atoms @ g_inv.T
    moved /= np.linalg.norm(moved, axis=1)[:, None]
    in_shift = members(moved)
    mu_shift = float(np.sum(measure.weights[in_shift]))
    if not np.any(in_base) or not np.any(in_shift):
        raise EmptyShadow(
            f"shadow of {eta!r} holds no atoms at radius {radius:.3g}"
        )
    sig = singular_values(evaluate(rep, eta).mat)
    lower = float((sig[-1] / sig[0]) ** measure.s)
    upper = float((4.0 / delta_hat**2) * (sig[1] / sig[0]) ** measure.s)
    return mu_shift / mu_base, lower, upper


@dataclass
class LeastAngleEstimate:
    """Sampled least angle; delta = 0 with nogap set means no pair had a
    well-defined attractor (e.g. the trivial representation)."""

    delta: float
    nogap: bool
    pairs_tested: int


def least_angle_estimate(
    rep: Representation, L: int, n_geodesics: int, seed: int
) -> LeastAngleEstimate:
    """Minimum of sin angle(U_1(rho(alpha_k)), U_{d-1}(rho(alpha_{-m}))).

    Samples biinfinite geodesics through the identity (two rays whose first
    letters differ) and scans k, m in [L, 2L].
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    rng = np.random.default_rng(seed)
    automaton = rep.automaton()
    alphabet = rep.alphabet
    rec = automaton.recurrent_states
    depth = 2 * L
    best = math.inf
    pairs = 0
    for _ in range(n_geodesics):
        fwd = _walk(automaton, rng, depth, forbidden_first=None)
        bwd = _walk(automaton, rng, depth, forbidden_first=fwd[0])
        u_tops = _attractor_normals(rep, fwd, L, side="top")
        v_lasts = _attractor_normals(rep, bwd, L, side="bottom")
        for u in u_tops:
            for v in v_lasts:
                if u is None or v is None:
                    continue
                pairs += 1
                best = min(best, abs(float(u @ v)))
    if not math.isfinite(best):
        return LeastAngleEstimate(delta=0.0, nogap=True, pairs_tested=pairs)
    return LeastAngleEstimate(delta=best, nogap=False, pairs_tested=pairs)


def _walk(automaton, rng, depth, forbidden_first):
    rec = automaton.recurrent_states
    letters = []
    state = automaton.initial
    for step in range(depth):
        options = [(l, t) for l, t in automaton.successors(state) if t in rec]
        if step == 0 and forbidden_first is not None:
            options = [(l, t) for l, t in options if l != forbidden_first]
        l, state = options[rng.integers(len(options))]
        letters.append(l)
    return letters


def _attractor_normals(rep, letters, L, side):
    """u_1 of the prefix products of length L..2L, or for side='bottom' the
    normal of U_{d-1}, i.e. u_d, read robustly off the inverse-transpose
    product.  None where the relevant gap is missing."""
    d = rep.dim
    if side == "top":
        images = rep.images
    else:
        images = {
            l: rep.images[rep.alphabet.inverse(l)].T for l in rep.alphabet.letters
        }
    m = np.eye(d)
    out = []
    for i, l in enumerate(letters, start=1):
        m = m @ images[l]
        m /= float(np.max(np.abs(m)))
        if i >= L:
            u, s, _ = np.linalg.svd(m)
            ok = s[1] / s[0] <= 1.0 - TOL_GAP
            out.append(projective_point(u[:, 0]) if ok else None)
    return out
