"""Transversality margins over boundary triples and convergence profiles.

A (p, q, r)-margin of a triple of boundary rays is the smallest singular
value of the stacked frames of xi^p(x), xi^q(y) and xi^{d-r}(z): zero means
the sum fails to be direct, i.e. hyperconvexity fails at that triple.  Scans
sample many separated triples from a seeded ray pool; the worst witness is
kept so failures can be replayed in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriple, EmptyIntersection, RankOverflow
from .linalg import (
    Subspace,
    direct_sum_margin,
    projective_sin_distance,
    sin_distance,
    subspace_intersection,
)
from .representation import (
    BoundaryPoint,
    Representation,
    _attractor_frames,
    _frame_plan,
    _require_certificate,
    boundary_point,
    certificate_from_constants,
)
from .util import fit_line
from .words import BoundaryRay, continue_ray, sample_boundary_rays

SEPARATION_FLOOR = 0.05
MARGIN_RESOLUTION = 1e-7


def _levels(rep: Representation, p: int, q: int, r: int) -> tuple[int, int, int]:
    d = rep.dim
    if p + q > r:
        raise ValueError(f"need p + q <= r, got ({p}, {q}, {r})")
    if r > d - 1:
        raise ValueError(f"r = {r} must be at most d - 1 = {d - 1}")
    return p, q, d - r


def triple_margin(
    rep: Representation,
    p: int,
    q: int,
    r: int,
    x: BoundaryRay,
    y: BoundaryRay,
    z: BoundaryRay,
    tol: float = MARGIN_RESOLUTION,
    separation_floor: float = SEPARATION_FLOOR,
    constants: dict | None = None,
) -> float:
    """direct_sum_margin(xi^p(x), xi^q(y), xi^{d-r}(z)) for one triple.

    Requires passing certificates for indices p, q, d-r and 1 (the level-1
    points measure boundary separation), or explicit (c, mu) constants per
    level in `constants`.  Margins below `tol` should be read as numerically
    zero: the boundary points themselves carry errors of that size.
    """
    p, q, dr = _levels(rep, p, q, r)
    constants = constants or {}
    rays = (x, y, z)
    for i in range(3):
        for j in range(i + 1, 3):
            if rays[i].letters == rays[j].letters:
                raise DegenerateTriple(f"rays {i} and {j} coincide")
    ones = [
        boundary_point(rep, ray, 1, tol, constants=constants.get(1)) for ray in rays
    ]
    for i in range(3):
        for j in range(i + 1, 3):
            sep = projective_sin_distance(ones[i].vector, ones[j].vector)
            if sep < separation_floor:
                raise DegenerateTriple(
                    f"rays {i} and {j} separated by {sep:.3e} < {separation_floor}"
                )
    xp = boundary_point(rep, x, p, tol, constants=constants.get(p))
    yq = boundary_point(rep, y, q, tol, constants=constants.get(q))
    zr = boundary_point(rep, z, dr, tol, constants=constants.get(dr))
    return direct_sum_margin([xp.subspace, yq.subspace, zr.subspace])


@dataclass
class TripleMarginReport:
    """Scan summary; the witness reproduces worst_margin on re-evaluation."""

    p: int
    q: int
    r: int
    triples_tested: int
    worst_margin: float
    witness: tuple[BoundaryRay, BoundaryRay, BoundaryRay] | None
    separation_floor: float
    margins: np.ndarray
    triples: list[tuple[int, int, int]]
    pool: list[BoundaryRay]


def hyperconvexity_scan(
    rep: Representation,
    p: int,
    q: int,
    r: int,
    n_triples: int,
    depth: int,
    seed: int,
    separation_floor: float = SEPARATION_FLOOR,
    pool_size: int | None = None,
    constants: dict | None = None,
) -> TripleMarginReport:
    """Sample separated boundary triples and report the worst margin.

    Rays come from a seeded pool whose boundary points are computed once;
    triples are index triples into the pool, rejected while any pair of
    level-1 points sits closer than the separation floor.  `constants` may
    map a level to explicit (c, mu) decay constants, standing in for a
    certificate at that level.
    """
    p, q, dr = _levels(rep, p, q, r)
    constants = constants or {}

    def level_cert(level):
        if level in constants:
            return certificate_from_constants(rep, level, *constants[level])
        return _require_certificate(rep, level)

    for level in {1, p, q, dr}:
        level_cert(level)
    if n_triples == 0:
        return TripleMarginReport(
            p=p, q=q, r=r, triples_tested=0, worst_margin=1.0, witness=None,
            separation_floor=separation_floor, margins=np.empty(0),
            triples=[], pool=[],
        )
    if pool_size is None:
        pool_size = max(24, int(np.ceil((6 * n_triples) ** (1 / 3))) + 8)
    rng = np.random.default_rng(seed)
    pool = sample_boundary_rays(rep.automaton(), pool_size, depth, seed)
    frames = {}
    for level in sorted({1, p, q, dr}):
        cert = level_cert(level)
        n_level, _, _ = _frame_plan(rep, level, MARGIN_RESOLUTION, cert)
        n_level = min(n_level, depth)
        frames[level] = _attractor_frames(
            rep, [ray.letters[:n_level] for ray in pool], level
        )
    points = np.array([f[:, 0] for f in frames[1]])
    sep = projective_sin_distance(points, points)

    triples: list[tuple[int, int, int]] = []
    attempts = 0
    max_attempts = 200 * n_triples
    while len(triples) < n_triples and attempts < max_attempts:
        attempts += 1
        i, j, k = (int(v) for v in rng.integers(pool_size, size=3))
        if len({i, j, k}) < 3:
            continue
        if min(sep[i, j], sep[i, k], sep[j, k]) < separation_floor:
            continue
        triples.append((i, j, k))
    if len(triples) < n_triples:
        raise DegenerateTriple(
            f"only {len(triples)} separated triples found after {attempts} draws; "
            "raise the pool size or lower the separation floor"
        )

    cols = p + q + dr
    d = rep.dim
    stacked = np.empty((n_triples, d, cols))
    for t, (i, j, k) in enumerate(triples):
        stacked[t, :, :p] = frames[p][i]
        stacked[t, :, p:p + q] = frames[q][j]
        stacked[t, :, p + q:] = frames[dr][k]
    margins = np.linalg.svd(stacked, compute_uv=False)[:, -1]
    margins = np.minimum(margins, 1.0)
    worst = int(np.argmin(margins))
    wi, wj, wk = triples[worst]
    return TripleMarginReport(
        p=p, q=q, r=r,
        triples_tested=n_triples,
        worst_margin=float(margins[worst]),
        witness=(pool[wi], pool[wj], pool[wk]),
        separation_floor=separation_floor,
        margins=margins,
        triples=triples,
        pool=pool,
    )


@dataclass
class ConvergenceProfile:
    """Residuals d(xi^p(w_i) + xi^q(y_i), xi^r(x)) along a ray, with the
    exponential fit over the last half of the steps."""

    steps: list[tuple[int, float]]
    fitted_rate: float
    fitted_const: float


def convergence_profile(
    rep: Representation,
    p: int,
    q: int,
    r: int,
    x_ray: BoundaryRay,
    depth_list,
    seed: int,
    tol: float = 1e-6,
) -> ConvergenceProfile:
    """Probe the pair-convergence property along one ray.

    At each step i two random distinct continuations of the length-i prefix
    are drawn (so both stay in the cone of the prefix) and the directed
    distance of the span of their boundary points to xi^r(x) is recorded.
    """
    d = rep.dim
    if r > d - 1 or p + q > r:
        raise ValueError(f"bad indices ({p}, {q}, {r}) for dimension {d}")
    for level in {p, q, r}:
        _require_certificate(rep, level)
    rng = np.random.default_rng(seed)
    automaton = rep.automaton()
    target = None
    if x_ray.pattern is not None:
        from .representation import periodic_boundary_flag

        target = periodic_boundary_flag(rep, x_ray.pattern, r)
    if target is None:
        target = boundary_point(rep, x_ray, r, tol).subspace
    tail = max(
        rep.certificates[p].depth_for(tol),
        rep.certificates[q].depth_for(tol),
        4,
    )
    steps = []
    for i in depth_list:
        prefix = x_ray.letters[:i]
        if len(prefix) < i:
            raise ValueError(f"ray depth {x_ray.depth} < requested step {i}")
        w = continue_ray(automaton, prefix, tail, rng)
        y = continue_ray(automaton, prefix, tail, rng)
        while y.letters == w.letters:
            y = continue_ray(automaton, prefix, tail, rng)
        # evaluated at the full continuation depth: the points must see the
        # branch beyond the shared prefix, not just their first letters
        wp = _attractor_frames(rep, [w.letters], p)[0]
        yq = _attractor_frames(rep, [y.letters], q)[0]
        span = Subspace.span(np.hstack([wp, yq]))
        steps.append((int(i), sin_distance(span, target)))
    half = [sv for sv in steps if sv[0] >= steps[len(steps) // 2][0]]
    xs = np.array([i for i, _ in half], dtype=float)
    ys = np.log(np.maximum([v for _, v in half], 1e-16))
    slope, intercept, _, _ = fit_line(xs, ys)
    return ConvergenceProfile(
        steps=steps,
        fitted_rate=float(-slope),
        fitted_const=float(np.exp(intercept)),
    )


def property_h_margin(
    rep: Representation,
    x: BoundaryRay,
    y: BoundaryRay,
    z: BoundaryRay,
    p: int,
    q_dim: int,
    s: int,
    tol: float = MARGIN_RESOLUTION,
    intersection_tol: float = 1e-6,
) -> float:
    """Margin of the sum xi^p(x) + (xi^p(z) n xi^q_dim(y)) + xi^s(y).

    The middle intersection is computed with `subspace_intersection`; its
    rank must equal the generic value max(p + q_dim - d, 0), otherwise
    EmptyIntersection reports the observed ranks.
    """
    d = rep.dim
    for a, b in ((x, y), (x, z), (y, z)):
        if a.letters == b.letters:
            raise DegenerateTriple("rays must be pairwise distinct")
    xp = boundary_point(rep, x, p, tol).subspace
    zp = boundary_point(rep, z, p, tol).subspace
    if q_dim == d:
        yq = Subspace(np.eye(d))
    else:
        yq = boundary_point(rep, y, q_dim, tol).subspace
    mid = subspace_intersection(zp, yq, intersection_tol)
    expected = max(p + q_dim - d, 0)
    if mid.rank != expected:
        raise EmptyIntersection(
            "intersection z^p n y^q has unexpected rank",
            ranks={"p": p, "q_dim": q_dim, "observed": mid.rank, "expected": expected},
        )
    ys = boundary_point(rep, y, s, tol).subspace
    if p + mid.rank + s > d:
        raise RankOverflow(
            f"sum ranks {p} + {mid.rank} + {s} exceed ambient dim {d}"
        )
    return direct_sum_margin([xp, mid, ys])
