"""Representations of free groups, gap certification and boundary maps.

A representation assigns an invertible matrix to every generator letter.
Word evaluations are carried as a unit-scale matrix plus an additive log
scale so that products of hundreds of letters never overflow.  Certification
sweeps every word of the ball exhaustively (batched SVDs per sphere);
boundary points are Cartan attractors along rays, stopped once the certified
geometric tail bound drops below the requested tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import (
    BallTooLarge,
    DimensionMismatch,
    IndexOutOfRange,
    NoGapAlongRay,
    NotCertified,
    NotTransverse,
    ValidationError,
)
from .linalg import Subspace, cartan
from .util import fit_line
from .words import (
    BoundaryRay,
    GeneratorAlphabet,
    GeodesicAutomaton,
    Word,
    build_geodesic_automaton,
)

DEFAULT_BALL_BUDGET = 2_000_000


class ScaledMatrix(NamedTuple):
    """Matrix with unit top singular value plus an additive log scale."""

    mat: np.ndarray
    log_scale: float


class Representation:
    """Generator-indexed matrix assignments with log-scaled evaluation."""

    def __init__(self, alphabet: GeneratorAlphabet, images: dict[int, np.ndarray],
                 label: str = ""):
        self.alphabet = alphabet
        self.label = label
        self.images = {}
        dims = set()
        for l in alphabet.letters:
            if l not in images:
                raise ValidationError(f"missing image for letter {l}")
            m = np.asarray(images[l], dtype=float)
            dims.add(m.shape)
            self.images[l] = m
        if len(dims) != 1:
            raise ValidationError(f"inconsistent image shapes: {sorted(dims)}")
        self.dim = self.images[1].shape[0]
        for l in alphabet.letters:
            prod = self.images[l] @ self.images[alphabet.inverse(l)]
            if not np.allclose(prod, np.eye(self.dim), atol=1e-10 * max(1.0, _absmax(prod))):
                raise ValidationError(
                    f"image of letter {l} times image of its inverse is not the identity"
                )
        self._automaton: GeodesicAutomaton | None = None
        self._scan: SphereScan | None = None
        self.certificates: dict[int, "AnosovCertificate"] = {}

    @classmethod
    def from_generators(cls, mats, label: str = "") -> "Representation":
        """Build from one matrix per free generator; inverses are computed."""
        mats = [np.asarray(m, dtype=float) for m in mats]
        alphabet = GeneratorAlphabet(len(mats))
        images = {}
        for i, m in enumerate(mats, start=1):
            images[2 * i - 1] = m
            images[2 * i] = np.linalg.inv(m)
        return cls(alphabet, images, label=label)

    @property
    def n_generators(self) -> int:
        return self.alphabet.n

    def generator(self, i: int) -> np.ndarray:
        return self.images[self.alphabet.generator_letter(i)]

    def automaton(self) -> GeodesicAutomaton:
        if self._automaton is None:
            self._automaton = build_geodesic_automaton(self.alphabet)
        return self._automaton

    def letter_distortion(self) -> float:
        """max over letters of ||rho(l)|| * ||rho(l)^-1||."""
        worst = 1.0
        for l in self.alphabet.letters:
            n, ninv = linalg.operator_norms(self.images[l])
            worst = max(worst, n * ninv)
        return worst

    def sphere_scan(self, R: int, budget: int = DEFAULT_BALL_BUDGET) -> "SphereScan":
        if self._scan is None:
            self._scan = SphereScan(self)
        self._scan.ensure(R, budget)
        return self._scan

    def __repr__(self):
        return f"Representation({self.label or 'unnamed'}, dim={self.dim}, n={self.alphabet.n})"


def _absmax(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def evaluate(rep: Representation, w: Word) -> ScaledMatrix:
    """Evaluate the word, returning a unit-top-sigma matrix and a log scale."""
    d = rep.dim
    m = np.eye(d)
    log_scale = 0.0
    for l in w:
        m = m @ rep.images[int(l)]
        top = _absmax(m)
        m /= top
        log_scale += math.log(top)
    s1 = np.linalg.svd(m, compute_uv=False)[0]
    return ScaledMatrix(m / s1, log_scale + math.log(s1))


def evaluate_cartan(rep: Representation, w: Word) -> linalg.CartanDecomposition:
    m, log_scale = evaluate(rep, w)
    return cartan(m, log_scale=log_scale)


class SphereScan:
    """Exhaustive per-sphere singular data of a representation.

    For each radius k the scan stores the whole sphere's word letters, log
    singular values (true scale) and top singular directions, all in the
    lexicographic word order.  Expansion walks the geodesic automaton with
    batched matrix products; matrices are re-normalized per step so scales
    never overflow.
    """

    def __init__(self, rep: Representation):
        self.rep = rep
        self.automaton = rep.automaton()
        self._state_ids = {s: i for i, s in enumerate(self.automaton.states)}
        self.words: list[np.ndarray] = []
        self.log_sigma: list[np.ndarray] = []
        self.atoms: list[np.ndarray] = []
        self._frontier = None
        self.radius = -1

    def ensure(self, R: int, budget: int = DEFAULT_BALL_BUDGET):
        total = sum(self.automaton.path_count(k) for k in range(R + 1))
        if total > budget:
            raise BallTooLarge(
                f"|ball({R})| = {total} exceeds the budget of {budget} words"
            )
        while self.radius < R:
            self._expand()

    def _expand(self):
        d = self.rep.dim
        if self.radius < 0:
            words = np.zeros((1, 0), dtype=np.int8)
            mats = np.eye(d)[None, :, :]
            logs = np.zeros(1)
            states = np.array([self._state_ids[self.automaton.initial]])
            self._store(words, mats, logs)
            self._frontier = (words, mats, logs, states)
            self.radius = 0
            return
        words, mats, logs, states = self._frontier
        blocks = []
        for letter in self.automaton.alphabet.letters:
            img = self.rep.images[letter]
            targets = np.full(len(self._state_ids), -1)
            for s, i in self._state_ids.items():
                t = self.automaton.step(s, letter)
                if t is not None:
                    targets[i] = self._state_ids[t]
            mask = targets[states] >= 0
            if not np.any(mask):
                continue
            idx = np.nonzero(mask)[0]
            new_words = np.hstack(
                [words[idx], np.full((idx.size, 1), letter, dtype=np.int8)]
            )
            new_mats = mats[idx] @ img
            new_logs = logs[idx]
            new_states = targets[states[idx]]
            blocks.append((idx, letter, new_words, new_mats, new_logs, new_states))
        parent = np.concatenate([b[0] for b in blocks])
        letter_col = np.concatenate(
            [np.full(b[0].size, b[1], dtype=np.int8) for b in blocks]
        )
        order = np.lexsort((letter_col, parent))  # lex order: parent then letter
        words = np.concatenate([b[2] for b in blocks])[order]
        mats = np.concatenate([b[3] for b in blocks])[order]
        logs = np.concatenate([b[4] for b in blocks])[order]
        states = np.concatenate([b[5] for b in blocks])[order]
        tops = np.max(np.abs(mats), axis=(1, 2))
        mats = mats / tops[:, None, None]
        logs = logs + np.log(tops)
        self._store(words, mats, logs)
        self._frontier = (words, mats, logs, states)
        self.radius += 1

    def _store(self, words, mats, logs):
        u, s, _ = np.linalg.svd(mats)
        with np.errstate(divide="ignore"):
            log_sigma = np.log(s) + logs[:, None]
        top = u[:, :, 0]
        idx = np.argmax(np.abs(top), axis=1)
        signs = np.sign(top[np.arange(top.shape[0]), idx])
        signs[signs == 0] = 1.0
        self.words.append(words)
        self.log_sigma.append(log_sigma)
        self.atoms.append(top * signs[:, None])

    # --- accessors ---
    #
    # Deep singular values of long products fall below eps * sigma_1 and are
    # meaningless in double precision.  Spheres are closed under inversion
    # and gap_p(g) = gap_{d-p}(g^-1), so every worst-gap profile is read at
    # index min(p, d-p), where the values are well conditioned.

    def log_gaps(self, k: int, p: int) -> np.ndarray:
        """log(sigma_{p+1}/sigma_p) over sphere(k); entries are <= 0 for gaps.

        Reliable for small p only (p = 1 in all estimator paths); worst-gap
        queries should go through `worst_gap`, which mirrors high indices.
        """
        ls = self.log_sigma[k]
        return ls[:, p] - ls[:, p - 1]

    def worst_gap(self, k: int, p: int) -> float:
        q = min(p, self.rep.dim - p)
        return float(np.exp(np.max(self.log_gaps(k, q))))

    def worst_gap_word(self, k: int, p: int) -> Word:
        q = min(p, self.rep.dim - p)
        i = int(np.argmax(self.log_gaps(k, q)))
        w = Word(tuple(int(l) for l in self.words[k][i]))
        if q == p:
            return w
        return w.inverse(self.rep.alphabet)


@dataclass
class AnosovCertificate:
    """Exhaustive worst-gap profile over spheres plus a fitted decay law.

    worst gap at radius k is compared against fitted_c * exp(-fitted_mu * k);
    c_env dominates every observed radius, so tail bounds built from it are
    certified at the scanned scale.
    """

    p: int
    radius: int
    per_radius_worst_gap: list[tuple[int, float]]
    fitted_mu: float
    fitted_c: float
    r_squared: float
    verdict: bool
    mu_min: float
    c_env: float
    letter_distortion: float

    def tail_bound(self, n: int) -> float:
        """Certified bound on d(U_p(rho(alpha_n)), limit) along any ray."""
        if self.fitted_mu <= 0.0:
            return math.inf
        decay = math.exp(-self.fitted_mu)
        return (
            self.letter_distortion
            * self.c_env
            * math.exp(-self.fitted_mu * n)
            / (1.0 - decay)
        )

    def depth_for(self, tol: float) -> int:
        """Smallest prefix depth whose tail bound is below tol."""
        if self.fitted_mu <= 0.0:
            raise NotCertified("certificate has non-positive decay rate")
        decay = math.exp(-self.fitted_mu)
        n = math.log(self.letter_distortion * self.c_env / (tol * (1.0 - decay)))
        return max(1, math.ceil(n / self.fitted_mu))


def certify_anosov(
    rep: Representation,
    p: int,
    R: int,
    mu_min: float = 0.01,
    budget: int = DEFAULT_BALL_BUDGET,
) -> AnosovCertificate:
    """Exhaustively scan all spheres up to R and fit the gap decay law.

    The verdict passes iff the fitted decay rate exceeds mu_min (nats per
    letter) and the worst gap at radius R is below 1.  The fit window is
    [R/2, R]; early radii are dominated by the multiplicative constant.
    """
    if not 1 <= p <= rep.dim - 1:
        raise IndexOutOfRange(f"gap index {p} outside [1, {rep.dim - 1}]")
    if R < 4:
        raise ValueError("certification radius must be at least 4")
    scan = rep.sphere_scan(R, budget)
    per_radius = [(k, scan.worst_gap(k, p)) for k in range(1, R + 1)]
    window = [kg for kg in per_radius if kg[0] >= R / 2]
    ks = np.array([k for k, _ in window], dtype=float)
    ys = np.array([-math.log(g) for _, g in window])
    mu, intercept, r2, _ = fit_line(ks, ys)
    c_fit = math.exp(-intercept)
    if mu > 0.0:
        c_env = max(g * math.exp(mu * k) for k, g in per_radius)
        c_env = max(c_env, 1.0)  # covers the identity at radius 0
    else:
        c_env = math.inf
    cert = AnosovCertificate(
        p=p,
        radius=R,
        per_radius_worst_gap=per_radius,
        fitted_mu=float(mu),
        fitted_c=c_fit,
        r_squared=float(r2),
        verdict=bool(mu > mu_min and per_radius[-1][1] < 1.0),
        mu_min=mu_min,
        c_env=float(c_env),
        letter_distortion=rep.letter_distortion(),
    )
    rep.certificates[p] = cert
    return cert


def _require_certificate(rep: Representation, p: int, cert=None) -> AnosovCertificate:
    cert = cert or rep.certificates.get(p) or rep.certificates.get(rep.dim - p)
    if cert is None:
        raise NotCertified(
            f"no gap certificate for index {p}; run certify_anosov first "
            "or pass explicit constants"
        )
    if not cert.verdict:
        raise NotCertified(f"certificate for index {p} has a failing verdict")
    return cert


# Roundoff growth model for attractor frames computed from double-precision
# products: the top-q subspace of a stored product is corrupted at scale
# eps * sigma_1/sigma_q, i.e. _EPS_MODEL * exp(nu * n) after n letters, where
# nu is the growth rate of log(sigma_1/sigma_q).  Frames at index q above
# d/2 are therefore read off the inverse-transpose product, whose relevant
# index is d - q; depths are capped where tail and roundoff balance.
_EPS_MODEL = 1e-15


def _grading_rate(rep: Representation, q: int, mu: float) -> float:
    """Growth rate nu of log(sigma_1/sigma_q) along rays.

    Sums the certified decay rates of the gaps above q; missing certificates
    fall back to equal weight spacing (rate mu per index).
    """
    nu = 0.0
    for j in range(1, q):
        cert = rep.certificates.get(j) or rep.certificates.get(rep.dim - j)
        nu += cert.fitted_mu if cert is not None and cert.verdict else mu
    return nu


def _frame_plan(
    rep: Representation, p: int, tol: float, cert: AnosovCertificate
) -> tuple[int, float, float]:
    """(depth, error_bound, roundoff rate) for a level-p frame within tol.

    The depth is the smallest n with certified tail below tol, capped at the
    point where the roundoff model overtakes the tail; the reported bound is
    the certified tail plus the modelled roundoff at the chosen depth.
    """
    q = min(p, rep.dim - p)
    mu = cert.fitted_mu
    nu = _grading_rate(rep, q, mu)
    n = cert.depth_for(tol)
    if nu > 0.0:
        kc = cert.letter_distortion * cert.c_env / (1.0 - math.exp(-mu))
        n_cap = max(1, math.floor(math.log(kc / _EPS_MODEL) / (mu + nu)))
        n = min(n, n_cap)
    bound = cert.tail_bound(n) + _EPS_MODEL * math.exp(nu * n)
    return n, bound, nu


@dataclass
class BoundaryPoint:
    """Cartan-attractor approximation of the boundary map along a ray."""

    ray: BoundaryRay
    p: int
    subspace: Subspace
    error_bound: float
    depth: int

    @property
    def vector(self) -> np.ndarray:
        """Unit vector when p = 1."""
        if self.subspace.rank != 1:
            raise DimensionMismatch("boundary point has rank > 1")
        return linalg.projective_point(self.subspace.frame[:, 0])


def certificate_from_constants(
    rep: Representation, p: int, c: float, mu: float
) -> AnosovCertificate:
    """Wrap caller-supplied decay constants as an override certificate.

    Used when the exhaustive certificate is unavailable but the caller
    asserts gap(gamma) <= c exp(-mu |gamma|); bounds built from it are only
    as good as that assertion."""
    return AnosovCertificate(
        p=p, radius=0, per_radius_worst_gap=[], fitted_mu=mu, fitted_c=c,
        r_squared=1.0, verdict=True, mu_min=0.0, c_env=c,
        letter_distortion=rep.letter_distortion(),
    )


def boundary_point(
    rep: Representation,
    ray: BoundaryRay,
    p: int,
    tol: float = 1e-7,
    cert: AnosovCertificate | None = None,
    constants: tuple[float, float] | None = None,
) -> BoundaryPoint:
    """xi^p at the ray's endpoint, certified within tol.

    The prefix depth is the smallest n whose geometric tail bound (built
    from the certificate's decay constants and the letter distortion) drops
    below tol, capped where double-precision roundoff would overtake the
    tail; the reported error bound is the sum of both terms.  `constants` =
    (c, mu) overrides the certificate.
    """
    if constants is not None:
        cert = certificate_from_constants(rep, p, *constants)
    else:
        cert = _require_certificate(rep, p, cert)
    n, bound, _ = _frame_plan(rep, p, tol, cert)
    if n > ray.depth:
        raise ValueError(
            f"ray depth {ray.depth} too shallow: tol {tol} needs depth {n}"
        )
    frame = _attractor_frames(rep, [ray.letters[:n]], p)[0]
    return BoundaryPoint(
        ray=ray,
        p=p,
        subspace=Subspace(frame),
        error_bound=bound,
        depth=n,
    )


def limit_set_sample(
    rep: Representation,
    p: int,
    count: int,
    depth: int,
    seed: int,
    cert: AnosovCertificate | None = None,
) -> list[BoundaryPoint]:
    """Seeded sample of boundary points, all with the same certified bound.

    Rays are uniform random walks on the recurrent automaton; all products
    are evolved in one batched pass.  The requested depth is capped where
    roundoff would overtake the certified tail.
    """
    cert = _require_certificate(rep, p, cert)
    if count == 0:
        return []
    from .words import sample_boundary_rays

    rays = sample_boundary_rays(rep.automaton(), count, depth, seed)
    n, _, nu = _frame_plan(rep, p, cert.tail_bound(depth), cert)
    n = min(n, depth)
    bound = cert.tail_bound(n) + _EPS_MODEL * math.exp(nu * n)
    frames = _attractor_frames(rep, [r.letters[:n] for r in rays], p)
    return [
        BoundaryPoint(ray=r, p=p, subspace=Subspace(f), error_bound=bound, depth=n)
        for r, f in zip(rays, frames)
    ]


def _attractor_frames(rep: Representation, letter_seqs, p: int) -> list[np.ndarray]:
    """Cartan attractor frames U_p of many equal-length words at once.

    Levels above d/2 are read off the inverse-transpose product: U_p(M) is
    the orthocomplement of U_{d-p}(M^-T), and M^-T extends letter by letter
    with the inverse-transpose images, so the relevant singular data always
    sits in the well-conditioned top of a spectrum.
    """
    depths = {len(s) for s in letter_seqs}
    if len(depths) != 1:
        raise ValueError("batched rays must share their depth")
    depth = depths.pop()
    d = rep.dim
    dual = p > d - p
    q = d - p if dual else p
    if dual:
        images = {
            l: rep.images[rep.alphabet.inverse(l)].T for l in rep.alphabet.letters
        }
    else:
        images = rep.images
    letters = np.array(letter_seqs, dtype=np.int8).reshape(len(letter_seqs), depth)
    n = letters.shape[0]
    mats = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    for j in range(depth):
        col = letters[:, j]
        for l in rep.alphabet.letters:
            mask = col == l
            if np.any(mask):
                mats[mask] = mats[mask] @ images[l]
        tops = np.max(np.abs(mats), axis=(1, 2))
        mats /= tops[:, None, None]
    u, s, _ = np.linalg.svd(mats)
    gaps = s[:, q] / s[:, q - 1]
    bad = np.nonzero(gaps > 1.0 - linalg.TOL_GAP)[0]
    if bad.size:
        raise NoGapAlongRay(
            f"{bad.size} rays have no index-{p} gap at depth {depth} "
            f"(first offender: ray {int(bad[0])})"
        )
    frames = []
    for i in range(n):
        f = u[i, :, q:] if dual else u[i, :, :p]
        idx = np.argmax(np.abs(f), axis=0)
        signs = np.sign(f[idx, np.arange(f.shape[1])])
        signs[signs == 0] = 1.0
        frames.append(f * signs)
    return frames


def periodic_boundary_flag(rep: Representation, pattern, p: int) -> Subspace | None:
    """Exact xi^p at the attracting point of a periodic ray, via eigenvectors.

    The boundary flag of the fixed point of gamma is the top eigenflag of
    rho(gamma); one period is a short, well-conditioned product, so this
    avoids the deep-product roundoff entirely.  Returns None when the
    eigenvalues are not real with a clear modulus gap at index p.
    """
    m = np.eye(rep.dim)
    for l in pattern:
        m = m @ rep.images[int(l)]
    vals, vecs = np.linalg.eig(m)
    order = np.argsort(-np.abs(vals))
    vals = vals[order]
    vecs = vecs[:, order]
    if abs(vals[p]) >= abs(vals[p - 1]) * (1.0 - linalg.TOL_GAP):
        return None
    top_vals = vals[:p]
    top_vecs = vecs[:, :p]
    if np.max(np.abs(top_vals.imag)) > 1e-12 * np.max(np.abs(top_vals)):
        return None
    if np.max(np.abs(top_vecs.imag)) > 1e-10:
        return None
    return Subspace.span(top_vecs.real)


def stereographic_projection(
    rep: Representation,
    z: BoundaryPoint,
    x: BoundaryPoint,
    tol: float = 1e-6,
) -> Subspace:
    """Image of the line x^1 in the quotient of R^d by z's subspace.

    The quotient is identified with the orthogonal complement of z's
    subspace via a fixed deterministic basis; the result is a line there.
    """
    if x.subspace.rank != 1:
        raise DimensionMismatch("x must be a level-1 boundary point")
    if x.subspace.ambient_dim != z.subspace.ambient_dim:
        raise DimensionMismatch("x and z live in different dimensions")
    comp = z.subspace.complement()
    coords = comp.frame.T @ x.vector
    margin = float(np.linalg.norm(coords))
    if margin <= tol:
        raise NotTransverse(
            f"line meets the projection center (margin {margin:.3e} <= {tol})"
        )
    return Subspace.line(coords)
