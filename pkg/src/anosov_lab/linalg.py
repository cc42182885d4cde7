"""Quantitative linear algebra on R^d.

Singular value decompositions with deterministic tie-breaking, subspaces as
orthonormal frames, sine distances and angles on Grassmannians, Cartan
attractors, gap ratios and transversality margins.  Everything here is a pure
function of its arguments; ratios of singular values are scale invariant, so
matrices that arise from long products are handled as a unit-scale matrix
plus an additive log scale carried separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NoGap,
    RankOverflow,
    SingularInput,
)

# Relative gap below which sigma_p ~ sigma_{p+1} and attractors are refused.
TOL_GAP = 1e-8

# Columns whose singular values differ by less than this (relatively) are
# treated as a degenerate block and reordered deterministically.
_TIE_TOL = 1e-12


def _as_square(g) -> np.ndarray:
    a = np.asarray(g, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SingularInput("matrix has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class Subspace:
    """A p-dimensional subspace of R^d stored as a d x p orthonormal frame."""

    frame: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=float)
        if f.ndim != 2:
            raise DimensionMismatch("frame must be a 2-d array")
        if f.shape[1] > f.shape[0]:
            raise RankOverflow(f"rank {f.shape[1]} exceeds ambient dim {f.shape[0]}")
        if f.shape[1] > 0:
            gram = f.T @ f
            if not np.allclose(gram, np.eye(f.shape[1]), atol=1e-12):
                raise DimensionMismatch("frame columns are not orthonormal")
        f = f.copy()
        f.flags.writeable = False
        object.__setattr__(self, "frame", f)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    @classmethod
    def span(cls, vectors, rank_tol: float = 1e-12) -> "Subspace":
        """Subspace spanned by the columns of `vectors` (orthonormalized)."""
        a = np.asarray(vectors, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return cls(np.zeros((a.shape[0], 0)))
        keep = s > rank_tol * s[0]
        return cls(_canonical_signs(u[:, keep]))

    @classmethod
    def line(cls, v) -> "Subspace":
        v = np.asarray(v, dtype=float).reshape(-1, 1)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise SingularInput("zero vector spans no line")
        return cls(_canonical_signs(v / n))

    @classmethod
    def coordinate(cls, ambient_dim: int, indices) -> "Subspace":
        """Span of the given coordinate axes."""
        f = np.zeros((ambient_dim, len(indices)))
        for j, i in enumerate(indices):
            f[i, j] = 1.0
        return cls(f)

    def complement(self) -> "Subspace":
        """A deterministic orthonormal basis of the orthogonal complement."""
        d, k = self.frame.shape
        if k == 0:
            return Subspace(np.eye(d))
        u, _, _ = np.linalg.svd(self.frame, full_matrices=True)
        return Subspace(_canonical_signs(u[:, k:]))

    def __repr__(self):
        return f"Subspace(ambient={self.ambient_dim}, rank={self.rank})"


def _canonical_signs(frame: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each is positive."""
    if frame.shape[1] == 0:
        return frame
    idx = np.argmax(np.abs(frame), axis=0)
    signs = np.sign(frame[idx, np.arange(frame.shape[1])])
    signs[signs == 0] = 1.0
    return frame * signs


@dataclass(frozen=True, eq=False)
class CartanDecomposition:
    """g = left @ diag(sigma) @ right.T, times exp(log_scale).

    `sigma` is sorted non-increasing; both frames are orthonormal.  The
    additive `log_scale` lets callers decompose huge word products without
    overflowing doubles.
    """

    sigma: np.ndarray
    left: np.ndarray
    right: np.ndarray
    log_scale: float = 0.0

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def log_sigma(self) -> np.ndarray:
        """Logarithms of the true (unscaled) singular values."""
        return np.log(self.sigma) + self.log_scale

    def gap_ratio(self, p: int) -> float:
        if not 1 <= p <= self.dim - 1:
            raise IndexOutOfRange(f"gap index {p} outside [1, {self.dim - 1}]")
        return float(self.sigma[p] / self.sigma[p - 1])

    def attractor(self, p: int, tol_gap: float = TOL_GAP) -> Subspace:
        if self.gap_ratio(p) > 1.0 - tol_gap:
            raise NoGap(
                f"sigma_{p} ~ sigma_{p + 1} (ratio {self.gap_ratio(p):.3e}); "
                "Cartan attractor not well defined"
            )
        return Subspace(self.left[:, :p])

    def reconstruct(self) -> np.ndarray:
        """The unscaled input matrix (log_scale not applied)."""
        return (self.left * self.sigma) @ self.right.T


def cartan(g, log_scale: float = 0.0) -> CartanDecomposition:
    """Singular value decomposition with deterministic tie-breaking.

    Degenerate blocks of equal singular values are reordered so that left
    columns come in decreasing |first component| (then |second|, ...), and
    every left column has its largest-magnitude entry positive.  The paired
    right columns are permuted/flipped along, so reconstruction is exact.
    """
    a = _as_square(g)
    u, s, vh = np.linalg.svd(a)
    if s[0] == 0.0 or s[-1] < 1e-300 * s[0]:
        raise SingularInput(f"matrix is numerically singular (sigma = {s})")
    v = vh.T

    # reorder inside tied blocks
    d = s.shape[0]
    i = 0
    while i < d:
        j = i + 1
        while j < d and (s[i] - s[j]) <= _TIE_TOL * s[0]:
            j += 1
        if j - i > 1:
            block = u[:, i:j]
            order = np.lexsort(-np.abs(block[::-1]))
            u[:, i:j] = block[:, order]
            v[:, i:j] = v[:, i:j][:, order]
        i = j

    # canonical signs, applied to (u_i, v_i) pairs
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(d)])
    signs[signs == 0] = 1.0
    u = u * signs
    v = v * signs

    for arr in (s, u, v):
        arr.flags.writeable = False
    return CartanDecomposition(sigma=s, left=u, right=v, log_scale=float(log_scale))


def singular_values(g) -> np.ndarray:
    return np.linalg.svd(_as_square(g), compute_uv=False)


def gap_ratio(g, p: int) -> float:
    """sigma_{p+1}(g) / sigma_p(g), in (0, 1]."""
    if isinstance(g, CartanDecomposition):
        return g.gap_ratio(p)
    s = singular_values(g)
    if not 1 <= p <= s.shape[0] - 1:
        raise IndexOutOfRange(f"gap index {p} outside [1, {s.shape[0] - 1}]")
    if s[p - 1] == 0.0:
        raise SingularInput("matrix is numerically singular")
    return float(s[p] / s[p - 1])


def cartan_attractor(g, p: int, tol_gap: float = TOL_GAP) -> Subspace:
    """U_p(g): span of the p most-expanded singular directions.

    Raises NoGap when sigma_p ~ sigma_{p+1}, in which case the attractor
    depends on the inner workings of the decomposition and is meaningless.
    """
    dec = g if isinstance(g, CartanDecomposition) else cartan(g)
    return dec.attractor(p, tol_gap=tol_gap)


def _check_same_ambient(P: Subspace, Q: Subspace):
    if P.ambient_dim != Q.ambient_dim:
        raise DimensionMismatch(
            f"ambient dims differ: {P.ambient_dim} vs {Q.ambient_dim}"
        )


def sin_distance(P: Subspace, Q: Subspace) -> float:
    """Hausdorff-type sine distance max_{v in P} min_{w in Q} sin(v, w).

    A metric on each fixed-rank Grassmannian; for rank(P) <= rank(Q) the
    directed version vanishes exactly when P is contained in Q.
    """
    _check_same_ambient(P, Q)
    if P.rank == 0:
        return 0.0
    if Q.rank == 0:
        return 1.0
    resid = P.frame - Q.frame @ (Q.frame.T @ P.frame)
    val = np.linalg.svd(resid, compute_uv=False)[0]
    return float(min(1.0, val))


def min_angle(P: Subspace, Q: Subspace) -> float:
    """Smallest principal angle between P and Q, in [0, pi/2]."""
    _check_same_ambient(P, Q)
    if P.rank == 0 or Q.rank == 0:
        return np.pi / 2
    angles = scipy.linalg.subspace_angles(np.asarray(P.frame), np.asarray(Q.frame))
    return float(np.min(angles))


def direct_sum_margin(parts) -> float:
    """Smallest singular value of the concatenated frames.

    0 exactly when the sum of the parts fails to be direct, 1 exactly when
    the parts are pairwise orthogonal.
    """
    parts = list(parts)
    if not parts:
        return 1.0
    d = parts[0].ambient_dim
    for p in parts[1:]:
        if p.ambient_dim != d:
            raise DimensionMismatch("summands live in different ambient dims")
    total = sum(p.rank for p in parts)
    if total > d:
        raise RankOverflow(f"total rank {total} exceeds ambient dim {d}")
    if total == 0:
        return 1.0
    stacked = np.hstack([p.frame for p in parts])
    val = np.linalg.svd(stacked, compute_uv=False)[-1]
    return float(min(1.0, val))


def subspace_intersection(A: Subspace, B: Subspace, tol: float = 1e-6) -> Subspace:
    """Span of the common directions of A and B.

    Keeps the principal directions whose principal-angle sine is at most
    `tol`; exact containments are recovered exactly.  May return a rank-0
    subspace.
    """
    _check_same_ambient(A, B)
    if A.rank == 0 or B.rank == 0:
        return Subspace(np.zeros((A.ambient_dim, 0)))
    u, _, _ = np.linalg.svd(A.frame.T @ B.frame)
    dirs = A.frame @ u
    resid = dirs - B.frame @ (B.frame.T @ dirs)
    sines = np.linalg.norm(resid, axis=0)
    keep = dirs[:, sines <= tol]
    return Subspace(_canonical_signs(keep))


def apply_matrix(g, P: Subspace) -> Subspace:
    """Image subspace g(P), re-orthonormalized."""
    a = _as_square(g)
    if a.shape[0] != P.ambient_dim:
        raise DimensionMismatch("matrix and subspace dims differ")
    return Subspace.span(a @ P.frame)


def operator_norms(g) -> tuple[float, float]:
    """(||g||, ||g^-1||) from the extreme singular values."""
    s = singular_values(g)
    if s[-1] == 0.0:
        raise SingularInput("matrix is numerically singular")
    return float(s[0]), float(1.0 / s[-1])


# --- projective points (rank-1 subspaces as unit vectors) ---

def projective_point(v) -> np.ndarray:
    """Unit vector with canonical sign, representing the line through v."""
    v = np.asarray(v, dtype=float).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise SingularInput("zero vector is not a projective point")
    v = v / n
    i = int(np.argmax(np.abs(v)))
    return v if v[i] > 0 else -v


def projective_sin_distance(u, v):
    """sin distance between lines spanned by unit vectors.

    1-d inputs give a scalar; 2-d inputs (points as rows) give the full
    pairwise distance matrix.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim == 1 and v.ndim == 1:
        dot = min(1.0, abs(float(u @ v)))
        return float(np.sqrt(max(0.0, 1.0 - dot * dot)))
    u2 = u[None, :] if u.ndim == 1 else u
    v2 = v[None, :] if v.ndim == 1 else v
    dots = np.clip(np.abs(u2 @ v2.T), 0.0, 1.0)
    out = np.sqrt(np.maximum(0.0, 1.0 - dots * dots))
    return out[0] if u.ndim == 1 else (out[:, 0] if v.ndim == 1 else out)
