"""Example representations and SL2 functor calculus.

Ping-pong Fuchsian generators, the d-dimensional irreducible action of SL2
on binary forms, exterior and symmetric powers, direct sums, weight
arithmetic for reducible SL2 modules, coherence tests and multiplicative
perturbations.

Bases are always scaled so the constructions are norm compatible: rotations
map to orthogonal matrices, hence singular values of images are exactly the
predicted products/monomials of the input singular values.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateAxes, NotAnSl2Module, ValidationError
from .linalg import projective_sin_distance
from .representation import Representation
from .words import GeneratorAlphabet


def schottky_fuchsian(t: float, theta: float, label: str | None = None) -> Representation:
    """Ping-pong pair in SL2: a = diag(t, 1/t), b = R_theta a R_theta^-1.

    Raises DegenerateAxes when the projective fixed-point sets of a and b
    coincide (theta a multiple of pi/2), detected by eigenvector comparison.
    """
    if t <= 1.0:
        raise ValueError("ping-pong translation parameter needs t > 1")
    a = np.array([[t, 0.0], [0.0, 1.0 / t]])
    r = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    b = r @ a @ r.T
    axes_a = _eigen_axes(a)
    axes_b = _eigen_axes(b)
    if all(
        min(projective_sin_distance(u, v) for v in axes_b) < 1e-9 for u in axes_a
    ):
        raise DegenerateAxes(
            f"fixed axes of the two generators coincide (theta = {theta})"
        )
    if label is None:
        label = f"schottky({t},{theta})"
    return Representation.from_generators([a, b], label=label)


def _eigen_axes(m: np.ndarray) -> list[np.ndarray]:
    _, vecs = np.linalg.eig(m)
    return [vecs[:, i].real / np.linalg.norm(vecs[:, i].real) for i in range(m.shape[0])]


def trivial_representation(n_generators: int, dim: int, label: str = "trivial") -> Representation:
    """Every generator goes to the identity."""
    return Representation.from_generators(
        [np.eye(dim) for _ in range(n_generators)], label=label
    )


# --- the irreducible representation of SL2 on binary forms ---

def irreducible_matrix(d: int, g) -> np.ndarray:
    """Image of a 2x2 matrix under the d-dimensional irreducible action.

    Basis: x^{m-j} y^j scaled by sqrt(binom(m, j)) with m = d - 1, which
    makes rotations orthogonal.  Functorial: iota(gh) = iota(g) iota(h).
    """
    if d < 2:
        raise ValueError("irreducible action needs dimension >= 2")
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2):
        raise ValueError("input must be 2x2")
    m = d - 1
    a, b = g[0, 0], g[0, 1]
    c, e = g[1, 0], g[1, 1]
    out = np.zeros((d, d))
    binom = [math.comb(m, i) for i in range(d)]
    for j in range(d):
        # (a x + c y)^(m-j) * (b x + e y)^j, coefficients over x^(m-i) y^i
        p1 = np.array([math.comb(m - j, i) * a ** (m - j - i) * c**i for i in range(m - j + 1)])
        p2 = np.array([math.comb(j, i) * b ** (j - i) * e**i for i in range(j + 1)])
        coeffs = np.convolve(p1, p2)
        out[:, j] = coeffs * math.sqrt(binom[j]) / np.sqrt(binom)
    return out


def irreducible_rep(d: int):
    """The functor itself: a callable sending 2x2 matrices to d x d ones."""
    return lambda g: irreducible_matrix(d, g)


def compose_irreducible(d: int, rep: Representation, label: str | None = None) -> Representation:
    """iota_d applied generator-wise to a 2-dimensional representation."""
    if rep.dim != 2:
        raise ValidationError("iota_d composes with 2-dimensional representations")
    mats = [irreducible_matrix(d, rep.generator(i + 1)) for i in range(rep.n_generators)]
    return Representation.from_generators(
        mats, label=label or f"irr({d}) . {rep.label}"
    )


def veronese_point(d: int, v) -> np.ndarray:
    """Image of the line through v in R^2 under the degree-(d-1) Veronese map."""
    v = np.asarray(v, dtype=float).reshape(2)
    m = d - 1
    w = np.array(
        [math.sqrt(math.comb(m, j)) * v[0] ** (m - j) * v[1] ** j for j in range(d)]
    )
    w /= np.linalg.norm(w)
    i = int(np.argmax(np.abs(w)))
    return w if w[i] > 0 else -w


# --- exterior and symmetric powers ---

def exterior_matrix(g, p: int) -> np.ndarray:
    """p-th compound matrix on the lexicographic wedge basis."""
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if not 1 <= p <= d:
        raise ValueError(f"exterior power index {p} outside [1, {d}]")
    subsets = list(itertools.combinations(range(d), p))
    out = np.empty((len(subsets), len(subsets)))
    for col, J in enumerate(subsets):
        sub = g[:, J]
        for row, I in enumerate(subsets):
            out[row, col] = np.linalg.det(sub[I, :])
    return out


def exterior_power(rep: Representation, p: int, label: str | None = None) -> Representation:
    """Exterior power representation; singular values of images are the
    p-fold products of the input singular values."""
    mats = [exterior_matrix(rep.generator(i + 1), p) for i in range(rep.n_generators)]
    return Representation.from_generators(
        mats, label=label or f"wedge({p}, {rep.label})"
    )


def _multisets(d: int, k: int):
    return list(itertools.combinations_with_replacement(range(d), k))


def _multiset_factorial(alpha) -> float:
    out = 1.0
    for _, mult in Counter(alpha).items():
        out *= math.factorial(mult)
    return out


def symmetric_matrix(g, k: int) -> np.ndarray:
    """k-th symmetric power on the norm-compatible monomial basis."""
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if k < 1:
        raise ValueError("symmetric power index must be >= 1")
    if k == 1:
        return g.copy()
    basis = _multisets(d, k)
    index = {alpha: i for i, alpha in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)))
    norms = np.array([math.sqrt(_multiset_factorial(a)) for a in basis])
    for col, beta in enumerate(basis):
        # product of the linear forms g e_j, j in beta, as a degree-k polynomial
        poly = {(): 1.0}
        for j in beta:
            new = {}
            for mono, coeff in poly.items():
                for i in range(d):
                    gij = g[i, j]
                    if gij == 0.0:
                        continue
                    key = tuple(sorted(mono + (i,)))
                    new[key] = new.get(key, 0.0) + coeff * gij
            poly = new
        for mono, coeff in poly.items():
            row = index[mono]
            out[row, col] = coeff * norms[row] / norms[col]
    return out


def symmetric_power(rep: Representation, k: int, label: str | None = None) -> Representation:
    """Symmetric power representation; for diagonal input the eigenvalues are
    all degree-k monomials in the input eigenvalues."""
    mats = [symmetric_matrix(rep.generator(i + 1), k) for i in range(rep.n_generators)]
    return Representation.from_generators(
        mats, label=label or f"sym({k}, {rep.label})"
    )


def direct_sum(rep1: Representation, rep2: Representation, label: str | None = None) -> Representation:
    """Block-diagonal sum; the singular value multiset is the union."""
    if rep1.n_generators != rep2.n_generators:
        raise ValidationError("direct sum needs representations of the same group")
    mats = [
        scipy.linalg.block_diag(rep1.generator(i + 1), rep2.generator(i + 1))
        for i in range(rep1.n_generators)
    ]
    return Representation.from_generators(
        mats, label=label or f"sum({rep1.label}, {rep2.label})"
    )


# --- weight arithmetic ---

@dataclass(frozen=True)
class Partition:
    """Dimensions of the irreducible factors, sorted non-increasing."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts or any(p < 1 for p in parts):
            raise ValidationError("partition parts must be positive")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValidationError("partition parts must be non-increasing")
        object.__setattr__(self, "parts", parts)

    @property
    def total(self) -> int:
        return sum(self.parts)


@dataclass(frozen=True)
class WeightList:
    """Exponents of the semi-homothecy ratios of a diagonal element."""

    weights: tuple[int, ...]

    def __post_init__(self):
        ws = tuple(sorted((int(w) for w in self.weights), reverse=True))
        if Counter(ws) != Counter(-w for w in ws):
            raise ValidationError("weights of a self-dual module come in +/- pairs")
        object.__setattr__(self, "weights", ws)

    def __len__(self):
        return len(self.weights)


def sl2_weights(partition: Partition) -> WeightList:
    """Weights of the module oplus_i iota_{d_i}: each part d contributes the
    string d-1, d-3, ..., -(d-1)."""
    ws = []
    for d in partition.parts:
        ws.extend(range(d - 1, -d, -2))
    return WeightList(tuple(ws))


def coherence_check(partition: Partition, k: int) -> bool:
    """True iff the top k weight lines live in the leading irreducible factor.

    For reducible modules this is d1 > d2 + 2(k-1).  A single irreducible
    factor is treated with the d2 = 0 convention: coherent exactly while a
    gap of index k exists, i.e. k <= d1 - 1.
    """
    if k < 2:
        raise ValueError("coherence is defined for k >= 2")
    d1 = partition.parts[0]
    if len(partition.parts) == 1:
        return k <= d1 - 1
    return d1 > partition.parts[1] + 2 * (k - 1)


def decompose_weights(weights: WeightList) -> Partition:
    """Greedy peeling of maximal strings {m, m-2, ..., -m}; inverse of
    sl2_weights."""
    remaining = Counter(weights.weights)
    parts = []
    while sum(remaining.values()) > 0:
        m = max(w for w, c in remaining.items() if c > 0)
        for w in range(m, -m - 1, -2):
            if remaining[w] <= 0:
                raise NotAnSl2Module(
                    f"missing weight {w} while peeling the string of {m}"
                )
            remaining[w] -= 1
        parts.append(m + 1)
    return Partition(tuple(sorted(parts, reverse=True)))


def perturb(rep: Representation, epsilon: float, seed: int, label: str | None = None) -> Representation:
    """Multiply each generator image by exp(E) with seeded E in [-eps, eps]^(d x d).

    Multiplicative exponential noise stays in the group; inverse letters are
    rebuilt exactly from the perturbed generators.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    rng = np.random.default_rng(seed)
    d = rep.dim
    mats = []
    for i in range(rep.n_generators):
        noise = rng.uniform(-epsilon, epsilon, size=(d, d))
        mats.append(rep.generator(i + 1) @ scipy.linalg.expm(noise))
    return Representation.from_generators(
        mats, label=label or f"perturb({epsilon}, {seed}, {rep.label})"
    )
