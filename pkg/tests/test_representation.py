import numpy as np
import pytest

from anosov_lab.constructions import (
    compose_irreducible,
    direct_sum,
    schottky_fuchsian,
    trivial_representation,
    veronese_point,
)
from anosov_lab.errors import (
    BallTooLarge,
    NoGapAlongRay,
    NotCertified,
    NotTransverse,
    ValidationError,
)
from anosov_lab.linalg import (
    Subspace,
    apply_matrix,
    gap_ratio,
    projective_sin_distance,
    sin_distance,
    singular_values,
)
from anosov_lab.representation import (
    Representation,
    boundary_point,
    certify_anosov,
    evaluate,
    evaluate_cartan,
    limit_set_sample,
    periodic_boundary_flag,
    stereographic_projection,
)
from anosov_lab.words import BoundaryRay, GeneratorAlphabet, Word, sphere


# --- construction and evaluation ---

def test_representation_validates_inverses():
    bad = {1: np.eye(2), 2: 2 * np.eye(2), 3: np.eye(2), 4: np.eye(2)}
    with pytest.raises(ValidationError):
        Representation(GeneratorAlphabet(2), bad)


def test_evaluate_empty_word(schottky3):
    m, log_scale = evaluate(schottky3, Word(()))
    assert np.allclose(m, np.eye(2))
    assert log_scale == 0.0


def test_evaluate_single_generator(schottky3):
    m, log_scale = evaluate(schottky3, Word((1,)))
    assert singular_values(m)[0] == pytest.approx(1.0)
    assert log_scale == pytest.approx(np.log(3.0))


def test_evaluate_split_oracle(veronese3):
    rng = np.random.default_rng(17)
    letters = []
    prev = None
    for _ in range(30):
        options = [l for l in veronese3.alphabet.letters
                   if prev is None or l != veronese3.alphabet.inverse(prev)]
        l = int(options[rng.integers(len(options))])
        letters.append(l)
        prev = l
    w = Word(tuple(letters))
    u, v = Word(tuple(letters[:13])), Word(tuple(letters[13:]))
    mw, sw = evaluate(veronese3, w)
    mu_, su = evaluate(veronese3, u)
    mv, sv = evaluate(veronese3, v)
    prod = mu_ @ mv
    top = singular_values(prod)[0]
    assert np.allclose(mw, prod / top, atol=1e-9)
    assert sw == pytest.approx(su + sv + np.log(top), rel=1e-9)


# --- certification ---

def test_certify_veronese_passes(veronese3):
    cert = veronese3.certificates[1]
    assert cert.verdict and cert.fitted_mu > 0.5
    assert cert.r_squared > 0.999


def test_certify_trivial_fails():
    rep = trivial_representation(2, 3)
    cert = certify_anosov(rep, 1, 4)
    assert not cert.verdict
    assert all(g == pytest.approx(1.0) for _, g in cert.per_radius_worst_gap)


def test_certify_repeated_block_fails(repeated_block):
    cert = certify_anosov(repeated_block, 1, 5)
    assert not cert.verdict
    for _, g in cert.per_radius_worst_gap:
        assert g == pytest.approx(1.0, abs=1e-12)


def test_certify_ball_budget():
    rep = schottky_fuchsian(3.0, np.pi / 4)
    with pytest.raises(BallTooLarge):
        certify_anosov(rep, 1, 8, budget=100)


def test_certificate_mirror_symmetry(veronese5):
    # worst gap profiles at p and d-p coincide exactly (inverse bijection)
    scan = veronese5.sphere_scan(6)
    for k in range(1, 7):
        assert scan.worst_gap(k, 4) == scan.worst_gap(k, 1)
        assert scan.worst_gap(k, 3) == scan.worst_gap(k, 2)


# --- boundary points ---

def test_boundary_point_requires_certificate():
    rep = schottky_fuchsian(3.0, np.pi / 4)
    ray = BoundaryRay.periodic(rep.alphabet, (1,), 40)
    with pytest.raises(NotCertified):
        boundary_point(rep, ray, 1)


def test_boundary_point_periodic_eigenline(veronese3):
    ray = BoundaryRay.periodic(veronese3.alphabet, (1,), 60)
    bp = boundary_point(veronese3, ray, 1, tol=1e-8)
    top_eigenline = Subspace.coordinate(3, [0])  # iota_3(a) is diagonal
    assert sin_distance(bp.subspace, top_eigenline) <= 1e-8


def test_boundary_point_cauchy_increments(veronese3):
    # successive prefix attractors contract at the certified product-bound rate
    ray = BoundaryRay.periodic(veronese3.alphabet, (1, 3), 40)
    for i in range(4, 16):
        di = evaluate_cartan(veronese3, ray.prefix(i))
        dj = evaluate_cartan(veronese3, ray.prefix(i + 1))
        letter = veronese3.images[ray.letters[i]]
        s = singular_values(letter)
        bound = (s[0] / s[-1]) * di.gap_ratio(1)
        assert sin_distance(dj.attractor(1), di.attractor(1)) <= bound * (1 + 1e-9)


def test_boundary_point_veronese_oracle(schottky3, veronese4):
    # xi^1 of iota_d rho is the Veronese image of xi^1 of rho
    rays = [
        BoundaryRay.periodic(schottky3.alphabet, pat, 60)
        for pat in [(1,), (3,), (1, 3), (1, 4, 3)]
    ]
    for ray in rays:
        base = boundary_point(schottky3, ray, 1, tol=1e-9)
        lifted = boundary_point(veronese4, ray, 1, tol=1e-9)
        expected = veronese_point(4, base.vector)
        err = projective_sin_distance(lifted.vector, expected)
        assert err <= 4 * (base.error_bound + lifted.error_bound)


def test_boundary_point_nogap_with_override_constants():
    rep = trivial_representation(2, 3)
    ray = BoundaryRay.periodic(rep.alphabet, (1,), 30)
    with pytest.raises(NoGapAlongRay):
        boundary_point(rep, ray, 1, tol=1e-3, constants=(1.0, 0.5))


def test_boundary_frames_match_high_precision_reference(veronese4):
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    letters = (1, 3) * 6
    m = mp.eye(4)
    for l in letters:
        m = m * mp.matrix(veronese4.images[l].tolist())
    U, _, _ = mp.svd_r(m)
    from anosov_lab.representation import _attractor_frames

    for p in (1, 2, 3):
        ref = np.array([[float(U[i, j]) for j in range(p)] for i in range(4)])
        got = _attractor_frames(veronese4, [letters], p)[0]
        overlap = np.linalg.svd(ref.T @ got, compute_uv=False)
        assert np.sqrt(max(0.0, 1.0 - overlap.min() ** 2)) < 1e-7


# --- limit set samples ---

def test_limit_sample_empty(veronese3):
    assert limit_set_sample(veronese3, 1, 0, 10, seed=3) == []


def test_limit_sample_seed_stability(veronese3):
    s1 = limit_set_sample(veronese3, 1, 10, 25, seed=3)
    s2 = limit_set_sample(veronese3, 1, 10, 25, seed=3)
    for a, b in zip(s1, s2):
        assert a.ray.letters == b.ray.letters
        assert np.array_equal(a.subspace.frame, b.subspace.frame)


def test_limit_sample_matches_attractors(veronese3):
    # each sampled point is the Cartan attractor of its own depth-n prefix
    sample = limit_set_sample(veronese3, 1, 20, 25, seed=5)
    for bp in sample:
        dec = evaluate_cartan(veronese3, bp.ray.prefix(bp.depth))
        assert sin_distance(bp.subspace, dec.attractor(1)) < 1e-10
        assert bp.error_bound < 1e-7


def test_limit_sample_uniform_error_bounds(veronese3):
    sample = limit_set_sample(veronese3, 1, 5, 25, seed=5)
    assert len({bp.error_bound for bp in sample}) == 1


# --- equivariance and ray independence ---

def test_boundary_equivariance(veronese3):
    alphabet = veronese3.alphabet
    ray = BoundaryRay.periodic(alphabet, (1, 3), 60)
    base = boundary_point(veronese3, ray, 1, tol=1e-9)
    for gamma_letters in [(3,), (3, 1), (4, 4, 1)]:
        gamma = Word(gamma_letters)
        translated = ray.translate(gamma, alphabet)
        lhs = boundary_point(veronese3, translated, 1, tol=1e-9)
        g, _ = evaluate(veronese3, gamma)
        rhs = apply_matrix(g, base.subspace)
        s = singular_values(g)
        distortion = s[0] / s[-1]
        bound = distortion * base.error_bound + lhs.error_bound
        assert sin_distance(lhs.subspace, rhs) <= 10 * bound


def test_ray_independence_bounded_perturbation(veronese3):
    # appending a bounded tail h to the prefixes moves the attractor by at
    # most |rho(h)| |rho(h)^-1| gap(prefix): the limit along r_n h is xi(x)
    alphabet = veronese3.alphabet
    ray = BoundaryRay.periodic(alphabet, (1, 3, 1, 4), 60)
    bp = boundary_point(veronese3, ray, 1, tol=1e-10)
    n = bp.depth
    for h_letters in [(1,), (3, 1), (4, 3)]:
        if h_letters[0] == alphabet.inverse(ray.letters[n - 1]):
            continue
        perturbed = Word(ray.letters[:n] + h_letters)
        dec = evaluate_cartan(veronese3, perturbed)
        h_mat, _ = evaluate(veronese3, Word(h_letters))
        s = singular_values(h_mat)
        prefix_gap = evaluate_cartan(veronese3, ray.prefix(n)).gap_ratio(1)
        bound = (s[0] / s[-1]) * prefix_gap + bp.error_bound
        assert sin_distance(dec.attractor(1), bp.subspace) <= bound * (1 + 1e-9)


# --- stereographic projection ---

def test_stereographic_injective_on_veronese(veronese4):
    sample = limit_set_sample(veronese4, 1, 200, 30, seed=21)
    z_ray = BoundaryRay.periodic(veronese4.alphabet, (2,), 40)
    z = boundary_point(veronese4, z_ray, 2, tol=1e-7)
    images = []
    for bp in sample:
        images.append(stereographic_projection(veronese4, z, bp).frame[:, 0])
    images = np.array(images)
    dists = projective_sin_distance(images, images)
    np.fill_diagonal(dists, 1.0)
    assert dists.min() > 1e-5


def test_stereographic_same_ray_not_transverse(veronese4):
    ray = BoundaryRay.periodic(veronese4.alphabet, (1,), 50)
    z = boundary_point(veronese4, ray, 2, tol=1e-9)
    x = boundary_point(veronese4, ray, 1, tol=1e-9)
    with pytest.raises(NotTransverse):
        stereographic_projection(veronese4, z, x)


def test_stereographic_block_counterexample_collapses(block_counterexample):
    # x^1 lives in the dominant 2-dim block, whose image in the quotient by
    # z^2 is a single line: all projections coincide
    rep = block_counterexample
    sample = limit_set_sample(rep, 1, 50, 30, seed=4)
    z_ray = BoundaryRay.periodic(rep.alphabet, (2,), 40)
    zf = None
    from anosov_lab.representation import BoundaryPoint, _attractor_frames

    frame = _attractor_frames(rep, [z_ray.letters[:20]], 2)[0]
    z = BoundaryPoint(ray=z_ray, p=2, subspace=Subspace(frame),
                      error_bound=1e-9, depth=20)
    images = []
    for bp in sample:
        images.append(stereographic_projection(rep, z, bp).frame[:, 0])
    images = np.array(images)
    dists = projective_sin_distance(images, images)
    np.fill_diagonal(dists, 0.0)
    assert dists.max() < 1e-8


# --- periodic eigenflag helper ---

def test_periodic_flag_matches_boundary_point(veronese4):
    flag = periodic_boundary_flag(veronese4, (1, 3), 2)
    assert flag is not None
    ray = BoundaryRay.periodic(veronese4.alphabet, (1, 3), 40)
    bp = boundary_point(veronese4, ray, 2, tol=1e-6)
    assert sin_distance(flag, bp.subspace) <= 2 * bp.error_bound + 1e-9
