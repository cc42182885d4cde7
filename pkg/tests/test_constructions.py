import itertools

import numpy as np
import pytest

from anosov_lab.constructions import (
    Partition,
    WeightList,
    coherence_check,
    decompose_weights,
    direct_sum,
    exterior_matrix,
    exterior_power,
    irreducible_matrix,
    irreducible_rep,
    perturb,
    schottky_fuchsian,
    sl2_weights,
    symmetric_matrix,
    symmetric_power,
    trivial_representation,
    veronese_point,
)
from anosov_lab.errors import DegenerateAxes, NotAnSl2Module, ValidationError
from anosov_lab.linalg import projective_sin_distance, singular_values
from anosov_lab.representation import evaluate
from anosov_lab.words import Word


def _rand_sl2(rng):
    m = rng.normal(size=(2, 2))
    return m / np.sqrt(abs(np.linalg.det(m)))


# --- schottky ---

def test_schottky_axes_distinct():
    rep = schottky_fuchsian(3.0, np.pi / 4)
    a_plus = np.array([1.0, 0.0])
    w, v = np.linalg.eig(rep.generator(2))
    b_plus = v[:, np.argmax(np.abs(w))].real
    assert projective_sin_distance(a_plus, b_plus / np.linalg.norm(b_plus)) > 0.5


@pytest.mark.parametrize("theta", [np.pi, np.pi / 2, 0.0])
def test_schottky_degenerate_axes(theta):
    with pytest.raises(DegenerateAxes):
        schottky_fuchsian(3.0, theta)


def test_schottky_needs_t_above_one():
    with pytest.raises(ValueError):
        schottky_fuchsian(1.0, np.pi / 4)


# --- irreducible representation ---

def test_irr2_is_identity():
    rng = np.random.default_rng(0)
    g = _rand_sl2(rng)
    assert np.allclose(irreducible_matrix(2, g), g, atol=1e-14)


def test_irr3_diagonal_weights():
    t = 3.0
    assert np.allclose(
        irreducible_matrix(3, np.diag([t, 1 / t])), np.diag([t**2, 1.0, t**-2])
    )


def test_irr5_rotation_is_orthogonal():
    th = 0.83
    r = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    m = irreducible_matrix(5, r)
    assert np.allclose(m.T @ m, np.eye(5), atol=1e-12)


def test_irr_functorial():
    rng = np.random.default_rng(8)
    for d in (3, 4, 5):
        fn = irreducible_rep(d)
        for _ in range(100):
            g, h = _rand_sl2(rng), _rand_sl2(rng)
            lhs = fn(g @ h)
            rhs = fn(g) @ fn(h)
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


# --- exterior powers ---

def test_wedge1_identity():
    rng = np.random.default_rng(1)
    g = rng.normal(size=(4, 4))
    assert np.allclose(exterior_matrix(g, 1), g)


def test_wedge_top_is_determinant():
    rng = np.random.default_rng(2)
    g = rng.normal(size=(4, 4))
    assert exterior_matrix(g, 4).shape == (1, 1)
    assert exterior_matrix(g, 4)[0, 0] == pytest.approx(np.linalg.det(g))


def test_wedge2_top_singular_value_product():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g = rng.normal(size=(4, 4))
        s = singular_values(g)
        s2 = singular_values(exterior_matrix(g, 2))
        assert s2[0] == pytest.approx(s[0] * s[1], rel=1e-9)


def test_wedge_functorial():
    rng = np.random.default_rng(4)
    for _ in range(100):
        g, h = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
        lhs = exterior_matrix(g @ h, 2)
        rhs = exterior_matrix(g, 2) @ exterior_matrix(h, 2)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


# --- symmetric powers ---

def test_sym1_identity():
    rng = np.random.default_rng(5)
    g = rng.normal(size=(3, 3))
    assert np.allclose(symmetric_matrix(g, 1), g)


def test_sym2_diagonal_monomials():
    m = symmetric_matrix(np.diag([2.0, 3.0, 5.0]), 2)
    eigs = np.sort(np.diag(m))
    assert np.allclose(eigs, sorted([4.0, 6.0, 10.0, 9.0, 15.0, 25.0]))
    assert np.allclose(m, np.diag(np.diag(m)))


def test_sym2_orthogonal_stays_orthogonal():
    th = 0.37
    r = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    m = symmetric_matrix(r, 2)
    assert np.allclose(m.T @ m, np.eye(3), atol=1e-12)


def test_sym_functorial():
    rng = np.random.default_rng(6)
    for _ in range(100):
        g, h = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
        lhs = symmetric_matrix(g @ h, 2)
        rhs = symmetric_matrix(g, 2) @ symmetric_matrix(h, 2)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


def test_sym_gap_hypothesis_for_veronese3(veronese3):
    # sigma_1 sigma_2 / sigma_2^2 of the 3-dim rep grows exponentially over
    # ball(8); the weight computation gives exactly exponent 2 per letter on
    # the diagonal words a^k
    scan = veronese3.sphere_scan(8)
    rates = []
    for k in range(1, 9):
        log_ratio = -scan.log_gaps(k, 1)  # log(sigma_1/sigma_2)
        rates.append(np.min(log_ratio))
        word_ak = Word((1,) * k)
        m, log_scale = evaluate(veronese3, word_ak)
        s = singular_values(m)
        assert np.log(s[0] / s[1]) == pytest.approx(2 * k * np.log(3.0), rel=1e-9)
    growth = np.diff(rates)
    assert np.all(growth > 0.0)
    assert rates[-1] > rates[3]


# --- direct sums ---

def test_direct_sum_with_trivial_line(schottky3):
    rep = direct_sum(schottky3, trivial_representation(2, 1))
    assert rep.dim == 3


def test_direct_sum_singular_values_union(schottky3, veronese3):
    rep = direct_sum(veronese3, schottky3)
    rng = np.random.default_rng(7)
    for _ in range(20):
        letters = []
        prev = None
        for _ in range(6):
            options = [l for l in rep.alphabet.letters if prev is None
                       or l != rep.alphabet.inverse(prev)]
            l = options[rng.integers(len(options))]
            letters.append(l)
            prev = l
        w = Word(tuple(letters))
        m, log_s = evaluate(rep, w)
        combined = np.sort(singular_values(m) * np.exp(log_s))
        m3, l3 = evaluate(veronese3, w)
        m2, l2 = evaluate(schottky3, w)
        expected = np.sort(
            np.concatenate(
                [singular_values(m3) * np.exp(l3), singular_values(m2) * np.exp(l2)]
            )
        )
        assert np.allclose(combined, expected, rtol=1e-9)


def test_iota3_plus_iota1_on_diagonal():
    rep3 = trivial_representation(2, 1)
    from anosov_lab.constructions import compose_irreducible

    base = schottky_fuchsian(3.0, np.pi / 4)
    rep = direct_sum(compose_irreducible(3, base), rep3)
    m, log_s = evaluate(rep, Word((1,)))
    full = m * np.exp(log_s)
    assert np.allclose(np.sort(np.diag(full)), sorted([9.0, 1.0, 1 / 9.0, 1.0]))


# --- weights ---

def test_sl2_weights_single_part():
    assert sl2_weights(Partition((4,))).weights == (3, 1, -1, -3)


def test_sl2_weights_wedge2_iota4():
    # wedge^2 iota_4 decomposes as (5, 1): weights 4, 2, 0, 0, -2, -4, and
    # the top three are chi, chi - 2, chi - 4 with chi = p(d - p) = 4
    w = sl2_weights(Partition((5, 1)))
    assert w.weights == (4, 2, 0, 0, -2, -4)
    assert w.weights[:3] == (4, 4 - 2, 4 - 4)
    # cross-check against the pairwise sums of the iota_4 weights
    iota4 = sl2_weights(Partition((4,))).weights
    pair_sums = sorted(
        (iota4[i] + iota4[j] for i, j in itertools.combinations(range(4), 2)),
        reverse=True,
    )
    assert tuple(pair_sums) == w.weights


def test_sl2_weights_5_2():
    assert sl2_weights(Partition((5, 2))).weights == (4, 2, 1, 0, -1, -2, -4)


@pytest.mark.parametrize("t", [2.0, 3.0, 5.0])
def test_weight_consistency_on_diagonal(t):
    diag = np.diag([t, 1.0 / t])
    cases = [
        (irreducible_matrix(4, diag), Partition((4,))),
        (exterior_matrix(irreducible_matrix(4, diag), 2), Partition((5, 1))),
        (symmetric_matrix(irreducible_matrix(3, diag), 2), Partition((5, 1))),
    ]
    for mat, partition in cases:
        expected = np.sort(np.array(sl2_weights(partition).weights) * np.log(t))
        got = np.sort(np.log(singular_values(mat)))
        assert np.allclose(got, expected, rtol=1e-9, atol=1e-9)


def test_decompose_weights_examples():
    assert decompose_weights(WeightList((4, 2, 0, 0, -2, -4))).parts == (5, 1)
    assert decompose_weights(WeightList((0,))).parts == (1,)
    assert decompose_weights(WeightList((1, 0, -1))).parts == (2, 1)


def test_decompose_weights_invalid():
    with pytest.raises(NotAnSl2Module):
        decompose_weights(WeightList((2, -2)))


def _partitions(total, max_part=None):
    if total == 0:
        yield ()
        return
    if max_part is None:
        max_part = total
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def test_decompose_inverts_weights_up_to_total_12():
    for total in range(1, 13):
        for parts in _partitions(total):
            p = Partition(parts)
            assert decompose_weights(sl2_weights(p)) == p


def test_coherence_examples():
    assert coherence_check(Partition((5, 2)), 2) is True
    assert coherence_check(Partition((3, 1)), 2) is False
    assert coherence_check(Partition((5, 1)), 2) is True  # wedge^2 iota_4


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_coherence_single_irreducible_convention(d):
    for k in range(2, d):
        assert coherence_check(Partition((d,)), k) is True
    for k in range(d, d + 3):
        assert coherence_check(Partition((d,)), k) is False


# --- perturbation ---

def test_perturb_zero_is_identity(schottky3):
    rep = perturb(schottky3, 0.0, seed=1)
    for i in (1, 2):
        assert np.array_equal(rep.generator(i), schottky3.generator(i))


def test_perturb_seed_stability(schottky3):
    r1 = perturb(schottky3, 0.01, seed=5)
    r2 = perturb(schottky3, 0.01, seed=5)
    for i in (1, 2):
        assert np.array_equal(r1.generator(i), r2.generator(i))


def test_perturb_inverse_consistency(veronese3):
    rep = perturb(veronese3, 0.05, seed=9)
    for l in rep.alphabet.letters:
        prod = rep.images[l] @ rep.images[rep.alphabet.inverse(l)]
        assert np.allclose(prod, np.eye(rep.dim), atol=1e-12)


# --- veronese point helper ---

def test_veronese_point_unit_norm():
    v = veronese_point(5, [0.6, 0.8])
    assert np.linalg.norm(v) == pytest.approx(1.0)
    # e1 maps to e1
    assert np.allclose(veronese_point(4, [1.0, 0.0]), [1, 0, 0, 0])
