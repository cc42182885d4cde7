import io
import itertools

import numpy as np
import pytest

from anosov_lab.errors import ParseError, UnknownLetter, ValidationError
from anosov_lab.words import (
    INITIAL_STATE,
    BoundaryRay,
    GeneratorAlphabet,
    Word,
    ball_size,
    build_geodesic_automaton,
    cone_type,
    in_cone,
    load_automaton,
    nested_pair,
    reduce,
    sample_boundary_rays,
    sphere,
    sphere_letters,
    sphere_size,
)

F2 = GeneratorAlphabet(2)
A, AINV, B, BINV = 1, 2, 3, 4


# --- reduction ---

def test_reduce_cancellation():
    assert reduce(F2, [A, AINV]).letters == ()
    assert reduce(F2, [A, B, BINV, A]).letters == (A, A)


def test_reduce_already_reduced():
    w = (A, B, A, BINV)
    assert reduce(F2, w).letters == w


def test_reduce_idempotent_on_random_sequences():
    rng = np.random.default_rng(4)
    for _ in range(200):
        raw = rng.integers(1, 5, size=rng.integers(0, 20))
        once = reduce(F2, raw)
        assert reduce(F2, once.letters) == once
        assert once.is_reduced(F2)


def test_reduce_unknown_letter():
    with pytest.raises(UnknownLetter):
        reduce(F2, [1, 7])


def test_word_inverse_and_concat():
    w = Word((A, B))
    assert w.inverse(F2).letters == (BINV, AINV)
    assert w.concat(w.inverse(F2), F2).letters == ()


# --- cone types ---

def test_cone_type_identity_word():
    assert cone_type(F2, Word(())) == INITIAL_STATE


def test_cone_type_last_letter():
    assert cone_type(F2, Word((A, B))) == cone_type(F2, Word((B,)))


def test_f2_has_exactly_five_cone_types():
    # oracle: membership signatures |gamma.eta| == |gamma| + |eta| on ball(4)
    ball = [w for k in range(5) for w in sphere(F2, k)]
    signatures = {}
    for gamma in ball:
        sig = tuple(
            len(gamma.concat(eta, F2)) == len(gamma) + len(eta) for eta in ball
        )
        signatures.setdefault(sig, set()).add(cone_type(F2, gamma))
    assert len(signatures) == 5
    # each membership class corresponds to exactly one automaton state
    for states in signatures.values():
        assert len(states) == 1
    # and the predicate agrees with the state's membership test
    for gamma in ball:
        state = cone_type(F2, gamma)
        for eta in ball:
            expected = len(gamma.concat(eta, F2)) == len(gamma) + len(eta)
            assert in_cone(F2, state, eta) == expected


# --- automaton ---

def test_automaton_shape():
    aut = build_geodesic_automaton(F2)
    assert len(aut.states) == 5
    assert aut.out_degree(INITIAL_STATE) == 4
    for l in F2.letters:
        assert aut.out_degree(str(l)) == 3


def test_automaton_recurrent_part():
    aut = build_geodesic_automaton(F2)
    assert aut.recurrent_states == frozenset(str(l) for l in F2.letters)
    sub = aut.recurrent_subautomaton()
    assert len(sub.states) == 4


def test_automaton_path_counts():
    aut = build_geodesic_automaton(F2)
    for k in range(13):
        assert aut.path_count(k) == sphere_size(F2, k)


def test_f1_automaton():
    f1 = GeneratorAlphabet(1)
    aut = build_geodesic_automaton(f1)
    assert len(aut.states) == 3
    assert aut.recurrent_states == frozenset({"1", "2"})
    assert [aut.path_count(k) for k in range(4)] == [1, 2, 2, 2]


# --- spheres ---

def test_sphere_sizes():
    assert len(list(sphere(F2, 1))) == 4
    assert len(list(sphere(F2, 2))) == 12
    assert ball_size(F2, 3) == 53


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sphere_size_formula(n):
    ab = GeneratorAlphabet(n)
    for k in range(1, 7):
        assert sphere_size(ab, k) == 2 * n * (2 * n - 1) ** (k - 1)
        if k <= 4:
            assert len(list(sphere(ab, k))) == sphere_size(ab, k)


def test_sphere_lexicographic_and_reduced():
    words = [w.letters for w in sphere(F2, 3)]
    assert words == sorted(words)
    for w in words:
        assert reduce(F2, w).letters == w


def test_sphere_letters_matches_iterator():
    arr = sphere_letters(F2, 3)
    listed = np.array([w.letters for w in sphere(F2, 3)], dtype=np.int8)
    assert np.array_equal(arr, listed)


# --- rays ---

def test_rays_seed_stability():
    aut = build_geodesic_automaton(F2)
    r1 = sample_boundary_rays(aut, 5, 20, seed=7)
    r2 = sample_boundary_rays(aut, 5, 20, seed=7)
    assert [r.letters for r in r1] == [r.letters for r in r2]


def test_rays_are_geodesic_and_distinct():
    aut = build_geodesic_automaton(F2)
    rays = sample_boundary_rays(aut, 100, 30, seed=7)
    seen = set()
    for ray in rays:
        assert Word(ray.letters).is_reduced(F2)
        seen.add(ray.letters)
    assert len(seen) == 100


def test_periodic_ray():
    ray = BoundaryRay.periodic(F2, (A,), 10)
    assert ray.letters == (A,) * 10
    assert ray.pattern == (A,)
    with pytest.raises(ValidationError):
        BoundaryRay.periodic(F2, (A, AINV), 10)  # not reduced
    with pytest.raises(ValidationError):
        BoundaryRay.periodic(F2, (A, B, AINV), 10)  # not cyclically reduced


# --- nesting ---

def test_nested_pair_basic():
    aut = build_geodesic_automaton(F2)
    assert nested_pair(aut, "1", "3", 1) == Word((B,))
    assert nested_pair(aut, "1", "2", 1) is None


def test_nested_pair_recurrent_depth_three():
    aut = build_geodesic_automaton(F2)
    for c1 in aut.recurrent_states:
        for c2 in aut.recurrent_states:
            assert nested_pair(aut, c1, c2, 3) is not None


def test_nested_witness_property():
    # beta * C2 subset C1: |beta eta| = |beta| + |eta| for eta in C2
    aut = build_geodesic_automaton(F2)
    rng = np.random.default_rng(12)
    beta = nested_pair(aut, "1", "4", 3)
    assert beta is not None and len(beta) == 3
    count = 0
    for k in range(1, 6):
        for eta in sphere(F2, k):
            if not in_cone(F2, "4", eta):
                continue
            if count >= 50:
                break
            if rng.random() < 0.3:
                count += 1
                assert len(beta.concat(eta, F2)) == len(beta) + len(eta)
    assert count == 50


# --- automaton files ---

F2_FILE = """
alphabet n=2
state e
state 1
state 2
state 3
state 4
initial e
edge e 1 1
edge e 2 2
edge e 3 3
edge e 4 4
edge 1 1 1
edge 1 3 3
edge 1 4 4
edge 2 2 2
edge 2 3 3
edge 2 4 4
edge 3 1 1
edge 3 2 2
edge 3 3 3
edge 4 1 1
edge 4 2 2
edge 4 4 4
"""


def test_load_roundtrip_equals_builtin():
    loaded = load_automaton(io.StringIO(F2_FILE))
    assert loaded == build_geodesic_automaton(F2)


def test_load_duplicate_edge():
    bad = F2_FILE + "edge 1 1 3\n"
    with pytest.raises(ValidationError):
        load_automaton(io.StringIO(bad))


def test_load_missing_initial():
    text = "alphabet n=1\nstate s\nedge s 1 s\n"
    with pytest.raises(ValidationError):
        load_automaton(io.StringIO(text))


def test_load_unknown_directive():
    with pytest.raises(ParseError):
        load_automaton(io.StringIO("alphabet n=1\nwibble x\n"))


def test_load_bad_letter_index():
    text = "alphabet n=1\nstate s\ninitial s\nedge s 5 s\n"
    with pytest.raises(ValidationError):
        load_automaton(io.StringIO(text))


def test_load_user_automaton_validation_only():
    # a small deterministic non-free automaton loads and exposes structure;
    # its geodesic property is the supplier's responsibility
    text = """
alphabet n=2
state p
state q
state r
initial p
edge p 1 q
edge q 3 r
edge r 2 q
edge q 1 r
"""
    aut = load_automaton(io.StringIO(text))
    assert len(aut.states) == 3
    assert aut.recurrent_states == frozenset({"q", "r"})
    rays = sample_boundary_rays(aut, 3, 8, seed=1)
    assert all(len(r.letters) == 8 for r in rays)
