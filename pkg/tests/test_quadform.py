import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maasspart.quadform import (
    Discriminant,
    NotPositiveDefinite,
    QuadForm,
    SearchBoundExhausted,
    atkin_lehner_matrix,
    atkin_lehner_relocate,
    class_number,
    enumerate_reduced,
    exact_divisors,
    gkz_representatives,
    heegner_point,
    reduce_form,
    reduce_with_witness,
    trace_representatives,
)

import frozen


# ------------------------------------------------------------------ reduction


def test_reduce_known_form():
    # [12, 13, 4] has discriminant -23; its reduced class is [2, 1, 3]
    f = QuadForm(12, 13, 4)
    assert f.discriminant() == -23
    assert reduce_form(f) == QuadForm(2, 1, 3)


def test_witness_is_unimodular_and_exact():
    f = QuadForm(36, 49, 17)
    red, (p, q, r, s) = reduce_with_witness(f)
    assert p * s - q * r == 1
    assert f.transform(p, q, r, s) == red


def test_reduce_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        reduce_form(QuadForm(1, 5, 1))
    with pytest.raises(NotPositiveDefinite):
        reduce_form(QuadForm(-1, 0, -1))


def _is_reduced(f):
    return (-f.a < f.b <= f.a <= f.c) and not (f.a == f.c and f.b < 0)


def test_reduce_idempotent_randomized():
    rng = random.Random(20260824)
    checked = 0
    while checked < 20_000:
        a = rng.randint(1, 60)
        b = rng.randint(-120, 120)
        c = rng.randint(1, 60)
        f = QuadForm(a, b, c)
        if not f.is_positive_definite():
            continue
        r = reduce_form(f)
        assert _is_reduced(r)
        assert reduce_form(r) == r
        assert r.discriminant() == f.discriminant()
        checked += 1


@given(
    st.integers(1, 30),
    st.integers(-30, 30),
    st.integers(1, 30),
    st.integers(-5, 5),
    st.integers(-5, 5),
)
@settings(max_examples=300, deadline=None)
def test_reduction_is_class_invariant(a, b, c, k, j):
    f = QuadForm(a, b, c)
    if not f.is_positive_definite():
        return
    # apply translations and the inversion: same SL2 class
    g = f.transform(1, k, 0, 1).transform(0, -1, 1, 0).transform(1, j, 0, 1)
    assert reduce_form(g) == reduce_form(f)


# -------------------------------------------------------------- class numbers


def test_enumerate_reduced_23():
    got = enumerate_reduced(23)
    assert got == [QuadForm(1, 1, 6), QuadForm(2, -1, 3), QuadForm(2, 1, 3)]


@pytest.mark.parametrize(
    "D,h",
    [(23, 3), (47, 5), (71, 7), (95, 8), (3, 1), (4, 1), (167, 11)],
)
def test_known_class_numbers(D, h):
    assert class_number(D) == h


def test_enumerate_rejects_bad_discriminant():
    with pytest.raises(ValueError):
        enumerate_reduced(5)  # -5 = 3 mod 4
    with pytest.raises(ValueError):
        enumerate_reduced(-23)


def test_enumerated_forms_are_primitive_reduced():
    for f in enumerate_reduced(4175):
        assert f.is_primitive()
        assert _is_reduced(f)
        assert f.discriminant() == -4175


# ----------------------------------------------------------------- Discriminant


def test_discriminant_validation():
    Discriminant(23, 1, 6)
    with pytest.raises(ValueError):
        Discriminant(23, 2, 6)  # 4 + 23 not divisible by 24
    with pytest.raises(ValueError):
        Discriminant(23, 1, 4)  # level not squarefree
    with pytest.raises(ValueError):
        Discriminant(-23, 1, 6)


def test_for_partition():
    d = Discriminant.for_partition(2)
    assert (d.D, d.r, d.N) == (47, 1, 6)
    with pytest.raises(ValueError):
        Discriminant.for_partition(0)


# ------------------------------------------------------------------- lifting


def test_gkz_q1_verbatim():
    got = gkz_representatives(Discriminant.for_partition(1))
    assert [(f.a, f.b, f.c) for f in got] == frozen.Q1_FORMS


def test_gkz_q2_verbatim():
    got = gkz_representatives(Discriminant.for_partition(2))
    assert [(f.a, f.b, f.c) for f in got] == frozen.Q2_FORMS


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 10, 17, 25, 33])
def test_gkz_bijection_with_reduced_classes(n):
    disc = Discriminant.for_partition(n)
    reps = gkz_representatives(disc)
    assert len(reps) == class_number(disc.D)
    assert sorted(reduce_form(f) for f in reps) == enumerate_reduced(disc.D)
    for f in reps:
        assert f.a % 6 == 0 and f.b % 12 == 1
        assert f.discriminant() == -disc.D
        assert f.is_primitive()


def test_gkz_search_bound_exhaustion():
    # some classes of discriminant -2399 need representatives beyond the
    # initial search bound; with doubling disabled the search must report it
    disc = Discriminant.for_partition(100)
    with pytest.raises(SearchBoundExhausted):
        gkz_representatives(disc, max_doublings=0)
    assert len(gkz_representatives(disc)) == class_number(disc.D)


def test_trace_representatives_squarefree_unchanged():
    for n in (1, 2, 3, 10):
        disc = Discriminant.for_partition(n)
        assert trace_representatives(disc) == gkz_representatives(disc)


def test_trace_representatives_include_imprimitive_orbits():
    # 24*24 - 1 = 575 = 5^2 * 23: content-5 forms are 5x the primitive
    # classes of discriminant -23
    disc = Discriminant.for_partition(24)
    full = trace_representatives(disc)
    prim = gkz_representatives(disc)
    extra = [f for f in full if f not in prim]
    assert len(full) == len(prim) + class_number(23)
    for f in extra:
        assert math.gcd(f.a, math.gcd(f.b, f.c)) == 5
        assert f.discriminant() == -575
        assert f.a % 6 == 0 and f.b % 12 == 1
        inner = QuadForm(f.a // 5, f.b // 5, f.c // 5)
        assert inner.is_primitive() and inner.discriminant() == -23


def test_trace_representatives_nested_square_divisors():
    # 24*199 - 1 = 4775 = 5^2 * 191
    disc = Discriminant.for_partition(199)
    full = trace_representatives(disc)
    assert len(full) == class_number(4775) + class_number(191)


# -------------------------------------------------------------- Heegner points


def test_heegner_point_is_root():
    f = QuadForm(6, 1, 1)
    pt = heegner_point(f, 128)
    z = pt.z()
    residual = f.a * z * z + f.b * z + f.c
    assert abs(residual) < 1e-35


def test_heegner_point_precision_carried():
    pt = heegner_point(QuadForm(6, 1, 1), 300)
    assert min(pt.z().precision) >= 300


def test_heegner_point_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        heegner_point(QuadForm(1, 5, 1), 64)


# --------------------------------------------------------------- Atkin-Lehner


def test_exact_divisors():
    assert exact_divisors(6) == [1, 2, 3, 6]
    assert exact_divisors(30) == [1, 2, 3, 5, 6, 10, 15, 30]


def test_atkin_lehner_matrix_properties():
    for Q in (2, 3, 6):
        p, q, r, s = atkin_lehner_matrix(Q, 6)
        assert p * s - q * r == Q
        assert r == 6 and s == Q and p % Q == 0
    with pytest.raises(ValueError):
        atkin_lehner_matrix(4, 6)


def test_relocation_moves_up_and_tracks_sign():
    signs = {1: 1, 2: -1, 3: -1, 6: 1}
    pt = heegner_point(QuadForm(36, 49, 17), 128)
    moved = atkin_lehner_relocate(pt, signs, N=6, precision_bits=128)
    assert moved.im >= pt.im
    assert moved.sign in (-1, 1)
    assert moved.source.discriminant() == pt.source.discriminant()
    # relocated real part is translation-normalized
    assert -0.5 <= float(moved.re) < 0.5


def test_relocation_signs_must_form_character():
    pt = heegner_point(QuadForm(6, 1, 1), 64)
    with pytest.raises(ValueError):
        atkin_lehner_relocate(pt, {1: 1, 2: 1, 3: -1, 6: 1}, N=6)
    with pytest.raises(ValueError):
        atkin_lehner_relocate(pt, {1: 1, 2: -1}, N=6)
