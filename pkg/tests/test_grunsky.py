import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftoda import oracle
from conftoda.errors import DomainError
from conftoda.grunsky import (
    GrunskyTable,
    InverseMap,
    faber,
    faber_of_inverse_pair,
    grunsky_table,
    grunsky_table_of_inverse_pair,
    verify_faber_expansions,
)
from conftoda.series import ComplexSeries

from conftest import MOBIUS, random_pair

Z = ComplexSeries.monomial(1)


def test_identity_table():
    T = grunsky_table(Z, Z, 4)
    for m in range(-4, 5):
        for n in range(-4, 5):
            want = 1 / abs(m) if m != 0 and n == -m else 0.0  # log(1 - zeta/z) fills the mixed block
            assert abs(T(m, n) - want) < 1e-14


def test_joukowski_exterior_map():
    c = 0.2
    T = grunsky_table(Z, ComplexSeries(-1, 1, [c, 0, 1]), 4)
    for k in range(1, 5):
        assert abs(T(k, k) - c**k / k) < 1e-14
    assert abs(T(1, 2)) < 1e-14
    assert abs(T(0, 0)) < 1e-15


def test_mobius_table_frozen(mobius):
    T = grunsky_table(mobius.f, mobius.g, 3)
    assert abs(T(0, 0) - np.log(1.2)) < 1e-14
    assert abs(T(1, 0) - (-0.2)) < 1e-14  # -c/b
    assert abs(T(0, -1) - 0.3) < 1e-14  # a
    assert abs(T(1, -1) - 25 / 36) < 1e-14  # 1/b^2
    assert abs(T(2, -1) - (-5 / 36)) < 1e-14
    for m in range(1, 4):
        for n in range(1, 4):
            assert abs(T(m, n)) < 1e-14  # affine g
            assert abs(T(-m, -n)) < 1e-14  # Mobius f


def test_mobius_table_matches_exact_series(mobius):
    T = grunsky_table(mobius.f, mobius.g, 6)
    E = oracle.mobius_grunsky(MOBIUS, 6)
    assert np.max(np.abs(T.values - E.values)) < 1e-12


def test_inverse_pair_table_frozen(mobius):
    K = grunsky_table_of_inverse_pair(mobius.f, mobius.g, 3)
    assert abs(K(0, 0) + np.log(1.2)) < 1e-14
    assert abs(K(1, -1) - 1.44) < 1e-13  # t_0
    assert abs(K(1, 1)) < 1e-13
    E = oracle.mobius_grunsky_inverse(MOBIUS, 3)
    assert np.max(np.abs(K.values - E.values)) < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_symmetry_before_symmetrization(seed):
    pair = random_pair(seed)
    assert grunsky_table(pair.f, pair.g, 8).asymmetry() < 1e-11
    assert grunsky_table_of_inverse_pair(pair.f, pair.g, 8).asymmetry() < 1e-11


def test_b00_is_log_b(perturbed):
    T = grunsky_table(perturbed.f, perturbed.g, 4)
    assert abs(T(0, 0) - np.log(perturbed.b)) < 1e-13
    assert abs(T(0, 0) + np.log(perturbed.a1)) < 1e-13


def test_order_validation():
    with pytest.raises(DomainError):
        grunsky_table(Z, Z, 0)
    with pytest.raises(DomainError):
        grunsky_table(Z, Z, 64, m=128)


def test_table_json_roundtrip(mobius):
    T = grunsky_table(mobius.f, mobius.g, 3)
    back = GrunskyTable.from_json(T.to_json())
    assert back.order == 3 and np.max(np.abs(back.values - T.values)) == 0


def test_faber_of_affine_exterior_map():
    b, c = 1.2, 0.24
    P = faber(Z, ComplexSeries(0, 1, [c, b]), 3)
    u = ComplexSeries(0, 1, [-c / b, 1 / b])
    assert P.p(1).max_abs_diff(u) < 1e-14
    assert P.p(2).max_abs_diff(ComplexSeries(0, 2, [(c / b) ** 2, -2 * c / b**2, 1 / b**2])) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 3])
def test_faber_of_identity(n):
    P = faber(Z, Z, 3)
    assert P.p(n).max_abs_diff(ComplexSeries.monomial(n)) < 1e-15
    assert P.q(n).max_abs_diff(ComplexSeries.monomial(-n)) < 1e-15


@pytest.mark.parametrize("seed", range(3))
def test_faber_degrees(seed):
    pair = random_pair(seed)
    P = faber(pair.f, pair.g, 5)
    for n in range(1, 6):
        assert P.p(n).degree(1e-14) == n
        assert P.q(n).valuation(1e-14) == -n


@pytest.mark.parametrize(
    "F, G, N, tol",
    [
        (Z, Z, 4, 1e-14),
        (Z, ComplexSeries(-1, 1, [0.2, 0, 1]), 8, 1e-11),
    ],
)
def test_faber_expansion_identities(F, G, N, tol):
    assert max(verify_faber_expansions(F, G, N).values()) <= tol


def test_faber_expansion_identities_mobius(mobius):
    res = verify_faber_expansions(mobius.f, mobius.g, 12)
    assert set(res) == {"log_G", "log_F", "P(G)", "P(F)", "Q(G)", "Q(F)"}
    assert max(res.values()) <= 1e-10


def test_inverse_map_table_agrees_with_inverse_pair(mobius):
    a = grunsky_table(InverseMap(mobius.f), InverseMap(mobius.g), 3)
    b = grunsky_table_of_inverse_pair(mobius.f, mobius.g, 3)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_faber_of_inverse_pair_degrees(mobius):
    P = faber_of_inverse_pair(mobius.f, mobius.g, 3)
    assert P.p(2).degree(1e-14) == 2


@given(st.floats(-0.25, 0.25), st.floats(-0.25, 0.25), st.floats(0.8, 1.3))
def test_mobius_table_symmetry_property(a, c, b):
    pair = oracle.mobius_pair((a, b, c * b))
    assert grunsky_table(pair.f, pair.g, 4).asymmetry() < 1e-11
