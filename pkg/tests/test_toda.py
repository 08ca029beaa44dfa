import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftoda import pairspace, toda, welding
from conftoda.errors import DomainError
from conftoda.series import ComplexSeries, mul

from conftest import random_pair

W = ComplexSeries.monomial(1)

small = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


def flowed_strategy(lo=-2, hi=2):
    coeffs = st.lists(small, min_size=hi - lo + 1, max_size=hi - lo + 1)
    return st.tuples(coeffs, coeffs).map(lambda c: toda.FlowedSeries(ComplexSeries(lo, hi, c[0]), ComplexSeries(lo, hi, c[1])))


def product(A, B, window=(-6, 6)):
    """Product of two flowed series with the Leibniz rule for the t0 derivative."""
    return toda.FlowedSeries(mul(A.value, B.value, window), mul(A.dt0, B.value, window) + mul(A.value, B.dt0, window))


def test_bracket_of_w_with_itself():
    A = toda.FlowedSeries(W, ComplexSeries.monomial(1, 0.0))
    assert np.max(np.abs(toda.poisson_bracket(A, A).coeffs)) == 0


def test_bracket_normalization():
    A = toda.FlowedSeries(W, ComplexSeries.monomial(1, 0.0))
    T0 = toda.FlowedSeries.constant(1.44, rate=1.0)
    assert toda.poisson_bracket(A, T0).max_abs_diff(W) < 1e-15


@given(flowed_strategy(), flowed_strategy())
def test_bracket_antisymmetry(A, B):
    assert toda.poisson_bracket(A, B, (-6, 6)).max_abs_diff(-toda.poisson_bracket(B, A, (-6, 6))) < 1e-13


@given(flowed_strategy(-1, 1), flowed_strategy(-1, 1), flowed_strategy(-1, 1))
def test_bracket_leibniz(A, B, C):
    lhs = toda.poisson_bracket(product(A, B), C, (-6, 6))
    rhs = mul(A.value, toda.poisson_bracket(B, C, (-6, 6)), (-6, 6)) + mul(B.value, toda.poisson_bracket(A, C, (-6, 6)), (-6, 6))
    assert lhs.max_abs_diff(rhs) < 1e-12


@pytest.mark.parametrize("n, expected", [(1, {1: 1}), (2, {2: 1})])
def test_generator_of_identity(n, expected):
    B = toda.generator(W, W, n, 8)
    assert B.max_abs_diff(ComplexSeries.from_dict(expected, B.window)) < 1e-15


def test_generator_splits_constant():
    B = toda.generator(ComplexSeries(0, 1, [0.24, 1.2]), W, 1, 8)
    assert B.max_abs_diff(ComplexSeries.from_dict({0: 0.12, 1: 1.2}, (0, 1))) < 1e-15


def test_negative_generator_conventions():
    f = ComplexSeries(1, 3, [1.0, 0.1, 0.02])
    inv = toda.generator(W, f, -1, 8, "inverse")
    assert abs(inv.coeff(-1) - 1) < 1e-15 and abs(inv.coeff(0) + 0.05) < 1e-15
    lit = toda.generator(W, f, -1, 8, "literal")
    assert np.max(np.abs(lit.coeffs)) == 0  # f has no exponents <= 0
    with pytest.raises(DomainError):
        toda.generator(W, f, -1, 8, "other")
    with pytest.raises(DomainError):
        toda.generator(W, f, 0, 8)


@pytest.mark.parametrize("K, n, which", [(1, 1, "L"), (3, 2, "Lt"), (4, -3, "L")])
def test_lax_window_rejects_short_series(K, n, which):
    with pytest.raises(DomainError):
        toda.lax_window(K, n, which)


def test_lax_identity(identity):
    assert toda.lax_residual(identity, 1) <= 1e-7


@pytest.mark.parametrize("n", [1, 2, 3, -1, -2, -3])
@pytest.mark.parametrize("which", ["g", "f"])
def test_lax_mobius_second_order(mobius, n, which):
    d = toda.lax_order(mobius, n, 1e-4, which)
    assert d["residual"] <= 1e-6
    assert d["order_ok"]


@pytest.mark.parametrize("n", [1, -1, 2])
def test_lax_random_pair(n):
    flows = toda.PairFlows(random_pair(11))
    assert toda.lax_residual(flows, n, 1e-4, "g") < 1e-5
    assert toda.lax_residual(flows, n, 1e-4, "f") < 1e-5


def test_lax_rejects_unknown_series(mobius):
    with pytest.raises(DomainError):
        toda.lax_residual(mobius, 1, which="h")


def test_negative_convention_resolution(mobius):
    r = toda.resolve_negative_convention(mobius)
    assert r["inverse"] < 1e-6 < r["literal"]
    assert min(r, key=r.get) == toda.NEGATIVE_FLOW_CONVENTION


def test_sweep_has_slope_two(mobius):
    rows = toda.lax_sweep(mobius, 2, [8e-4, 4e-4, 2e-4, 1e-4], "f")
    e, r = np.array(rows).T
    assert abs(np.polyfit(np.log(e), np.log(r), 1)[0] - 2) < 0.1


def test_orlov_identity(identity):
    M, Mt, res = toda.orlov(identity)
    assert np.max(np.abs(M - 1)) < 1e-13 and np.max(np.abs(Mt - 1)) < 1e-13
    assert res["M-g/f"] < 1e-13


def test_orlov_mobius(mobius):
    M, Mt, res = toda.orlov(mobius, N=24)
    assert res["M-g/f"] <= 1e-8 and res["Mt-g/f"] <= 1e-8


def test_orlov_warns_on_slow_tail(mobius):
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        toda.orlov(mobius, N=8)
    assert any("tail" in str(w.message) for w in rec)


def test_canonical_pair(mobius):
    assert toda.canonical_residual(mobius) <= 1e-6


@pytest.mark.parametrize("fixture, tol", [("identity", 1e-8), ("mobius", 1e-6), ("perturbed", 1e-6)])
def test_string_equation(fixture, tol, request):
    assert toda.string_residual(request.getfixturevalue(fixture)) <= tol


def test_string_equation_sigma():
    g = ComplexSeries(-1, 1, [0.05 + 0.03j, 0.03, 1.1])
    assert toda.string_residual(welding.sigma_pair(g)) <= 1e-6


def test_rh_identity(identity):
    assert max(toda.rh_identities(identity).values()) < 1e-13


def test_rh_mobius_and_rotation(mobius):
    r = toda.rh_identities(mobius)
    assert max(r.values()) <= 1e-8
    rot = toda.rh_identities(mobius.rotate(1j))
    assert all(abs(rot[k] - r[k]) < 1e-10 for k in r)
