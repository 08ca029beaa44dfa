import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftoda import oracle, pairspace
from conftoda.errors import DomainError
from conftoda.pairspace import ConformalPair, MomentSet, normalize_pair
from conftoda.series import ComplexSeries

from conftest import MOBIUS, random_pair

W = ComplexSeries.monomial(1)

# Oracle moments of the Mobius pair (0.3, 1.2, 0.24), frozen from the closed forms.
T_FROZEN = {-1: -0.24, 0: 1.44, 1: 0.36, 2: 0.0, -2: 0.0}
V_FROZEN = {1: 0.3456, -1: -0.5184, 0: -0.8285139164334108, 2: 0.082944, -2: -0.186624}


def test_normalize_identity():
    p = normalize_pair(W, W)
    assert p.f.max_abs_diff(W) == 0 and p.g.max_abs_diff(W) == 0


def test_normalize_scales_by_root():
    p = normalize_pair(ComplexSeries.monomial(1, 2.0), W)
    assert abs(p.a1 - np.sqrt(2)) < 1e-15 and abs(p.b - 1 / np.sqrt(2)) < 1e-15


def test_normalize_general():
    p = normalize_pair(ComplexSeries(1, 2, [1, 0.1]), ComplexSeries(0, 1, [0.3, 2.0]))
    assert abs(p.a1 * p.b - 1) < 1e-13
    assert abs(p.a1 - 1 / np.sqrt(2)) < 1e-15


def test_normalize_rejects_zero_leading():
    with pytest.raises(DomainError):
        normalize_pair(ComplexSeries(1, 2, [0, 1]), W)


@pytest.mark.parametrize(
    "f, g, m",
    [
        (ComplexSeries(0, 1, [0.1, 1]), W, 256),  # f(0) != 0
        (W, ComplexSeries(1, 2, [1, 1]), 256),  # g has a double pole
        (W, W, 12),  # grid not a power of two
        (ComplexSeries.monomial(1, 2.0), W, 256),  # not normalized
        (ComplexSeries(1, 2, [1, 0.5]), W, 256),  # f'(-1) = 0 at a grid node
    ],
)
def test_invalid_pairs_rejected(f, g, m):
    with pytest.raises(DomainError):
        ConformalPair(f, g, m)


def test_pair_json_roundtrip(mobius):
    back = ConformalPair.from_json(mobius.to_json())
    assert back.f.max_abs_diff(mobius.f) == 0 and back.g.max_abs_diff(mobius.g) == 0 and back.m == mobius.m


def test_padding_keeps_the_maps(perturbed):
    p = perturbed.padded(40)
    assert p.order == 40 and p.f.max_abs_diff(perturbed.f) == 0


def test_identity_moments(identity):
    m = pairspace.moments(identity)
    assert abs(m.t[0] - 1) < 1e-14 and abs(m.v[0] + 1) < 1e-14
    assert max(abs(m.t[n]) + abs(m.v[n]) for n in range(-24, 25) if n) < 1e-14


def test_mobius_moments_frozen(mobius):
    m = pairspace.moments(mobius)
    for n, t in T_FROZEN.items():
        assert abs(m.t[n] - t) < 1e-12
    for n, v in V_FROZEN.items():
        assert abs(m.v[n] - v) < 1e-12
    assert m.t0_defect < 1e-11


def test_moment_order_guard(mobius):
    with pytest.raises(DomainError):
        pairspace.moments(mobius, mobius.m // 4 + 1)


def test_moment_json_roundtrip(mobius):
    m = pairspace.moments(mobius, 4)
    back = MomentSet.from_json(m.to_json())
    assert back.order == 4 and all(back.t[n] == m.t[n] and back.v[n] == m.v[n] for n in range(-4, 5))


@pytest.mark.parametrize("seed", range(3))
def test_two_forms_of_t0_agree(seed):
    assert pairspace.moments(random_pair(seed)).t0_defect < 1e-11


def test_s_functions_identity(identity):
    inner, outer = pairspace.s_functions(identity, [0.5, 2.0])
    assert abs(inner.S_tilde) < 1e-14 and inner.S_tilde_side == "+"
    assert abs(outer.S + 0.5) < 1e-14 and outer.S_side == "-"


def test_s_function_geometric_series(mobius):
    (val,) = pairspace.s_functions(mobius, [3.0])
    t0, c = 1.44, 0.24
    closed = -t0 / 3 - sum(t0 * c**n / 3 ** (n + 1) for n in range(1, 200))
    assert abs(val.S - closed) < 1e-10
    assert abs(pairspace.s_expansions(pairspace.moments(mobius), 3.0)["S-"] - val.S) < 1e-10


def test_jump_identity(identity):
    r2, r1 = pairspace.jump_residual(identity)
    assert r2 < 1e-13 and r1 < 1e-13


def test_jump_mobius(mobius):
    r2, r1 = pairspace.jump_residual(mobius, pairspace.moments(mobius, 24))
    assert r2 <= 1e-9 and r1 <= 1e-9


def test_jump_rotation_covariance(mobius):
    base = pairspace.jump_residual(mobius)
    rot = pairspace.jump_residual(mobius.rotate(1j))
    assert np.allclose(base, rot, rtol=0, atol=1e-10)


def test_rotation_requires_unit_modulus(mobius):
    with pytest.raises(DomainError):
        mobius.rotate(2.0)


def test_phi_psi_identity(identity):
    Phi, Psi = pairspace.phi_psi(pairspace.moments(identity, 4))
    assert np.max(np.abs(Phi.coeffs)) < 1e-14 and np.max(np.abs(Psi.coeffs)) < 1e-14


def test_phi_mobius_is_log_series(mobius):
    Phi, _ = pairspace.phi_psi(pairspace.moments(mobius, 16))
    b2, c = 1.44, 0.24
    for n in range(1, 17):
        assert abs(Phi.coeff(-n) - b2 * c**n / n) < 1e-12


def test_phi_psi_derivative_relations(mobius):
    r = pairspace.phi_psi_residuals(mobius, pairspace.moments(mobius), [3.0], [0.1])
    assert max(r.values()) <= 1e-10


@given(st.floats(-0.25, 0.25), st.floats(0.8, 1.3), st.floats(-0.25, 0.25))
def test_moments_match_oracle_property(a, b, cb):
    p = oracle.MobiusParams(a, b, cb * b)
    mq = pairspace.moments(oracle.mobius_pair(p), 8)
    mc = oracle.mobius_moments(p, 3)
    assert max(abs(mq.t[n] - mc.t[n]) + abs(mq.v[n] - mc.v[n]) for n in range(-3, 4)) < 1e-10
