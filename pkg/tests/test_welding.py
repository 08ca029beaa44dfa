import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftoda import oracle, pairspace, welding
from conftoda.errors import ConvergenceError, DomainError, LocusError
from conftoda.series import ComplexSeries

W = ComplexSeries.monomial(1)

# Mobius circle map (a, alpha) = (0.2, 0): b = 1/sqrt(0.96), c = -0.2/sqrt(0.96).
B_FROZEN = 1.0206207261596576
C_FROZEN = -0.20412414523193156


@pytest.fixture(scope="module")
def mobius_homeo():
    h, _, _, _ = oracle.mobius_homeo(0.2, 0.0)
    return h, welding.weld(h)


@pytest.fixture(scope="module")
def phase_homeo():
    u = welding.random_phase(np.random.default_rng(5), 256, 0.05)
    h = welding.CircleHomeo.from_phase(u)
    return h, welding.weld(h)


# circle maps ----------------------------------------------------------


def test_identity_homeo_is_valid():
    h = welding.CircleHomeo.identity(64)
    assert h.inverse_defect() < 1e-14 and abs(h.quasisymmetry() - 1) < 1e-12


@pytest.mark.parametrize(
    "gamma",
    [
        lambda w: 1.01 * w,  # leaves the circle
        lambda w: np.conj(w),  # reverses orientation
        lambda w: w**2,  # winds twice
    ],
)
def test_invalid_homeos_rejected(gamma):
    w = np.exp(2j * np.pi * np.arange(64) / 64)
    with pytest.raises(DomainError):
        welding.CircleHomeo(64, gamma(w), w)


def test_inverse_mismatch_rejected():
    w = np.exp(2j * np.pi * np.arange(64) / 64)
    with pytest.raises(DomainError):
        welding.CircleHomeo(64, w * np.exp(0.1j), w)


def test_grid_and_length_validation():
    w = np.exp(2j * np.pi * np.arange(12) / 12)
    with pytest.raises(DomainError):
        welding.CircleHomeo(12, w, w)
    with pytest.raises(DomainError):
        welding.CircleHomeo(16, w, w)


def test_inverse_from_samples(phase_homeo):
    h, _ = phase_homeo
    assert h.inverse_defect() < 1e-10
    assert np.max(np.abs(np.abs(h.gamma_inv) - 1)) < 1e-12


def test_homeo_json_roundtrip(phase_homeo):
    h, _ = phase_homeo
    back = welding.CircleHomeo.from_json(h.to_json())
    assert back.max_abs_diff(h) == 0 and np.max(np.abs(back.gamma_inv - h.gamma_inv)) < 1e-14
    bad = dict(h.to_json(), m=128)
    with pytest.raises(DomainError):
        welding.CircleHomeo.from_json(bad)


def test_random_phase_amplitude():
    u = welding.random_phase(np.random.default_rng(0), 128, 0.05)
    assert abs(np.max(np.abs(u)) - 0.05) < 1e-15


# welding --------------------------------------------------------------


def test_weld_identity():
    p = welding.weld(welding.CircleHomeo.identity())
    assert p.f.max_abs_diff(W) < 1e-15 and p.g.max_abs_diff(W) < 1e-15


def test_weld_mobius_closed_form(mobius_homeo):
    _, pair = mobius_homeo
    assert abs(pair.b - B_FROZEN) < 1e-12 and abs(pair.g.coeff(0) - C_FROZEN) < 1e-12
    f_exact = oracle.mobius_pair(oracle.homeo_params(0.2, 0.0)).f
    assert pair.f.max_abs_diff(f_exact) < 1e-12


@pytest.mark.parametrize("a, alpha", [(0.1 + 0.2j, 0.5), (-0.3, 1.0), (0.25j, -2.0)])
def test_weld_mobius_family(a, alpha):
    h, _, _, _ = oracle.mobius_homeo(a, alpha)
    pair = welding.weld(h)
    p = oracle.homeo_params(a, alpha)
    assert abs(pair.b - p.b) < 1e-10 and abs(pair.g.coeff(0) - p.c) < 1e-10
    assert welding.compose_welding(pair).max_abs_diff(h) < 1e-8


def test_weld_roundtrip_phase(phase_homeo):
    h, pair = phase_homeo
    assert welding.welding_defect(h, pair) < 1e-12
    assert welding.compose_welding(pair).max_abs_diff(h) < 1e-8


def test_weld_sign_choice(phase_homeo):
    _, pair = phase_homeo
    assert pair.a1.real >= 0 and abs(pair.a1 * pair.b - 1) < 1e-13


def test_weld_damping_reaches_same_pair(phase_homeo):
    h, pair = phase_homeo
    damped = welding.weld(h, damping=0.5, tol=1e-13)
    assert damped.f.max_abs_diff(pair.f) < 1e-11


def test_weld_reports_nonconvergence(phase_homeo):
    h, _ = phase_homeo
    with pytest.raises(ConvergenceError) as exc:
        welding.weld_report(h, max_iters=1, tol=1e-15)
    assert exc.value.iterations == 1 and exc.value.defect > 0


def test_weld_rejects_bad_damping(phase_homeo):
    with pytest.raises(DomainError):
        welding.weld(phase_homeo[0], damping=0.0)


def test_weld_rejects_large_distortion():
    m = 64
    steps = np.tile([1.0, 4.0], m // 2)  # adjacent image arcs differ by a factor 4
    theta = 2 * np.pi * np.concatenate([[0.0], np.cumsum(steps)[:-1]]) / steps.sum()
    h = welding.CircleHomeo.from_samples(np.exp(1j * theta))
    assert h.quasisymmetry() > welding.QS_BOUND
    with pytest.raises(DomainError):
        welding.weld(h)


def test_weld_report_diagnostics(phase_homeo):
    r = welding.weld_report(phase_homeo[0])
    assert r.iterations <= 20 and r.defect < 1e-13 and r.tail < 1e-12


def test_weld_runtime(phase_homeo):
    start = time.perf_counter()
    welding.weld(phase_homeo[0])
    assert time.perf_counter() - start < 10


def test_compose_identity():
    h = welding.compose_welding(pairspace.identity_pair())
    assert h.max_abs_diff(welding.CircleHomeo.identity()) < 1e-14


def test_compose_rejects_generic_pair():
    with pytest.raises(LocusError):
        welding.compose_welding(oracle.mobius_pair((0.3, 1.2, 0.24)))


# Sigma locus -----------------------------------------------------------


def random_sigma_g(seed, K=4):
    rng = np.random.default_rng(seed)
    c = (rng.normal(size=K) + 1j * rng.normal(size=K)) * 0.3 ** np.arange(1, K + 1) * 0.5
    return ComplexSeries(1 - K, 1, np.concatenate([c[::-1][:-1], [c[0] * 0.2], [1.0]]))


def test_sigma_of_identity():
    assert welding.sigma_pair(W).f.max_abs_diff(W) == 0


def test_sigma_of_affine_map():
    b, c = 1.2, 0.1 + 0.05j
    sp = welding.sigma_pair(ComplexSeries(0, 1, [c, b]))
    assert sp.f.max_abs_diff(oracle.mobius_pair((np.conj(c) / b, b, c)).f) < 1e-14


@pytest.mark.parametrize("seed", range(5))
def test_sigma_moments_are_real(seed):
    pair = welding.sigma_pair(random_sigma_g(seed))
    assert welding.sigma_defect(pairspace.moments(pair, 12)) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_harmonic_moments_match(seed):
    g = random_sigma_g(seed)
    pair = welding.sigma_pair(g)
    m, h = pairspace.moments(pair, 12), welding.harmonic_moments(pair.g, 12)
    assert max(abs(m.t[n] - h.t[n]) + abs(m.v[n] - h.v[n]) for n in range(-12, 13)) <= 1e-9


def test_harmonic_moments_simple_domains():
    assert abs(welding.harmonic_moments(W, 4).t[0] - 1) < 1e-14
    b, c = 1.2, 0.1 + 0.05j
    h = welding.harmonic_moments(ComplexSeries(0, 1, [c, b]), 4)
    assert abs(h.t[1] - np.conj(c)) < 1e-14  # a b with a = conj(c)/b


def test_sigma_tau_is_real():
    from conftoda import tau

    pair = welding.sigma_pair(random_sigma_g(1))
    assert abs(tau.log_tau_sum(pairspace.moments(pair)).imag) < 1e-10


@given(st.integers(0, 10_000))
def test_sigma_transform_reflects_moments(seed):
    from conftest import random_pair

    pair = random_pair(seed, scale=0.03)
    m, mt = pairspace.moments(pair, 6), pairspace.moments(welding.sigma_transform(pair), 6)
    for n in range(-6, 7):
        assert abs(mt.t[n] + np.conj(m.t[-n])) < 1e-12 if n else abs(mt.t[0] - np.conj(m.t[0])) < 1e-12


def test_sigma_pair_is_fixed_by_transform():
    pair = welding.sigma_pair(random_sigma_g(2))
    back = welding.sigma_transform(pair)
    assert back.f.max_abs_diff(pair.f) < 1e-12 and back.g.max_abs_diff(pair.g) < 1e-12


# Fourier moments --------------------------------------------------------


def test_fourier_identity():
    h = welding.CircleHomeo.identity()
    fm = welding.fourier_moments(h, pairspace.identity_pair(), 4)
    assert abs(fm.t[0] - 1) < 1e-14 and abs(fm.v[0] + 1) < 1e-14
    assert max(abs(fm.t[n]) for n in range(-4, 5) if n) < 1e-14
    assert abs(welding.log_tau_homeo(h, pairspace.identity_pair(), fm) + 0.75) < 1e-14


def test_fourier_mobius_frozen(mobius_homeo):
    h, pair = mobius_homeo
    fm = welding.fourier_moments(h, pair, 3)
    assert abs(fm.t[1] + 0.2) < 1e-14 and abs(fm.t[0] - 0.96) < 1e-14 and abs(fm.t[-1] + 0.2) < 1e-14
    assert max(abs(fm.t[n]) for n in (-3, -2, 2, 3)) < 1e-14
    t0, t1, tm1 = fm.t[0], fm.t[1], fm.t[-1]
    assert abs(fm.v[0] - (t0 * np.log(t0) - t0 - t1 * tm1)) < 1e-12
    assert fm.c0_defect < 1e-12


def test_fourier_json_roundtrip(mobius_homeo):
    fm = welding.fourier_moments(*mobius_homeo, 3)
    back = welding.FourierMoments.from_json(fm.to_json())
    assert back.order == 3 and back.c0 == fm.c0 and all(back.v[n] == fm.v[n] for n in range(-3, 4))


def test_fourier_rejects_wrong_pair(mobius_homeo):
    h, _ = mobius_homeo
    with pytest.raises(LocusError):
        welding.fourier_moments(h, pairspace.identity_pair(), 3)


def test_v0_heuristic_is_comparison_only(mobius_homeo):
    h, pair = mobius_homeo
    fm = welding.fourier_moments(h, pair, 3)
    assert abs(welding.v0_heuristic(welding.CircleHomeo.identity())) < 1e-14  # the true v_0 is -1
    assert abs(welding.v0_heuristic(h) - fm.v[0]) > 1e-3


def test_log_tau_homeo_closed_form(mobius_homeo):
    h, pair = mobius_homeo
    fm = welding.fourier_moments(h, pair, 24)
    t = fm.t
    closed = t[0] ** 2 / 4 * np.log(t[0] ** 2) - 0.75 * t[0] ** 2 - t[-1] * t[0] * t[1]
    assert abs(welding.log_tau_homeo(h, pair, fm) - closed) < 1e-12
    assert abs(welding.log_tau_homeo_sum(fm) - closed) < 1e-12
    assert abs(oracle.mobius_homeo_log_tau(0.2, 0.0) - closed) < 1e-12


# vector fields ----------------------------------------------------------


@pytest.mark.parametrize("n, power", [(0, 1), (1, 2)])
def test_variation_at_identity(n, power):
    h = welding.CircleHomeo.identity()
    V = welding.homeo_variation(h, pairspace.identity_pair(), n)
    assert np.max(np.abs(V - h.nodes**power)) < 1e-13


@pytest.fixture(scope="module")
def mobius_flows(mobius_homeo):
    return welding.HomeoFlows(*mobius_homeo)


def test_homeo_duality(mobius_flows):
    J = welding.homeo_duality_matrix(mobius_flows, [-2, -1, 0, 1, 2])
    assert np.max(np.abs(J - np.eye(5))) <= 1e-6


@pytest.mark.parametrize("n", [-1, 0, 1])
def test_homeo_gradient(mobius_flows, n):
    assert welding.check_homeo_gradient(mobius_flows, n) <= 1e-5


def test_homeo_dual_variation(mobius_flows, mobius_homeo):
    from conftoda.tau import hessian_expected

    table = welding.forward_table(mobius_homeo[1], 2)
    dv = welding.homeo_dual_variation(mobius_flows, 1, [-1, 0, 1])
    assert max(abs(dv[m] - hessian_expected(table, 1, m)) for m in (-1, 0, 1)) <= 1e-5


def test_homeo_hessian(mobius_flows):
    assert welding.check_homeo_hessian(mobius_flows, 1, -1) <= 1e-4


@pytest.mark.parametrize("n", [1, -1])
def test_homeo_lax(mobius_flows, n):
    d = welding.homeo_lax_order(mobius_flows, n)
    assert d["residual"] <= 1e-5 and d["order_ok"]
