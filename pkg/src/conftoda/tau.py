"""The tau function on the pair space, the coordinate flows and their FD checks.

``variation_field(pair, n)`` builds the tangent vector (df, dg) along which
``t_m`` changes at rate ``delta_{nm}``; ``flow_step`` integrates it with the
midpoint rule.  The ``check_*`` functions compare central differences along
these flows with the closed-form derivatives: v_n for the gradient of
log T and the Grunsky table of the inverse pair for its Hessian.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .grunsky import GrunskyTable, faber_of_inverse_pair, grunsky_table_of_inverse_pair
from .pairspace import (
    DEFAULT_MOMENT_ORDER,
    ConformalPair,
    MomentSet,
    moments,
    normalize_pair,
    phi_psi,
)
from .series import ComplexSeries, fourier_coefficients, mul, newton_solve

FD_EPS = 1e-4
FD2_EPS = 1e-3
TAIL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class VariationField:
    n: int
    df: ComplexSeries
    dg: ComplexSeries

    def normalization_rate(self, pair: ConformalPair) -> complex:
        """d(a_1 b)/d eps along the field; zero by construction."""
        return self.df.coeff(1) * pair.b + pair.a1 * self.dg.coeff(1)

    def norm(self) -> float:
        return float(max(np.max(np.abs(self.df.coeffs)), np.max(np.abs(self.dg.coeffs))))


# ----------------------------------------------------------------------
# tau


def log_tau_integral(pair: ConformalPair, moms: Optional[MomentSet] = None, N: int = DEFAULT_MOMENT_ORDER) -> complex:
    """log T from the two contour integrals with Phi(g) and Psi(f), plus t0 v0/2 - t0^2/4."""
    moms = moms or moments(pair, N)
    phi, psi = phi_psi(moms)
    s = pair.samples()
    w, F, Fp, G, Gp = s["w"], s["f"], s["fp"], s["g"], s["gp"]
    # the last retained mode of Phi and Psi contributes exactly the last term of the sum form
    N = moms.order
    tail = abs((N - 2) * (moms.t[N] * moms.v[N] + moms.t[-N] * moms.v[-N])) / 4
    if tail > TAIL_TOL:
        warnings.warn(f"Phi/Psi truncation tail {tail:.1e} exceeds {TAIL_TOL:.0e}", RuntimeWarning, stacklevel=2)
    dphi, dpsi = phi.derivative(), psi.derivative()
    i1 = np.mean(Gp / F * (G * dphi(G) + 2 * phi(G)) * w)
    i2 = np.mean(G * Fp / F**2 * (F * dpsi(F) - 2 * psi(F)) * w)
    t0, v0 = moms.t[0], moms.v[0]
    return complex(t0 * v0 / 2 - t0**2 / 4 + (i1 + i2) / 4)


def log_tau_sum(moms: MomentSet, tail_tol: float = 1e-8) -> complex:
    """t0 v0/2 - t0^2/4 - (1/4) sum_{n>=1} (n - 2)(t_n v_n + t_-n v_-n), truncated at the moment order."""
    N = moms.order
    terms = np.array([(n - 2) * (moms.t[n] * moms.v[n] + moms.t[-n] * moms.v[-n]) for n in range(1, N + 1)])
    head = max(1.0, float(np.max(np.abs(terms))) if N else 1.0)
    if N >= 2 and abs(terms[-1]) > tail_tol * head:
        warnings.warn("tau series terms are not decaying; the truncated sum may diverge", RuntimeWarning, stacklevel=2)
    t0, v0 = moms.t[0], moms.v[0]
    return complex(t0 * v0 / 2 - t0**2 / 4 - np.sum(terms) / 4)


def tau_value(log_t: complex) -> float:
    """tau = |T|^2 from log T."""
    return float(np.exp(2 * complex(log_t).real))


# ----------------------------------------------------------------------
# coordinate flows


def variation_field(pair: ConformalPair, n: int) -> VariationField:
    """The tangent vector (d_n f, d_n g) with d_n t_m = delta_{nm}.

    Uses the Faber polynomials of the inverse pair, (g^n)_{>=0} for n > 0 and
    ((1/f)^|n|)_{<=0} for n < 0, so no series inversion is needed.
    """
    s = pair.samples()
    w, F, Fp, Gp = s["w"], s["f"], s["fp"], s["gp"]
    if np.min(np.abs(Fp)) < 1e-14 or np.min(np.abs(Gp)) < 1e-14:
        raise DomainError("f' or g' vanishes on the grid")
    base = F**2 / (Fp * Gp)
    if n == 0:
        u = base / w
    else:
        polys = faber_of_inverse_pair(pair.f, pair.g, abs(n))
        poly = polys.p(n) if n > 0 else polys.q(-n)
        u = poly.derivative()(w) * base
    K = pair.order
    uc = fourier_coefficients(u, (-K, K))
    um = lambda k: uc[k + K]  # noqa: E731
    hf = np.zeros(K + 1, dtype=complex)  # exponents 0..K of (u_1/2) w + sum_{k>=2} u_k w^k
    hf[1] = 0.5 * um(1)
    hf[2:] = uc[K + 2 :]
    hg = np.zeros(K + 2, dtype=complex)  # exponents -K..1
    hg[: K + 1] = uc[: K + 1]
    hg[K + 1] = 0.5 * um(1)
    fp, gp = pair.f.derivative(), pair.g.derivative()
    df = -mul(fp, ComplexSeries(0, K, hf), (1, max(pair.f.hi, K)))
    dg = mul(gp, ComplexSeries(-K, 1, hg), (min(pair.g.lo, -K), 1))
    return VariationField(n, df, dg)


def _displace(pair: ConformalPair, field: VariationField, eps: float) -> Tuple[ComplexSeries, ComplexSeries]:
    f = pair.f + field.df * eps
    g = pair.g + field.dg * eps
    return f.truncate((1, max(f.hi, 1))), g.truncate((g.lo, 1))


def flow_step(pair: ConformalPair, n: int, eps: float) -> ConformalPair:
    """One midpoint step of length eps along the d_n flow, renormalized to a_1 b = 1."""
    if abs(eps) > 1e-3 + 1e-15:
        raise DomainError(f"step {eps} exceeds 1e-3")
    if eps == 0:
        return pair
    k1 = variation_field(pair, n)
    fm, gm = _displace(pair, k1, 0.5 * eps)
    mid = ConformalPair(fm, gm, pair.m, check=False)
    k2 = variation_field(mid, n)
    f1, g1 = _displace(pair, k2, eps)
    try:
        return normalize_pair(f1, g1, pair.m)
    except DomainError as exc:
        raise DomainError(f"step {eps} along flow {n} rejected: {exc}") from exc


def flow(pair: ConformalPair, n: int, eps: float, steps: int = 1) -> ConformalPair:
    """Several equal midpoint steps, for total parameter ``eps``."""
    out = pair
    for _ in range(steps):
        out = flow_step(out, n, eps / steps)
    return out


def _moment_order(indices: Iterable[int]) -> int:
    return max(3, max(abs(int(i)) for i in indices))


def duality_matrix(pair: ConformalPair, indices: Sequence[int], eps: float = FD_EPS) -> np.ndarray:
    """J[i, j] = FD d t_{indices[i]} / d eps along flow indices[j]."""
    N = _moment_order(indices)
    J = np.zeros((len(indices), len(indices)), dtype=complex)
    for j, n in enumerate(indices):
        tp = moments(flow_step(pair, n, eps), N).t
        tm = moments(flow_step(pair, n, -eps), N).t
        for i, mm in enumerate(indices):
            J[i, j] = (tp[mm] - tm[mm]) / (2 * eps)
    return J


def check_coordinate_duality(pair: ConformalPair, n: int, m: int, eps: float = FD_EPS) -> float:
    """|FD d t_m / d eps along d_n - delta_{nm}|."""
    J = duality_matrix_entry(pair, n, m, eps)
    return float(abs(J - (1.0 if n == m else 0.0)))


def duality_matrix_entry(pair: ConformalPair, n: int, m: int, eps: float = FD_EPS) -> complex:
    N = _moment_order([n, m])
    tp = moments(flow_step(pair, n, eps), N).t[m]
    tm = moments(flow_step(pair, n, -eps), N).t[m]
    return complex((tp - tm) / (2 * eps))


def tau_gradient_fd(pair: ConformalPair, n: int, eps: float = FD_EPS, N: int = DEFAULT_MOMENT_ORDER) -> complex:
    lp = log_tau_integral(flow_step(pair, n, eps), N=N)
    lm = log_tau_integral(flow_step(pair, n, -eps), N=N)
    return complex((lp - lm) / (2 * eps))


def check_tau_gradient(pair: ConformalPair, n: int, eps: float = FD_EPS, N: int = DEFAULT_MOMENT_ORDER) -> float:
    """|FD d log T / d t_n - v_n|."""
    v = moments(pair, max(abs(n), 1)).v[n]
    return float(abs(tau_gradient_fd(pair, n, eps, N) - v))


def hessian_expected(kappa: GrunskyTable, m: int, n: int) -> complex:
    """d^2 log T / dt_m dt_n in terms of the Grunsky table of the inverse pair."""
    if m == 0 and n == 0:
        return -2 * kappa(0, 0)
    if n == 0:
        return abs(m) * kappa(m, 0)
    if m == 0:
        return abs(n) * kappa(n, 0)
    return -abs(m * n) * kappa(m, n)


def tau_hessian_fd(pair: ConformalPair, m: int, n: int, eps: float = FD2_EPS, N: int = DEFAULT_MOMENT_ORDER) -> complex:
    """Nested central difference: flow along m by +-eps, then along n by +-eps."""
    vals = {}
    for s1 in (1, -1):
        p1 = flow_step(pair, m, s1 * eps)
        for s2 in (1, -1):
            vals[s1, s2] = log_tau_integral(flow_step(p1, n, s2 * eps), N=N)
    return complex((vals[1, 1] - vals[1, -1] - vals[-1, 1] + vals[-1, -1]) / (4 * eps * eps))


def check_hessian(pair: ConformalPair, m: int, n: int, eps: float = FD2_EPS, kappa: Optional[GrunskyTable] = None) -> float:
    """|nested FD second derivative of log T - Grunsky prediction|."""
    kappa = kappa or grunsky_table_of_inverse_pair(pair.f, pair.g, max(abs(m), abs(n), 1))
    return float(abs(tau_hessian_fd(pair, m, n, eps) - hessian_expected(kappa, m, n)))


def dual_variation_fd(pair: ConformalPair, n: int, indices: Sequence[int], eps: float = FD_EPS) -> Dict[int, complex]:
    """FD d v_m / d t_n for m in indices."""
    N = _moment_order(list(indices) + [n])
    vp = moments(flow_step(pair, n, eps), N).v
    vm = moments(flow_step(pair, n, -eps), N).v
    return {mm: complex((vp[mm] - vm[mm]) / (2 * eps)) for mm in indices}


def welding_consistency(pair: ConformalPair, n: int, eps: float = 1e-5) -> float:
    """Defect of the boundary identity relating the variations of g o f^-1 and 1/(f o g^-1).

    Both sides are evaluated by central differences of the actual
    compositions along the d_n flow (inverses by Newton's method), and the
    sup-norm difference on S^1 is returned relative to the field size.
    """
    s = pair.samples()
    w, F, Fp, G, Gp = s["w"], s["f"], s["fp"], s["g"], s["gp"]
    sides = {}
    for sgn in (1, -1):
        q = flow_step(pair, n, sgn * eps)
        x = newton_solve(q.f, F, w)  # f_t^{-1}(f(w))
        y = newton_solve(q.g, G, w)  # g_t^{-1}(g(w))
        sides[sgn] = (q.g(x), 1 / q.f(y))
    d_gfinv = (sides[1][0] - sides[-1][0]) / (2 * eps)
    d_recip = (sides[1][1] - sides[-1][1]) / (2 * eps)
    lhs = d_gfinv / F**2 * Fp
    rhs = d_recip * Gp
    scale = variation_field(pair, n).norm()
    return float(np.max(np.abs(lhs - rhs)) / max(scale, 1e-300))
