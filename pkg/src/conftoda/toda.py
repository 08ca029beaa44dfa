"""Dispersionless Toda structure of the flows on conformal pairs.

With L = g and L~ = f, each coordinate flow should satisfy a Lax equation
dL/dt_n = {B_n, L}_T for the bracket

    {A, B}_T = w A_w B_{t0} - w A_{t0} B_w.

Derivatives in t_0 (and in t_n) are central differences along the flows of
:mod:`conftoda.tau`; nothing symbolic is carried.  The Orlov-Schulman
functions M, M~ are evaluated on the unit circle from the moments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import DomainError
from .pairspace import DEFAULT_MOMENT_ORDER, ConformalPair, MomentSet, moments
from .series import ComplexSeries, mul, power, project, reciprocal
from .tau import FD_EPS, flow_step

#: powers of 1/f for the negative-flow generator, selected by the Lax-residual sweep
NEGATIVE_FLOW_CONVENTION = "inverse"
CONVENTIONS = ("inverse", "literal")
ROUNDOFF_FLOOR = 1e-11
ORLOV_TAIL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FlowedSeries:
    """A series attached to a pair and its derivative along the t_0 flow."""

    value: ComplexSeries
    dt0: ComplexSeries

    @classmethod
    def constant(cls, c: complex, rate: complex = 0.0) -> "FlowedSeries":
        return cls(ComplexSeries.monomial(0, c), ComplexSeries.monomial(0, rate))


class PairFlows:
    """Coordinate flows on the pair space, with L = g and L~ = f.

    A flow provider exposes ``base``, ``order``, ``lax_series(state)`` and
    ``stencil(n, eps)``: a list of (weight, state) with
    ``d/dt_n Q ~ sum(weight * Q(state)) / (2 eps)``.  The welding module
    supplies a provider for the circle-homeomorphism flows.
    """

    def __init__(self, pair: ConformalPair):
        self.base = pair
        self.order = pair.order
        self._cache: Dict[Tuple[int, float], list] = {}

    def lax_series(self, state: ConformalPair) -> Tuple[ComplexSeries, ComplexSeries]:
        return state.g, state.f

    def stencil(self, n: int, eps: float) -> list:
        key = (n, eps)
        if key not in self._cache:
            self._cache[key] = [(1.0, flow_step(self.base, n, eps)), (-1.0, flow_step(self.base, n, -eps))]
        return self._cache[key]


def _as_flows(system):
    return PairFlows(system) if isinstance(system, ConformalPair) else system


def fd_derivative(system, n: int, eps: float, quantity: Callable) -> ComplexSeries:
    """Central difference of ``quantity(state)`` along the flow n of a provider."""
    system = _as_flows(system)
    out = None
    for wgt, state in system.stencil(n, eps):
        term = quantity(state) * wgt
        out = term if out is None else out + term
    return out / (2 * eps)


def flowed(system, quantity: Callable, eps: float = FD_EPS) -> FlowedSeries:
    """``quantity(base)`` with its t_0 derivative by central differences along flow 0."""
    system = _as_flows(system)
    return FlowedSeries(quantity(system.base), fd_derivative(system, 0, eps, quantity))


def poisson_bracket(A: FlowedSeries, B: FlowedSeries, window: Optional[Tuple[int, int]] = None) -> ComplexSeries:
    """w A' B_t0 - w A_t0 B', products truncated to ``window`` (default: the full product)."""
    wa = A.value.derivative().shift(1)
    wb = B.value.derivative().shift(1)
    return mul(wa, B.dt0, window) - mul(A.dt0, wb, window)


# ----------------------------------------------------------------------
# generators


def generator(L: ComplexSeries, Lt: ComplexSeries, n: int, K: int, convention: str = NEGATIVE_FLOW_CONVENTION) -> ComplexSeries:
    """B_n = (L^n)_{>0} + (L^n)_0 / 2 for n >= 1; the negative-flow generator for n <= -1.

    For n <= -1 the ``convention`` chooses the base series whose |n|-th
    power is projected onto exponents <= 0: ``"inverse"`` uses 1/L~
    (leading coefficient at w^-1), ``"literal"`` uses L~ itself.
    """
    if n == 0:
        raise DomainError("B_0 is not defined; use n >= 1 or n <= -1")
    if n > 0:
        Ln = power(L, n, (min(L.lo * n, 0), n))
        return (project(Ln, ">0") + project(Ln, "=0") * 0.5).truncate((0, n))
    k = -n
    if convention == "inverse":
        pk = power(reciprocal(Lt, (-1, K)), k, (-k, K))
    elif convention == "literal":
        pk = power(Lt, k, (0, K))
    else:
        raise DomainError(f"unknown convention {convention!r}")
    return (project(pk, "<0") + project(pk, "=0") * 0.5).truncate((-k, 0))


def b_n(pair: ConformalPair, n: int, convention: str = NEGATIVE_FLOW_CONVENTION) -> ComplexSeries:
    """The generator of flow n for L = g, L~ = f."""
    return generator(pair.g, pair.f, n, pair.order, convention)


def lax_window(K: int, n: int, which: str) -> Tuple[int, int]:
    """Exponents of dL/dt_n that the order-K truncation determines exactly."""
    k = abs(n)
    if which == "L":
        window = (-K + k + 1, k + 1) if n > 0 else (-K + 1, 1)
    else:
        window = (1, K) if n > 0 else (1, K - k)
    if window[0] > window[1] or K <= k + 1:
        raise DomainError(f"order {K} too small for flow {n}")
    return window


def lax_residual(system, n: int, eps: float = FD_EPS, which: str = "g", convention: str = NEGATIVE_FLOW_CONVENTION) -> float:
    """Sup-norm coefficient residual of dL/dt_n - {B_n, L}_T.

    ``system`` is a pair (then ``which`` is ``"g"`` or ``"f"``) or a flow
    provider (``which`` is ``"L"`` or ``"Lt"``).  The comparison window
    excludes coefficients at the truncation edge that depend on modes the
    finite series do not carry.
    """
    names = {"g": "L", "f": "Lt", "L": "L", "Lt": "Lt"}
    if which not in names:
        raise DomainError("which must be one of 'g', 'f', 'L', 'Lt'")
    which = names[which]
    system = _as_flows(system)
    K = system.order
    idx = 0 if which == "L" else 1
    pick = lambda s: system.lax_series(s)[idx]  # noqa: E731
    gen = lambda s: generator(*system.lax_series(s), n, K, convention)  # noqa: E731
    window = lax_window(K, n, which)
    L = flowed(system, pick, eps)
    B = flowed(system, gen, eps)
    lhs = fd_derivative(system, n, eps, pick)
    rhs = poisson_bracket(B, L, None)
    return float(np.max(np.abs(lhs.coeff_array(window) - rhs.coeff_array(window))))


def lax_order(system, n: int, eps: float = FD_EPS, which: str = "g", convention: str = NEGATIVE_FLOW_CONVENTION,
              floor: float = ROUNDOFF_FLOOR) -> Dict[str, float]:
    """Residuals at eps and eps/2, their ratio, and whether the identity passes the order-2 test.

    The test passes if the ratio is at least 3 (second-order convergence) or
    if the eps/2 residual is already below ``floor``.
    """
    system = _as_flows(system)
    r1 = lax_residual(system, n, eps, which, convention)
    r2 = lax_residual(system, n, eps / 2, which, convention)
    ratio = r1 / r2 if r2 > 0 else np.inf
    return {"eps": eps, "residual": r1, "residual_half": r2, "ratio": float(ratio), "order_ok": bool(ratio >= 3.0 or r2 < floor)}


def lax_sweep(system, n: int, eps_values, which: str = "g", convention: str = NEGATIVE_FLOW_CONVENTION) -> list:
    """(eps, residual) rows for an order-of-accuracy plot."""
    system = _as_flows(system)
    return [(float(e), lax_residual(system, n, e, which, convention)) for e in eps_values]


def resolve_negative_convention(system, eps: float = FD_EPS, n: int = -1) -> Dict[str, float]:
    """Lax residual of every negative-flow convention for L; the smallest one is the consistent reading."""
    system = _as_flows(system)
    return {c: lax_residual(system, n, eps, "L", c) for c in CONVENTIONS}


# ----------------------------------------------------------------------
# Orlov-Schulman functions and the string equation


def _spectral_derivative(values: np.ndarray) -> np.ndarray:
    m = len(values)
    c = np.fft.fft(values) / m
    k = np.fft.fftfreq(m, 1.0 / m)
    k[m // 2] = 0
    w = np.exp(2j * np.pi * np.arange(m) / m)
    return np.fft.ifft(c * k) * m / w


def orlov_samples(pair: ConformalPair, moms: MomentSet) -> Tuple[np.ndarray, np.ndarray]:
    """M and M~ on the grid from truncated moment sums."""
    s = pair.samples()
    F, G = s["f"], s["g"]
    t, v, N = moms.t, moms.v, moms.order
    M = np.full_like(G, t[0])
    Mt = np.full_like(F, t[0])
    Gn, Fn = np.ones_like(G), np.ones_like(F)
    for n in range(1, N + 1):
        Gn, Fn = Gn * G, Fn * F
        M = M + n * t[n] * Gn + v[n] / Gn
        Mt = Mt - n * t[-n] / Fn - v[-n] * Fn
    return M, Mt


def orlov_tail(pair: ConformalPair, moms: MomentSet) -> float:
    """Largest last-retained term of the M and M~ sums on the grid."""
    s = pair.samples()
    F, G, N = s["f"], s["g"], moms.order
    last = [N * moms.t[N] * G**N, moms.v[N] / G**N, N * moms.t[-N] / F**N, moms.v[-N] * F**N]
    return float(max(np.max(np.abs(x)) for x in last))


def orlov(pair: ConformalPair, moms: Optional[MomentSet] = None, N: int = DEFAULT_MOMENT_ORDER):
    """(M, M~, residuals) with residuals ||M - g/f||, ||M~ - g/f||, ||M - M~|| on S^1."""
    moms = moms or moments(pair, N)
    M, Mt = orlov_samples(pair, moms)
    s = pair.samples()
    q = s["g"] / s["f"]
    tail = orlov_tail(pair, moms)
    if tail > ORLOV_TAIL_TOL:
        warnings.warn(f"Orlov-Schulman series tail {tail:.1e} on the curve; truncation at N={moms.order} is not converged")
    res = {
        "tail": tail,
        "M-g/f": float(np.max(np.abs(M - q))),
        "Mt-g/f": float(np.max(np.abs(Mt - q))),
        "M-Mt": float(np.max(np.abs(M - Mt))),
    }
    return M, Mt, res


def rh_identities(pair: ConformalPair, moms: Optional[MomentSet] = None, N: int = DEFAULT_MOMENT_ORDER) -> Dict[str, float]:
    """||M - M~|| and ||f M~ - g|| on the grid."""
    moms = moms or moments(pair, N)
    M, Mt = orlov_samples(pair, moms)
    s = pair.samples()
    return {"M-Mt": float(np.max(np.abs(M - Mt))), "fMt-g": float(np.max(np.abs(s["f"] * Mt - s["g"])))}


def _t0_derivatives(pair: ConformalPair, eps: float):
    up, dn = flow_step(pair, 0, eps), flow_step(pair, 0, -eps)
    return up, dn


def string_residual(pair: ConformalPair, eps: float = FD_EPS) -> float:
    """sup over S^1 of |{g, 1/f}_T - 1| = |(w/f^2)(f' g_t0 - g' f_t0) - 1|."""
    up, dn = _t0_derivatives(pair, eps)
    s = pair.samples()
    w = s["w"]
    ft = (up.f(w) - dn.f(w)) / (2 * eps)
    gt = (up.g(w) - dn.g(w)) / (2 * eps)
    val = w / s["f"] ** 2 * (s["fp"] * gt - s["gp"] * ft)
    return float(np.max(np.abs(val - 1)))


def canonical_residual(pair: ConformalPair, eps: float = FD_EPS, N: int = DEFAULT_MOMENT_ORDER) -> float:
    """sup over S^1 of |{g, M}_T - g| with M from the moment sum and its t_0 derivative by central differences."""
    up, dn = _t0_derivatives(pair, eps)
    s = pair.samples()
    w = s["w"]
    M, _ = orlov_samples(pair, moments(pair, N))
    Mu, _ = orlov_samples(up, moments(up, N))
    Md, _ = orlov_samples(dn, moments(dn, N))
    Mt0 = (Mu - Md) / (2 * eps)
    gt = (up.g(w) - dn.g(w)) / (2 * eps)
    br = w * s["gp"] * Mt0 - w * gt * _spectral_derivative(M)
    return float(np.max(np.abs(br - s["g"])))
