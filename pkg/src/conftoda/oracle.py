"""Closed-form reference values for pairs of linear fractional maps.

With ``f(w) = w / (b (1 + a w))`` and ``g(w) = b w + c`` every time
variable, dual moment and the tau function have elementary closed forms.
They are evaluated directly here, never by quadrature, so a disagreement
with the numerical pipeline always points at the pipeline.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import DomainError
from .pairspace import DEFAULT_GRID, DEFAULT_ORDER, ConformalPair, MomentSet
from .series import ComplexSeries


@dataclass(frozen=True)
class MobiusParams:
    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        a, b, c = complex(self.a), complex(self.b), complex(self.c)
        if not abs(a) < 1:
            raise DomainError(f"|a| = {abs(a)} must be < 1")
        if b == 0:
            raise DomainError("b must be nonzero")
        if not abs(c / b) < 1:
            raise DomainError(f"|c/b| = {abs(c / b)} must be < 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


def _params(p) -> MobiusParams:
    if isinstance(p, MobiusParams):
        return p
    return MobiusParams(*p)


def mobius_pair(p, order: int = DEFAULT_ORDER, m: int = DEFAULT_GRID) -> ConformalPair:
    """The pair with f = w/(b(1+aw)) expanded to ``order`` terms and g = bw + c."""
    p = _params(p)
    k = np.arange(1, order + 1)
    f = ComplexSeries(1, order, (-p.a) ** (k - 1) / p.b)
    g = ComplexSeries(0, 1, [p.c, p.b])
    return ConformalPair(f, g, m)


def log_t0(p) -> complex:
    """log t_0 on the branch fixed by log b (principal), i.e. 2 Log b."""
    return 2 * cmath.log(_params(p).b)


def mobius_moments(p, N: int = DEFAULT_ORDER) -> MomentSet:
    p = _params(p)
    a, b, c = p.a, p.b, p.c
    t = {n: 0j for n in range(-N, N + 1)}
    t[-1], t[0], t[1] = -c, b * b, a * b
    v = {0: b * b * log_t0(p) - b * b + a * b * c}
    for n in range(1, N + 1):
        v[n] = b * b * c**n
        v[-n] = -(b ** (n + 2)) * a**n
    return MomentSet(N, t, v, b * b, "closed-form")


def mobius_moments_from_times(tm1: complex, t0: complex, t1: complex, N: int = 3, log_t0_value=None) -> Dict[int, complex]:
    """v_n as functions of (t_-1, t_0, t_1) alone."""
    lt0 = cmath.log(t0) if log_t0_value is None else log_t0_value
    v = {0: t0 * lt0 - t0 - tm1 * t1}
    for n in range(1, N + 1):
        v[n] = (-1) ** n * t0 * tm1**n
        v[-n] = -t0 * t1**n
    return v


def mobius_log_tau(p) -> complex:
    """log of the holomorphic tau factor: (t0^2/4) log t0^2 - (3/4) t0^2 - t_-1 t0 t1."""
    p = _params(p)
    t0, tm1, t1 = p.b**2, -p.c, p.a * p.b
    return t0**2 / 4 * (2 * log_t0(p)) - 0.75 * t0**2 - tm1 * t0 * t1


def mobius_tau(p) -> float:
    """tau = |exp(log T)|^2."""
    return float(abs(np.exp(mobius_log_tau(p))) ** 2)


def _table_from_expansions(logb, row_pos, row_neg, mixed, N: int):
    from .grunsky import GrunskyTable

    V = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    V[N, N] = logb
    for k in range(1, N + 1):
        V[N, N + k] = V[N + k, N] = row_pos[k]
        V[N, N - k] = V[N - k, N] = row_neg[k]
    for mm in range(1, N + 1):
        for n in range(1, N + 1):
            V[N + mm, N - n] = V[N - n, N + mm] = mixed[mm][n]
    return GrunskyTable(N, V)


def _powers_over_m(h: ComplexSeries, N: int, sign: int):
    """[zeta^n] (sign)^m h^m / m for m, n = 1..N."""
    from .series import mul

    out = {}
    hp = ComplexSeries.monomial(0, 1.0)
    for mm in range(1, N + 1):
        hp = mul(hp, h, (0, N))
        out[mm] = {n: sign**mm * hp.coeff(n) / mm for n in range(0, N + 1)}
    return out


def mobius_grunsky(p, N: int = 8):
    """Grunsky table of (f, g) by exact series arithmetic.

    g is affine, so b[m, n] = 0 for m, n >= 1, and f is Möbius, so
    b[-m, -n] = 0 for m, n >= 1.  The mixed block is
    b[m, -n] = [zeta^n] (-k(zeta))^m / m with k = c/b - zeta/(b^2 (1 + a zeta)).
    """
    from .series import mul, reciprocal

    p = _params(p)
    a, b, c = p.a, p.b, p.c
    row_pos = {m_: (-c / b) ** m_ / m_ for m_ in range(1, N + 1)}
    row_neg = {m_: -((-a) ** m_) / m_ for m_ in range(1, N + 1)}
    inv = reciprocal(ComplexSeries(0, 1, [1.0, a]), (0, N))
    k = ComplexSeries.monomial(0, c / b) - mul(ComplexSeries.monomial(1, 1 / b**2), inv, (0, N))
    mixed = _powers_over_m(k, N, -1)
    return _table_from_expansions(cmath.log(b), row_pos, row_neg, mixed, N)


def mobius_grunsky_inverse(p, N: int = 8):
    """Grunsky table of (f^-1, g^-1), with f^-1(z) = b z/(1 - a b z) and g^-1(z) = (z - c)/b.

    kappa[0, 0] = -log b, kappa[0, m] = c^m/m, kappa[0, -m] = -(ab)^m/m and
    kappa[m, -n] = [zeta^n] h(zeta)^m / m with h = (c + (b^2 - abc) zeta)/(1 - ab zeta).
    """
    from .series import mul, reciprocal

    p = _params(p)
    a, b, c = p.a, p.b, p.c
    row_pos = {m_: c**m_ / m_ for m_ in range(1, N + 1)}
    row_neg = {m_: -((a * b) ** m_) / m_ for m_ in range(1, N + 1)}
    inv = reciprocal(ComplexSeries(0, 1, [1.0, -a * b]), (0, N))
    h = mul(ComplexSeries(0, 1, [c, b * b - a * b * c]), inv, (0, N))
    mixed = _powers_over_m(h, N, 1)
    return _table_from_expansions(-cmath.log(b), row_pos, row_neg, mixed, N)


# ----------------------------------------------------------------------
# Sigma and circle-homeomorphism restrictions


def sigma_params(a: complex, b: float) -> MobiusParams:
    """The Möbius pair on the Sigma locus: b real, c = conj(a) b."""
    if abs(complex(b).imag) > 0:
        raise DomainError("b must be real on the Sigma locus")
    b = float(complex(b).real)
    return MobiusParams(a, b, np.conj(complex(a)) * b)


def homeo_params(a: complex, alpha: float) -> MobiusParams:
    """(a, b, c) of the pair that welds gamma(w) = e^{-i alpha}(w + conj a)/(1 + a w)."""
    a = complex(a)
    s = np.sqrt(1 - abs(a) ** 2)
    b = cmath.exp(0.5j * alpha) / s
    c = -np.conj(a) * cmath.exp(-0.5j * alpha) / s
    return MobiusParams(a, b, c)


def mobius_gamma(a: complex, alpha: float):
    """gamma and its inverse as callables on the circle."""
    a = complex(a)
    e = cmath.exp(-1j * alpha)
    ab = np.conj(a)

    def gamma(w):
        w = np.asarray(w, dtype=complex)
        return e * (w + ab) / (1 + a * w)

    def gamma_inv(u):
        u = np.asarray(u, dtype=complex)
        x = u / e
        return (x - ab) / (1 - a * x)

    return gamma, gamma_inv


def mobius_fourier_moments(a: complex, alpha: float, N: int = DEFAULT_ORDER) -> Tuple[Dict[int, complex], Dict[int, complex]]:
    """Closed-form Fourier times and duals of the Möbius circle map."""
    a = complex(a)
    ab = np.conj(a)
    e = cmath.exp(-1j * alpha)
    q = 1 - abs(a) ** 2
    t = {n: 0j for n in range(-N, N + 1)}
    t[1], t[0], t[-1] = -a, e * q, -ab * e
    lt0 = -1j * alpha + np.log(q)
    v = {0: t[0] * lt0 - t[0] - t[1] * t[-1]}
    for n in range(1, N + 1):
        v[n] = cmath.exp(-1j * (n + 1) * alpha) * q * ab**n
        v[-n] = (-1) ** (n - 1) * e * a**n * q
    return t, v


def mobius_homeo_log_tau(a: complex, alpha: float) -> complex:
    t, _ = mobius_fourier_moments(a, alpha, 1)
    lt0 = -1j * alpha + np.log(1 - abs(complex(a)) ** 2)
    return t[0] ** 2 / 4 * (2 * lt0) - 0.75 * t[0] ** 2 - t[-1] * t[0] * t[1]


def conjugate_relation_residual(t: Dict[int, complex]) -> float:
    """Defect of the conjugate-coordinate relations for Möbius Fourier times."""
    tm1, t0, t1 = t[-1], t[0], t[1]
    d = t0 + t1 * tm1
    r = [
        np.conj(tm1) - t1 / d,
        np.conj(t0) - t0 / d**2,
        np.conj(t1) - tm1 / d,
    ]
    return float(max(abs(x) for x in r))


def mobius_homeo(a: complex, alpha: float, m: int = DEFAULT_GRID, order: int = DEFAULT_ORDER):
    """(CircleHomeo, ConformalPair, FourierMoments, log tau) of the Möbius circle map."""
    from .welding import CircleHomeo, FourierMoments

    gamma, gamma_inv = mobius_gamma(a, alpha)
    homeo = CircleHomeo.from_callables(gamma, gamma_inv, m)
    pair = mobius_pair(homeo_params(a, alpha), order, m)
    t, v = mobius_fourier_moments(a, alpha, order)
    return homeo, pair, FourierMoments(order, t, v, t[0], "closed-form"), mobius_homeo_log_tau(a, alpha)
