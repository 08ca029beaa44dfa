"""Normalized conformal pairs (f, g), their time variables and dual moments.

``f = a_1 w + a_2 w^2 + ...`` is given on the closed unit disc and
``g = b w + b_0 + b_1/w + ...`` on the closed exterior disc, with
``a_1 b = 1``.  Every contour integral below is the trapezoid rule on the
``m`` roots of unity applied to an integrand written in the variable ``w``
of ``S^1``; the image curves ``f(S^1)``, ``g(S^1)`` are never parametrized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .errors import DomainError
from .series import ComplexSeries, circle_nodes, tracked_log

DEFAULT_GRID = 256
DEFAULT_ORDER = 32
DEFAULT_MOMENT_ORDER = 24
INJECTIVITY_TOL = 1e-9
MAX_LOG_SCALE = 3.0
DERIVATIVE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConformalPair:
    """A point of the pair space, validated on construction.

    Use :func:`normalize_pair` to build one from unnormalized series.
    """

    f: ComplexSeries
    g: ComplexSeries
    m: int = DEFAULT_GRID
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        f, g = self.f, self.g
        if f.lo < 1:
            f = f.truncate((1, max(f.hi, 1)))
            if self.f.coeff_array((self.f.lo, 0)).any():
                raise DomainError("f must vanish at 0")
            object.__setattr__(self, "f", f)
        if g.hi > 1:
            if g.coeff_array((2, g.hi)).any():
                raise DomainError("g must have a simple pole at infinity")
            g = g.truncate((g.lo, 1))
            object.__setattr__(self, "g", g)
        if g.hi < 1:
            raise DomainError("g must have a simple pole at infinity")
        if self.m < 8 or self.m & (self.m - 1):
            raise DomainError(f"grid size must be a power of two >= 8, got {self.m}")
        if self.check:
            validate_pair(self)

    @property
    def a1(self) -> complex:
        return self.f.coeff(1)

    @property
    def b(self) -> complex:
        return self.g.coeff(1)

    @property
    def order(self) -> int:
        return max(self.f.hi, 1 - self.g.lo)

    @property
    def nodes(self) -> np.ndarray:
        return circle_nodes(self.m)

    def samples(self) -> Dict[str, np.ndarray]:
        """f, f', g, g' at the grid nodes."""
        w = self.nodes
        return {
            "w": w,
            "f": self.f(w),
            "fp": self.f.derivative()(w),
            "g": self.g(w),
            "gp": self.g.derivative()(w),
        }

    def with_series(self, f: ComplexSeries, g: ComplexSeries, check: bool = True) -> "ConformalPair":
        return ConformalPair(f, g, self.m, check)

    def padded(self, order: int = DEFAULT_ORDER) -> "ConformalPair":
        """The same pair with zero coefficients out to ``order`` on both sides."""
        K = max(order, self.order)
        f = ComplexSeries(1, K, self.f.coeff_array((1, K)))
        g = ComplexSeries(1 - K, 1, self.g.coeff_array((1 - K, 1)))
        return ConformalPair(f, g, self.m, check=False)

    def conj(self) -> "ConformalPair":
        """Coefficient conjugation (f̄, ḡ)."""
        return ConformalPair(self.f.conj(), self.g.conj(), self.m, self.check)

    def rotate(self, rho: complex) -> "ConformalPair":
        """(f(rho w)/rho, g(rho w)/rho) for |rho| = 1."""
        rho = complex(rho)
        if abs(abs(rho) - 1) > 1e-14:
            raise DomainError("rotation must have modulus 1")
        fk, gk = self.f.exponents, self.g.exponents
        f = ComplexSeries(self.f.lo, self.f.hi, self.f.coeffs * rho ** (fk - 1))
        g = ComplexSeries(self.g.lo, self.g.hi, self.g.coeffs * rho ** (gk - 1.0))
        return ConformalPair(f, g, self.m, self.check)

    def to_json(self) -> dict:
        return {"f": self.f.to_json(), "g": self.g.to_json(), "m": int(self.m)}

    @classmethod
    def from_json(cls, d: dict, check: bool = True) -> "ConformalPair":
        return cls(ComplexSeries.from_json(d["f"]), ComplexSeries.from_json(d["g"]), int(d.get("m", DEFAULT_GRID)), check)


def _min_pairwise_distance(z: np.ndarray) -> float:
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return float(np.min(d))


def _winding(values: np.ndarray) -> float:
    ph = np.unwrap(np.angle(np.append(values, values[0])))
    return (ph[-1] - ph[0]) / (2 * np.pi)


def validate_pair(pair: ConformalPair, norm_tol: float = 1e-13) -> None:
    """Sample-level checks standing in for univalence and the domain conditions."""
    a1, b = pair.a1, pair.b
    if a1 == 0 or b == 0:
        raise DomainError("zero leading coefficient")
    if abs(a1 * b - 1) > norm_tol:
        raise DomainError(f"pair is not normalized: a1*b - 1 = {a1 * b - 1:.3e}")
    if abs(np.log(abs(a1))) > MAX_LOG_SCALE:
        raise DomainError(f"|log|a1|| = {abs(np.log(abs(a1))):.2f} exceeds {MAX_LOG_SCALE}")
    s = pair.samples()
    for name in ("f", "g"):
        v = s[name]
        if not np.all(np.isfinite(v)):
            raise DomainError(f"{name} is not finite on the grid")
        if np.min(np.abs(v)) == 0:
            raise DomainError(f"{name} vanishes on the grid")
        if _min_pairwise_distance(v) < INJECTIVITY_TOL:
            raise DomainError(f"{name} is not injective on the grid")
        if abs(_winding(v) - 1) > 0.5:
            raise DomainError(f"{name}(S^1) does not wind once around 0")
    for name in ("fp", "gp"):
        d = np.abs(s[name])
        if np.min(d) <= DERIVATIVE_TOL * np.max(d):
            raise DomainError(f"{name[0]}' vanishes on the grid")


def normalize_pair(f_raw: ComplexSeries, g_raw: ComplexSeries, m: int = DEFAULT_GRID, check: bool = True) -> ConformalPair:
    """Scale both series by r, r^2 = 1/(a_1 b), principal square root."""
    a1, b = f_raw.coeff(1), g_raw.coeff(1)
    if a1 == 0 or b == 0:
        raise DomainError("zero leading coefficient")
    r = np.sqrt(1.0 / complex(a1 * b))
    return ConformalPair(f_raw * r, g_raw * r, m, check)


def pair_from_coefficients(a, bcoef, m: int = DEFAULT_GRID, normalize: bool = True, order: Optional[int] = DEFAULT_ORDER) -> ConformalPair:
    """Pair from coefficient lists ``a = [a_1, a_2, ...]`` and ``bcoef = [b, b_0, b_1, ...]``, zero-padded to ``order``."""
    a = np.asarray(a, dtype=complex)
    bc = np.asarray(bcoef, dtype=complex)
    f = ComplexSeries(1, len(a), a)
    g = ComplexSeries(2 - len(bc), 1, bc[::-1])
    pair = normalize_pair(f, g, m) if normalize else ConformalPair(f, g, m)
    return pair.padded(order) if order else pair


# ----------------------------------------------------------------------
# moments


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Times ``t[n]`` and duals ``v[n]`` for ``|n| <= order``.

    ``t0_alt`` is the second contour form of t_0; ``source`` names the
    procedure that produced the values.
    """

    order: int
    t: Dict[int, complex]
    v: Dict[int, complex]
    t0_alt: Optional[complex] = None
    source: str = "quadrature"

    @property
    def t0_defect(self) -> float:
        return 0.0 if self.t0_alt is None else abs(self.t[0] - self.t0_alt)

    def to_json(self) -> dict:
        key = lambda d: [[n, float(d[n].real), float(d[n].imag)] for n in sorted(d)]  # noqa: E731
        return {"t": key(self.t), "v": key(self.v)}

    @classmethod
    def from_json(cls, d: dict, source: str = "json") -> "MomentSet":
        t = {int(n): complex(re, im) for n, re, im in d["t"]}
        v = {int(n): complex(re, im) for n, re, im in d["v"]}
        return cls(max(abs(n) for n in t), t, v, None, source)

    def conj(self) -> "MomentSet":
        return MomentSet(self.order, {k: np.conj(x) for k, x in self.t.items()}, {k: np.conj(x) for k, x in self.v.items()},
                         None if self.t0_alt is None else np.conj(self.t0_alt), self.source)


def pinned_logs(pair: ConformalPair, s: Optional[dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous log(g/w) and log(f/w) on the grid, pinned so each loop mean is the principal log of b, a_1."""
    s = s or pair.samples()
    w = s["w"]
    lg = tracked_log(s["g"] / w, anchor=np.log(pair.b))
    lf = tracked_log(s["f"] / w, anchor=np.log(pair.a1))
    return lg, lf


def moments(pair: ConformalPair, N: int = DEFAULT_MOMENT_ORDER) -> MomentSet:
    """t_n, v_n for |n| <= N by trapezoid quadrature of the S^1 integrands."""
    if N > pair.m // 4:
        raise DomainError(f"moment order {N} too high for grid {pair.m}")
    s = pair.samples()
    w, F, Fp, G, Gp = s["w"], s["f"], s["fp"], s["g"], s["gp"]
    if np.min(np.abs(F)) < 1e-14:
        raise DomainError("singular integrand: f vanishes on the grid")
    A = Gp / F * w  # dg / f, times w for the mean
    B = G * Fp / F**2 * w  # g df / f^2
    t, v = {}, {}
    t[0] = complex(np.mean(A))
    t0_alt = complex(np.mean(B))
    lg, lf = pinned_logs(pair, s)
    v[0] = complex(np.mean((lg * Gp / F - lf * G * Fp / F**2 - G / (w * F)) * w))
    Gn_inv = np.ones_like(G)
    Gn = np.ones_like(G)
    Fn = np.ones_like(F)
    for n in range(1, N + 1):
        Gn_inv = Gn_inv / G
        Gn = Gn * G
        Fn = Fn * F
        t[n] = complex(np.mean(Gn_inv * A)) / n
        v[n] = complex(np.mean(Gn * A))
        t[-n] = -complex(np.mean(Fn * B)) / n  # g f^{n-2} f' = (g f'/f^2) f^n
        v[-n] = -complex(np.mean(B / Fn))
    return MomentSet(N, t, v, t0_alt, "quadrature")


# ----------------------------------------------------------------------
# Cauchy-type functions


@dataclass(frozen=True)
class SValues:
    """S-function values at one probe: ``S`` over g(S^1) and ``S_tilde`` over f(S^1) with their sides."""

    z: complex
    S: complex
    S_side: str
    S_tilde: complex
    S_tilde_side: str


def _side(curve: np.ndarray, z: complex) -> str:
    return "+" if abs(_winding(curve - z)) > 0.5 else "-"


def s_functions(pair: ConformalPair, probes: Iterable[complex]) -> list:
    """Quadrature values of S_+/S_- (over g(S^1)) and S~_+/S~_- (over f(S^1)) at each probe.

    The side is ``+`` when the probe lies inside the curve.  Probes close to
    a curve, relative to the grid spacing times the curve speed, raise a
    warning because the trapezoid rule degrades there.
    """
    s = pair.samples()
    w, F, Fp, G, Gp = s["w"], s["f"], s["fp"], s["g"], s["gp"]
    h = 2 * np.pi / pair.m
    near_g = 10 * h * np.max(np.abs(Gp))
    near_f = 10 * h * np.max(np.abs(Fp))
    out = []
    for z in np.atleast_1d(np.asarray(list(probes) if not np.isscalar(probes) else [probes], dtype=complex)):
        z = complex(z)
        if min(np.min(np.abs(G - z)), np.min(np.abs(F - z))) == 0:
            raise DomainError("probe lies on a sampled curve")
        if np.min(np.abs(G - z)) < near_g or np.min(np.abs(F - z)) < near_f:
            warnings.warn(f"quadrature degraded: probe {z} is close to a sampled curve", RuntimeWarning, stacklevel=2)
        S = complex(np.mean(Gp / (F * (G - z)) * w))
        St = complex(np.mean(G * Fp / (F**2 * (F - z)) * w))
        out.append(SValues(z, S, _side(G, z), St, _side(F, z)))
    return out


def s_expansions(moms: MomentSet, z: complex) -> Dict[str, complex]:
    """The four S-functions at z from their moment expansions."""
    t, v, N = moms.t, moms.v, moms.order
    z = complex(z)
    n = np.arange(1, N + 1)
    tp = np.array([t[k] for k in n])
    tm = np.array([t[-k] for k in n])
    vp = np.array([v[k] for k in n])
    vm = np.array([v[-k] for k in n])
    return {
        "S+": complex(np.sum(n * tp * z ** (n - 1))),
        "S-": complex(-t[0] / z - np.sum(vp * z ** (-n - 1.0))),
        "S~+": complex(-np.sum(vm * z ** (n - 1))),
        "S~-": complex(-t[0] / z + np.sum(n * tm * z ** (-n - 1.0))),
    }


def jump_residual(pair: ConformalPair, moms: Optional[MomentSet] = None) -> Tuple[float, float]:
    """Sup-norm residuals of the two boundary jump relations on the grid.

    rho2 tests 1/f = sum n t_n g^{n-1} + t_0/g + sum v_n g^{-n-1};
    rho1 tests g/f^2 = -sum n t_{-n} f^{-n-1} + t_0/f - sum v_{-n} f^{n-1}.
    """
    moms = moms or moments(pair)
    s = pair.samples()
    F, G = s["f"], s["g"]
    t, v, N = moms.t, moms.v, moms.order
    r2 = 1 / F - t[0] / G
    r1 = G / F**2 - t[0] / F
    for n in range(1, N + 1):
        r2 = r2 - n * t[n] * G ** (n - 1) - v[n] * G ** (-n - 1.0)
        r1 = r1 + n * t[-n] * F ** (-n - 1.0) + v[-n] * F ** (n - 1)
    return float(np.max(np.abs(r2))), float(np.max(np.abs(r1)))


def phi_psi(moms: MomentSet) -> Tuple[ComplexSeries, ComplexSeries]:
    """Phi = sum v_n z^-n / n (window [-N, -1]) and Psi = sum v_{-n} z^n / n (window [1, N])."""
    N = moms.order
    n = np.arange(1, N + 1)
    phi = ComplexSeries(-N, -1, np.array([moms.v[k] / k for k in n])[::-1])
    psi = ComplexSeries(1, N, np.array([moms.v[-k] / k for k in n]))
    return phi, psi


def phi_psi_residuals(pair: ConformalPair, moms: MomentSet, probes_exterior: Iterable[complex], probes_interior: Iterable[complex]) -> Dict[str, float]:
    """Check Phi' = S_- + t_0/z outside g(S^1) and Psi' = -S~_+ inside f(S^1)."""
    phi, psi = phi_psi(moms)
    dphi, dpsi = phi.derivative(), psi.derivative()
    r_phi = 0.0
    for sv in s_functions(pair, list(probes_exterior)):
        if sv.S_side != "-":
            raise DomainError(f"probe {sv.z} is not outside g(S^1)")
        r_phi = max(r_phi, abs(dphi(sv.z) - sv.S - moms.t[0] / sv.z))
    r_psi = 0.0
    for sv in s_functions(pair, list(probes_interior)):
        if sv.S_tilde_side != "+":
            raise DomainError(f"probe {sv.z} is not inside f(S^1)")
        r_psi = max(r_psi, abs(dpsi(sv.z) + sv.S_tilde))
    return {"phi": float(r_phi), "psi": float(r_psi)}


def identity_pair(order: int = DEFAULT_ORDER, m: int = DEFAULT_GRID) -> ConformalPair:
    """The pair (w, w) carried with zero coefficients out to ``order`` so flows have room to grow."""
    f = ComplexSeries(1, order, np.r_[1.0, np.zeros(order - 1)])
    g = ComplexSeries(1 - order, 1, np.r_[np.zeros(order), 1.0])
    return ConformalPair(f, g, m)
