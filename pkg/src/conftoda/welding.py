"""Circle homeomorphisms, conformal welding, the Sigma locus and the Fourier hierarchy.

A :class:`CircleHomeo` stores samples of gamma and gamma^-1 on the grid.
``weld`` factors gamma = g^-1 o f by damped alternating Fourier
projections and ``compose_welding`` goes back.  On the welded locus the
Fourier times and duals of gamma and 1/gamma^-1 carry their own tau
function, whose derivatives along the vector fields d_n are checked here
by central differences through re-welding.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError, DomainError, LocusError
from .grunsky import GrunskyTable, faber, grunsky_table
from .pairspace import (
    DEFAULT_GRID,
    DEFAULT_MOMENT_ORDER,
    DEFAULT_ORDER,
    ConformalPair,
    MomentSet,
    normalize_pair,
    pinned_logs,
)
from .series import (
    ComplexSeries,
    circle_nodes,
    fourier_coefficients,
    invert_composition,
    newton_solve,
    reciprocal,
    reciprocal_at_infinity,
)
from .tau import FD2_EPS, FD_EPS, hessian_expected

UNIT_TOL = 1e-12
INVERSE_TOL = 1e-10
QS_BOUND = 3.0
LOCUS_TOL = 1e-8
TAIL_WARN = 1e-12
HOMEO_LAX_EPS = 1e-3
HOMEO_NOISE_FLOOR = 1e-8
SIGMA_TAIL_TOL = 1e-15
SIGMA_TAIL_TERMS = 4


# ----------------------------------------------------------------------
# circle homeomorphisms


def _phase_coefficients(gamma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unwrapped phase theta_j of gamma and the Fourier coefficients of the periodic part theta - phi."""
    m = len(gamma)
    phi = 2 * np.pi * np.arange(m) / m
    theta = np.unwrap(np.angle(gamma))
    pc = np.fft.fft(theta - phi) / m
    pc[m // 2] = 0.5 * pc[m // 2]
    return theta, pc


def _eval_periodic(pc: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Value and derivative of the real trigonometric interpolant with coefficients ``pc``."""
    m = len(pc)
    k = np.fft.fftfreq(m, 1.0 / m)
    k[m // 2] = m // 2
    E = np.exp(1j * np.outer(phi, k))
    ny = np.exp(-1j * phi * (m // 2)) * pc[m // 2]
    val = np.real(E @ pc + ny)
    der = np.real(E @ (1j * k * pc) - 1j * (m // 2) * ny)
    return val, der


def _invert_samples(gamma: np.ndarray, iters: int = 30) -> np.ndarray:
    """gamma^-1 on the grid by Newton's method on the trigonometric interpolant of the phase."""
    m = len(gamma)
    theta, pc = _phase_coefficients(gamma)
    phi_grid = 2 * np.pi * np.arange(m) / m
    target = theta[0] + np.mod(phi_grid - theta[0], 2 * np.pi)
    th_ext = np.append(theta, theta[0] + 2 * np.pi)
    ph_ext = np.append(phi_grid, 2 * np.pi)
    x = np.interp(target, th_ext, ph_ext)
    for _ in range(iters):
        val, der = _eval_periodic(pc, x)
        step = (x + val - target) / (1 + der)
        x = x - step
        if np.max(np.abs(step)) < 1e-13:
            val, der = _eval_periodic(pc, x)
            x = x - (x + val - target) / (1 + der)
            break
    return np.exp(1j * x)


@dataclass(frozen=True, eq=False)
class CircleHomeo:
    """Samples of an orientation-preserving circle homeomorphism and its inverse on the m-point grid."""

    m: int
    gamma: np.ndarray
    gamma_inv: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=complex))
        object.__setattr__(self, "gamma_inv", np.asarray(self.gamma_inv, dtype=complex))
        if self.gamma.shape != (self.m,) or self.gamma_inv.shape != (self.m,):
            raise DomainError("sample arrays must have length m")
        if self.check:
            self.validate()

    # constructors
    @classmethod
    def from_callables(cls, gamma: Callable, gamma_inv: Callable, m: int = DEFAULT_GRID) -> "CircleHomeo":
        w = circle_nodes(m)
        return cls(m, gamma(w), gamma_inv(w))

    @classmethod
    def from_samples(cls, gamma: np.ndarray) -> "CircleHomeo":
        gamma = np.asarray(gamma, dtype=complex)
        return cls(len(gamma), gamma, _invert_samples(gamma))

    @classmethod
    def from_phase(cls, u: np.ndarray) -> "CircleHomeo":
        """gamma(w) = w exp(i u(w)) for real phase samples u."""
        u = np.asarray(u, dtype=float)
        return cls.from_samples(circle_nodes(len(u)) * np.exp(1j * u))

    @classmethod
    def identity(cls, m: int = DEFAULT_GRID) -> "CircleHomeo":
        w = circle_nodes(m)
        return cls(m, w, w.copy())

    # invariants
    def validate(self) -> None:
        if self.m < 8 or self.m & (self.m - 1):
            raise DomainError(f"grid size must be a power of two >= 8, got {self.m}")
        for name, s in (("gamma", self.gamma), ("gamma^-1", self.gamma_inv)):
            dev = float(np.max(np.abs(np.abs(s) - 1)))
            if dev > UNIT_TOL:
                raise DomainError(f"{name} leaves the unit circle by {dev:.1e}")
            ph = np.unwrap(np.angle(np.append(s, s[0])))
            steps = np.diff(ph)
            if np.min(steps) <= 0 or abs(ph[-1] - ph[0] - 2 * np.pi) > 1e-8:
                raise DomainError(f"{name} is not orientation preserving and injective on the grid")
        dev = self.inverse_defect()
        if dev > INVERSE_TOL:
            raise DomainError(f"gamma o gamma^-1 differs from the identity by {dev:.1e}")

    def inverse_defect(self) -> float:
        """sup |gamma(gamma^-1(w_j)) - w_j| with gamma evaluated through its phase interpolant."""
        return float(np.max(np.abs(self(self.gamma_inv) - self.nodes)))

    def __call__(self, z) -> np.ndarray:
        """Trigonometric interpolant of gamma at points of the unit circle."""
        _, pc = _phase_coefficients(self.gamma)
        phi = np.angle(np.asarray(z, dtype=complex))
        return np.exp(1j * (phi + _eval_periodic(pc, np.atleast_1d(phi))[0].reshape(np.shape(phi))))

    @property
    def nodes(self) -> np.ndarray:
        return circle_nodes(self.m)

    def fourier(self, window: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        """Coefficients of gamma and of 1/gamma^-1 over ``window``."""
        return fourier_coefficients(self.gamma, window), fourier_coefficients(1 / self.gamma_inv, window)

    def quasisymmetry(self) -> float:
        """Quasisymmetry proxy: extreme ratio of adjacent image chords for one grid step."""
        g = self.gamma
        fwd = np.abs(np.roll(g, -1) - g)
        bwd = np.abs(g - np.roll(g, 1))
        r = fwd / bwd
        return float(max(np.max(r), 1 / np.min(r)))

    def perturb(self, V: np.ndarray, eps: float) -> "CircleHomeo":
        """gamma exp(i eps V) for real samples V; the inverse is recomputed."""
        return CircleHomeo.from_samples(self.gamma * np.exp(1j * eps * np.asarray(V, dtype=float)))

    def to_json(self) -> dict:
        return {"m": self.m, "gamma_re": self.gamma.real.tolist(), "gamma_im": self.gamma.imag.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "CircleHomeo":
        g = np.asarray(d["gamma_re"], dtype=float) + 1j * np.asarray(d["gamma_im"], dtype=float)
        if len(g) != int(d["m"]):
            raise DomainError("m does not match the sample count")
        return cls.from_samples(g)

    def max_abs_diff(self, other: "CircleHomeo") -> float:
        return float(np.max(np.abs(self.gamma - other.gamma)))


def random_phase(rng: np.random.Generator, m: int = DEFAULT_GRID, amplitude: float = 0.05, degree: int = 4) -> np.ndarray:
    """Real trigonometric polynomial samples with sup norm ``amplitude``."""
    phi = 2 * np.pi * np.arange(m) / m
    c = (rng.standard_normal(degree) + 1j * rng.standard_normal(degree)) / (1 + np.arange(degree)) ** 2
    u = sum(np.real(c[k] * np.exp(1j * (k + 1) * phi)) for k in range(degree))
    return amplitude * u / np.max(np.abs(u))


# ----------------------------------------------------------------------
# welding


@dataclass(frozen=True, eq=False)
class WeldResult:
    pair: ConformalPair
    iterations: int
    defect: float
    tail: float


def _modes(values: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return fourier_coefficients(values, (lo, hi))


def weld_report(
    homeo: CircleHomeo,
    *,
    tol: float = 1e-13,
    damping: float = 1.0,
    max_iters: int = 500,
    order: int = DEFAULT_ORDER,
    initial: Optional[ComplexSeries] = None,
    qs_bound: float = QS_BOUND,
) -> WeldResult:
    """Welding by damped alternating projections, with iteration diagnostics.

    The f-side unknown F (modes 1..m/4, F_1 = 1) is updated by
    F <- Pi_{>=1}[(Pi_{<=1}[F o gamma^-1]) o gamma].  At the fixed point
    G = Pi_{<=1}[F o gamma^-1] satisfies F = G o gamma; both are scaled by
    r with r^2 G_1 = 1 and Re r >= 0.
    """
    if not 0 < damping <= 1:
        raise DomainError("damping must lie in (0, 1]")
    qs = homeo.quasisymmetry()
    if qs > qs_bound:
        raise DomainError(f"quasisymmetry proxy {qs:.2f} exceeds the bound {qs_bound}")
    m = homeo.m
    P = m // 4
    kf = np.arange(1, P + 1)
    kg = np.arange(-P, 2)
    A = homeo.gamma_inv[:, None] ** kf[None, :]
    B = homeo.gamma[:, None] ** kg[None, :]
    F = np.zeros(P, dtype=complex)
    if initial is None:
        F[0] = 1.0
    else:
        c = initial.coeff_array((1, P))
        F = c / c[0]
    defect = np.inf
    for it in range(1, max_iters + 1):
        G = _modes(A @ F, -P, 1)
        Fn = _modes(B @ G, 1, P)
        Fn = Fn / Fn[0]
        defect = float(np.max(np.abs(Fn - F)))
        F = (1 - damping) * F + damping * Fn
        F = F / F[0]
        if defect < tol:
            break
    else:
        raise ConvergenceError(f"welding did not converge in {max_iters} sweeps (defect {defect:.1e})", defect=defect, iterations=max_iters)
    G = _modes(A @ F, -P, 1)
    r = np.sqrt(1.0 / G[-1])
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    K = min(order, P)
    tail = float(max(np.max(np.abs(F[K:])), np.max(np.abs(G[: P - K]))) * abs(r)) if K < P else 0.0
    if tail > TAIL_WARN:
        warnings.warn(f"welded series tail {tail:.1e} beyond order {K}")
    f = ComplexSeries(1, K, r * F[:K])
    g = ComplexSeries(-K, 1, r * G[P - K :])
    pair = ConformalPair(f, g, m)
    return WeldResult(pair, it, defect, tail)


def weld(homeo: CircleHomeo, *, tol: float = 1e-13, damping: float = 1.0, max_iters: int = 500,
         order: int = DEFAULT_ORDER, initial: Optional[ComplexSeries] = None, qs_bound: float = QS_BOUND) -> ConformalPair:
    """The normalized pair (f, g) with g^-1 o f = gamma on the grid."""
    return weld_report(homeo, tol=tol, damping=damping, max_iters=max_iters, order=order, initial=initial, qs_bound=qs_bound).pair


def welding_defect(homeo: CircleHomeo, pair: ConformalPair) -> float:
    """sup |f(w_j) - g(gamma(w_j))| on the grid."""
    return float(np.max(np.abs(pair.f(homeo.nodes) - pair.g(homeo.gamma))))


def _circle_root(series: ComplexSeries, target: np.ndarray, m_dense: int) -> np.ndarray:
    dense = circle_nodes(m_dense)
    vals = series(dense)
    idx = np.argmin(np.abs(target[:, None] - vals[None, :]), axis=1)
    x = newton_solve(series, target, dense[idx])
    if np.max(np.abs(series(x) - target)) > 1e-10 * max(1.0, float(np.max(np.abs(target)))):
        raise LocusError("root finding on the image curve did not converge")
    return x


def compose_welding(pair: ConformalPair, tol: float = LOCUS_TOL) -> CircleHomeo:
    """gamma = g^-1 o f on the grid; rejects pairs whose image curves differ by more than ``tol``."""
    s = pair.samples()
    x = _circle_root(pair.g, s["f"], 8 * pair.m)
    y = _circle_root(pair.f, s["g"], 8 * pair.m)
    off = float(max(np.max(np.abs(np.abs(x) - 1)), np.max(np.abs(np.abs(y) - 1))))
    if off > tol:
        raise LocusError(f"f(S^1) and g(S^1) differ: preimages leave the circle by {off:.1e}")
    return CircleHomeo(pair.m, x / np.abs(x), y / np.abs(y))


# ----------------------------------------------------------------------
# Sigma locus


def sigma_pair(g: ComplexSeries, m: int = DEFAULT_GRID, order: Optional[int] = None) -> ConformalPair:
    """(1/conj(g(1/conj w)), g), rescaled by a unimodular factor to a_1 b = 1.

    f is an infinite series.  With ``order=None`` its truncation order is
    doubled from DEFAULT_ORDER (up to m/2) until the last SIGMA_TAIL_TERMS
    coefficients fall below SIGMA_TAIL_TOL relative to a_1.
    """
    refl = g.conj().reflect()  # conj(g(1/conj w)) as a series in w
    if order is not None:
        return normalize_pair(reciprocal(refl, (1, order)), g, m)
    K = DEFAULT_ORDER
    while True:
        f = reciprocal(refl, (1, K))
        tail = np.max(np.abs(f.coeff_array((K - SIGMA_TAIL_TERMS + 1, K))))
        if tail <= SIGMA_TAIL_TOL * abs(f.coeff(1)) or 2 * K > m // 2:
            return normalize_pair(f, g, m)
        K *= 2


def sigma_transform(pair: ConformalPair) -> ConformalPair:
    """(f, g) -> (1/conj(g(1/conj w)), 1/conj(f(1/conj w)))."""
    K = pair.order
    f_new = reciprocal(pair.g.conj().reflect(), (1, K))
    g_new = reciprocal_at_infinity(pair.f.conj().reflect(), (-K, 1))
    return ConformalPair(f_new, g_new, pair.m)


def harmonic_moments(g: ComplexSeries, N: int, m: int = DEFAULT_GRID) -> MomentSet:
    """Harmonic moments of the domain bounded by g(S^1), as contour integrals over the curve.

    t_n = (1/2 pi i n) oint z^-n conj(z) dz, v_n = (1/2 pi i) oint z^n conj(z) dz,
    t_{-n} = -conj(t_n), v_{-n} = -conj(v_n), and v_0 from the contour form
    (1/2 pi i) oint conj(z) (log|z|^2 - 1) dz of the interior log-area integral.
    """
    w = circle_nodes(m)
    z = g(w)
    dz = g.derivative()(w) * w
    zb = np.conj(z)
    t, v = {0: complex(np.mean(zb * dz))}, {}
    v[0] = complex(np.mean(zb * (np.log(np.abs(z) ** 2) - 1) * dz))
    zn = np.ones_like(z)
    for n in range(1, N + 1):
        zn = zn * z
        t[n] = complex(np.mean(zb * dz / zn)) / n
        v[n] = complex(np.mean(zb * dz * zn))
        t[-n] = -np.conj(t[n])
        v[-n] = -np.conj(v[n])
    return MomentSet(N, t, v, None, "harmonic")


def sigma_defect(moms: MomentSet) -> float:
    """max over n != 0 of |conj(t_n) + t_-n|, together with |Im t_0|."""
    d = [abs(np.conj(moms.t[n]) + moms.t[-n]) for n in range(1, moms.order + 1)]
    return float(max(d + [abs(moms.t[0].imag)]))


# ----------------------------------------------------------------------
# Fourier times on the welded locus


@dataclass(frozen=True, eq=False)
class FourierMoments:
    """Fourier times t[n] and duals v[n], |n| <= order, with the c_0 coefficient of 1/gamma^-1."""

    order: int
    t: Dict[int, complex]
    v: Dict[int, complex]
    c0: complex
    source: str = "fourier"

    @property
    def c0_defect(self) -> float:
        return abs(self.c0 - self.t[0])

    def to_json(self) -> dict:
        key = lambda d: [[n, float(d[n].real), float(d[n].imag)] for n in sorted(d)]  # noqa: E731
        return {"t": key(self.t), "v": key(self.v), "c0": [float(self.c0.real), float(self.c0.imag)]}

    @classmethod
    def from_json(cls, d: dict, source: str = "json") -> "FourierMoments":
        t = {int(n): complex(re, im) for n, re, im in d["t"]}
        v = {int(n): complex(re, im) for n, re, im in d["v"]}
        return cls(max(abs(n) for n in t), t, v, complex(*d["c0"]), source)


def fourier_moments(homeo: CircleHomeo, pair: ConformalPair, N: int = DEFAULT_MOMENT_ORDER,
                    c0_tol: float = 1e-9, locus_tol: float = 1e-8) -> FourierMoments:
    """Fourier times and duals of gamma and 1/gamma^-1, with v_0 from its contour definition."""
    if N > homeo.m // 4:
        raise DomainError(f"moment order {N} too high for grid {homeo.m}")
    wd = welding_defect(homeo, pair)
    if wd > locus_tol:
        raise LocusError(f"pair does not weld gamma: defect {wd:.1e}")
    cg = fourier_coefficients(homeo.gamma, (-N, N + 1))
    ch = fourier_coefficients(1 / homeo.gamma_inv, (-N - 1, N))
    g_at = lambda k: cg[k + N]  # noqa: E731
    h_at = lambda k: ch[k + N + 1]  # noqa: E731
    t, v = {0: complex(g_at(1))}, {}
    for n in range(1, N + 1):
        t[-n] = complex(-g_at(1 - n) / n)
        v[-n] = complex(-g_at(n + 1))
        t[n] = complex(h_at(n - 1) / n)
        v[n] = complex(h_at(-n - 1))
    c0 = complex(h_at(-1))
    if abs(c0 - t[0]) > c0_tol:
        raise DomainError(f"c_0 = {c0} differs from t_0 = {t[0]}: inconsistent data")
    s = pair.samples()
    w = s["w"]
    lg, lf = pinned_logs(pair, s)
    gam, ginv = homeo.gamma, homeo.gamma_inv
    v[0] = complex(np.mean((lf * gam / w**2 - lg / ginv) * w) - np.mean((w / ginv) * (s["gp"] / s["g"]) * w))
    return FourierMoments(N, t, v, c0, "fourier")


def v0_heuristic(homeo: CircleHomeo) -> complex:
    """The formal expression -(1/2 pi i) oint log w (gamma/w^2 - 1/gamma^-1) dw, log w = i theta on [0, 2 pi).

    Reported for comparison only.  With a cut on the circle the integral
    drops jump terms and does not reproduce v_0; for gamma = id the
    integrand vanishes while v_0 = -1.
    """
    w = homeo.nodes
    lw = 1j * 2 * np.pi * np.arange(homeo.m) / homeo.m
    return complex(-np.mean(lw * (homeo.gamma / w**2 - 1 / homeo.gamma_inv) * w))


def log_tau_homeo(homeo: CircleHomeo, pair: ConformalPair, fm: Optional[FourierMoments] = None,
                  N: int = DEFAULT_MOMENT_ORDER) -> complex:
    """t0 v0/2 - t0^2/4 plus the two circle integrals built from phi and psi."""
    fm = fm or fourier_moments(homeo, pair, N)
    N = fm.order
    phi = ComplexSeries.from_dict({-n: fm.v[n] / n for n in range(1, N + 1)}, (-N, -1))
    psi = ComplexSeries.from_dict({n: fm.v[-n] / n for n in range(1, N + 1)}, (1, N))
    w = homeo.nodes
    tail = max(abs(fm.v[N]), abs(fm.v[-N]))
    if tail > 1e-10:
        warnings.warn(f"phi/psi tail {tail:.1e} at order {N}")
    i1 = np.mean((1 / homeo.gamma_inv) * (w * phi.derivative()(w) + 2 * phi(w)) * w)
    i2 = np.mean(homeo.gamma / w**2 * (w * psi.derivative()(w) - 2 * psi(w)) * w)
    t0, v0 = fm.t[0], fm.v[0]
    return complex(t0 * v0 / 2 - t0**2 / 4 + 0.25 * i1 + 0.25 * i2)


def log_tau_homeo_sum(fm: FourierMoments) -> complex:
    """The same tau as a sum over Fourier moments: t0 v0/2 - t0^2/4 + (1/4) sum (2 - n)(t_n v_n + t_-n v_-n)."""
    s = sum((2 - n) * (fm.t[n] * fm.v[n] + fm.t[-n] * fm.v[-n]) for n in range(1, fm.order + 1))
    return complex(fm.t[0] * fm.v[0] / 2 - fm.t[0] ** 2 / 4 + 0.25 * s)


# ----------------------------------------------------------------------
# vector fields d_n and their flows


def homeo_variation(homeo: CircleHomeo, pair: ConformalPair, n: int, polys=None) -> np.ndarray:
    """Samples of d_n gamma: w^2 P_n'(f) f' (n >= 1), w^2 Q_|n|'(f) f' (n <= -1), w^2 f'/f (n = 0)."""
    s = pair.samples()
    w, F, Fp = s["w"], s["f"], s["fp"]
    if n == 0:
        return w**2 * Fp / F
    polys = polys or faber(pair.f, pair.g, abs(n))
    poly = polys.p(n) if n > 0 else polys.q(-n)
    return w**2 * poly.derivative()(F) * Fp


@dataclass(frozen=True, eq=False)
class HomeoState:
    homeo: CircleHomeo
    pair: ConformalPair


class HomeoFlows:
    """Flow provider for the complexified fields d_n on the welded locus.

    d_n gamma = i gamma V with complex V; the directional derivative is the
    real derivative along gamma exp(i eps Re V) plus i times the one along
    gamma exp(i eps Im V), each by central differences with re-welding.
    The Lax series are the Riemann maps (g^-1, f^-1).
    """

    def __init__(self, homeo: CircleHomeo, pair: Optional[ConformalPair] = None, order: int = DEFAULT_ORDER,
                 weld_tol: float = 1e-14):
        pair = pair or weld(homeo, order=order)
        self.base = HomeoState(homeo, pair)
        self.order = order
        self.weld_tol = weld_tol
        self._cache: Dict[Tuple[int, float], list] = {}

    def _weld(self, h: CircleHomeo) -> HomeoState:
        return HomeoState(h, weld(h, tol=self.weld_tol, order=self.order, initial=self.base.pair.f))

    def stencil(self, n: int, eps: float) -> list:
        key = (n, eps)
        if key not in self._cache:
            b = self.base
            V = homeo_variation(b.homeo, b.pair, n) / (1j * b.homeo.gamma)
            out = []
            for wgt, part in ((1.0, V.real), (1j, V.imag)):
                out.append((wgt, self._weld(b.homeo.perturb(part, eps))))
                out.append((-wgt, self._weld(b.homeo.perturb(part, -eps))))
            self._cache[key] = out
        return self._cache[key]

    def lax_series(self, state: HomeoState) -> Tuple[ComplexSeries, ComplexSeries]:
        K = self.order
        return invert_composition(state.pair.g, K), invert_composition(state.pair.f, K)

    def derivative(self, n: int, eps: float, quantity: Callable) -> complex:
        from .toda import fd_derivative

        return fd_derivative(self, n, eps, quantity)


def homeo_duality_matrix(system: HomeoFlows, indices: Sequence[int], eps: float = FD_EPS) -> np.ndarray:
    """J[i, j] = FD d t_{indices[i]} along d_{indices[j]}."""
    N = max(3, max(abs(i) for i in indices))
    J = np.zeros((len(indices), len(indices)), dtype=complex)
    for j, n in enumerate(indices):
        st = system.stencil(n, eps)
        moms = [(wgt, fourier_moments(s.homeo, s.pair, N)) for wgt, s in st]
        for i, mm in enumerate(indices):
            J[i, j] = sum(wgt * fm.t[mm] for wgt, fm in moms) / (2 * eps)
    return J


def homeo_dual_variation(system: HomeoFlows, n: int, indices: Sequence[int], eps: float = FD_EPS) -> Dict[int, complex]:
    """FD d v_m along d_n for m in indices."""
    N = max(3, max(abs(i) for i in list(indices) + [n]))
    moms = [(wgt, fourier_moments(s.homeo, s.pair, N)) for wgt, s in system.stencil(n, eps)]
    return {mm: complex(sum(wgt * fm.v[mm] for wgt, fm in moms) / (2 * eps)) for mm in indices}


def homeo_tau_gradient_fd(system: HomeoFlows, n: int, eps: float = FD_EPS, N: int = DEFAULT_MOMENT_ORDER) -> complex:
    return complex(sum(wgt * log_tau_homeo(s.homeo, s.pair, N=N) for wgt, s in system.stencil(n, eps)) / (2 * eps))


def check_homeo_gradient(system: HomeoFlows, n: int, eps: float = FD_EPS, N: int = DEFAULT_MOMENT_ORDER) -> float:
    """|FD d log tau along d_n - v_n|."""
    b = system.base
    v = fourier_moments(b.homeo, b.pair, max(abs(n), 1)).v[n]
    return float(abs(homeo_tau_gradient_fd(system, n, eps, N) - v))


def homeo_hessian_fd(system: HomeoFlows, m: int, n: int, eps: float = FD2_EPS, inner_eps: float = FD_EPS,
                     N: int = DEFAULT_MOMENT_ORDER) -> complex:
    """Nested central difference: d_n of the FD gradient of log tau along d_m."""
    total = 0j
    for wgt, s in system.stencil(n, eps):
        sub = HomeoFlows(s.homeo, s.pair, system.order, system.weld_tol)
        total += wgt * homeo_tau_gradient_fd(sub, m, inner_eps, N)
    return complex(total / (2 * eps))


def forward_table(pair: ConformalPair, N: int) -> GrunskyTable:
    """Grunsky table of (f, g) itself, which governs the second derivatives on the welded locus."""
    return grunsky_table(pair.f, pair.g, N)


def check_homeo_hessian(system: HomeoFlows, m: int, n: int, eps: float = FD2_EPS, table: Optional[GrunskyTable] = None) -> float:
    table = table or forward_table(system.base.pair, max(abs(m), abs(n), 1))
    return float(abs(homeo_hessian_fd(system, m, n, eps) - hessian_expected(table, m, n)))


def homeo_lax_order(system: HomeoFlows, n: int, eps: float = HOMEO_LAX_EPS, which: str = "L") -> Dict[str, float]:
    """Order-of-accuracy test of the Lax equation for (g^-1, f^-1) along the d_n fields.

    Every stencil point is re-welded, so the difference quotients carry
    noise near 1e-9; the default step keeps the O(eps^2) part well above it.
    """
    from .toda import lax_order

    return lax_order(system, n, eps, which, floor=HOMEO_NOISE_FLOOR)
