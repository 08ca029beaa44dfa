"""Generalized Grunsky coefficients and Faber polynomials of a pair of maps.

The interior map ``F = alpha_1 z + ...`` and the exterior map
``G = beta z + beta_0 + ...`` determine a symmetric table ``b[m, n]``,
``m, n in [-N, N]``, through three double expansions:

    log((G(z) - G(zeta)) / (z - zeta)) = log beta - sum_{m,n>=1} b[m,n] z^-m zeta^-n
    log((G(z) - F(zeta)) / z)          = log beta - sum_{m>=1,n>=0} b[m,-n] z^-m zeta^n
    log((F(z) - F(zeta)) / (z - zeta)) = - sum_{m,n>=0} b[-m,-n] z^m zeta^n

Coefficients are extracted by trapezoid quadrature on a torus of sampling
contours.  A map may be given as a series (``SeriesMap``), or as the inverse
of a series (``InverseMap``); for the latter the contour is the image curve
``s(rho * S^1)`` and no series inversion is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import DomainError
from .series import (
    ComplexSeries,
    circle_nodes,
    compose,
    invert_composition,
    log_ratio,
    power,
    project,
    reciprocal,
    reciprocal_at_infinity,
    tracked_log,
)

EXTERIOR_RADII = (1.25, 1.1)
INTERIOR_RADII = (0.8, 0.9)


# ----------------------------------------------------------------------
# maps as sampled contours


@dataclass(frozen=True)
class SeriesMap:
    """The map ``z -> series(z)``, sampled on ``|z| = r``."""

    series: ComplexSeries

    def sample(self, m: int, radius: float):
        u = circle_nodes(m, 1.0)
        z = radius * u
        return z, self.series(z), z / m

    def leading(self) -> complex:
        s = self.series
        return s.coeff(1)


@dataclass(frozen=True)
class InverseMap:
    """The map ``s^{-1}``, sampled on the curve ``z = s(rho u)``.

    ``rho`` plays the role of the radius; the function value there is
    ``rho u`` exactly.
    """

    series: ComplexSeries

    def sample(self, m: int, radius: float):
        u = circle_nodes(m, 1.0)
        x = radius * u
        z = self.series(x)
        dz = self.series.derivative()(x)
        return z, x, radius * dz * u / m

    def leading(self) -> complex:
        return 1.0 / self.series.coeff(1)


MapLike = Union[SeriesMap, InverseMap, ComplexSeries]


def _as_map(x: MapLike):
    if isinstance(x, ComplexSeries):
        return SeriesMap(x)
    return x


# ----------------------------------------------------------------------
# table


@dataclass(frozen=True, eq=False)
class GrunskyTable:
    """Symmetric table ``b[m, n]`` for ``|m|, |n| <= order``.

    ``defects`` records the consistency checks made while building it:
    asymmetry of the diagonal blocks before symmetrization and the
    disagreement of overlapping row-0 entries between expansions.
    """

    order: int
    values: np.ndarray = field(repr=False)
    defects: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (2 * self.order + 1, 2 * self.order + 1):
            raise DomainError("table shape does not match its order")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, m: int, n: int) -> complex:
        N = self.order
        if abs(m) > N or abs(n) > N:
            raise IndexError(f"b[{m},{n}] outside order {N}")
        return complex(self.values[m + N, n + N])

    b = __call__

    @property
    def blocks(self):
        """The four sub-blocks (++, +-, -+, --) including row/column 0 in the signed blocks."""
        N = self.order
        V = self.values
        return {
            "++": V[N + 1 :, N + 1 :],
            "+-": V[N + 1 :, N::-1],
            "-+": V[N::-1, N + 1 :],
            "--": V[N::-1, N::-1],
        }

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))

    def to_json(self) -> dict:
        N = self.order
        entries = []
        for m in range(-N, N + 1):
            for n in range(-N, m + 1):
                z = self(m, n)
                entries.append([m, n, float(z.real), float(z.imag)])
        return {"order": N, "entries": entries}

    @classmethod
    def from_json(cls, d: dict) -> "GrunskyTable":
        N = int(d["order"])
        V = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
        for m, n, re, im in d["entries"]:
            V[m + N, n + N] = V[n + N, m + N] = complex(re, im)
        return cls(N, V)


def _log_matrix(Q: np.ndarray) -> np.ndarray:
    """Continuous log of samples on a torus; raises if it winds along either axis."""
    if np.min(np.abs(Q)) < 1e-300 or not np.all(np.isfinite(Q)):
        raise DomainError("radii outside univalence annulus: log argument vanishes on the sampling torus")
    ang = np.angle(Q)
    col0 = np.unwrap(np.append(ang[:, 0], ang[0, 0]))
    rows = np.unwrap(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
    rows = rows + (col0[:-1] - rows[:, 0])[:, None]
    wind_z = (col0[-1] - col0[0]) / (2 * np.pi)
    wind_zeta = (rows[:, -1] - rows[:, 0]) / (2 * np.pi)
    jump_z = np.max(np.abs(np.diff(np.concatenate([rows[:, :-1], rows[:1, :-1]], axis=0), axis=0)))
    if abs(wind_z) > 0.5 or np.max(np.abs(wind_zeta)) > 0.5 or jump_z > np.pi / 2:
        raise DomainError("radii outside univalence annulus: sampled log winds around the torus")
    return np.log(np.abs(Q)) + 1j * rows[:, :-1]


def _pin(L: np.ndarray, const: complex, target: complex) -> np.ndarray:
    k = np.round((const.imag - target.imag) / (2 * np.pi))
    return L - 2j * np.pi * k


def _block(
    Zm: Tuple[np.ndarray, np.ndarray, np.ndarray],
    Zn: Tuple[np.ndarray, np.ndarray, np.ndarray],
    kind: str,
    exps_z: np.ndarray,
    exps_zeta: np.ndarray,
    target: complex,
) -> np.ndarray:
    """Coefficients ``c[i, k]`` of ``z^exps_z[i] zeta^exps_zeta[k]`` of the sampled log."""
    z, vz, wz = Zm
    x, vx, wx = Zn
    Z, X = z[:, None], x[None, :]
    VZ, VX = vz[:, None], vx[None, :]
    if kind == "diff":
        Q = (VZ - VX) / (Z - X)
    elif kind == "mixed":
        Q = (VZ - VX) / Z
    else:
        raise ValueError(kind)
    L = _log_matrix(Q)
    const = np.sum(L * (wz / z)[:, None] * (wx / x)[None, :])
    L = _pin(L, complex(const), target)
    A = (z[None, :] ** (-exps_z[:, None] - 1)) * wz[None, :]
    B = (x[None, :] ** (-exps_zeta[:, None] - 1)) * wx[None, :]
    return A @ L @ B.T


def _line_log(Zm, exps: np.ndarray, target: complex) -> np.ndarray:
    z, vz, wz = Zm
    L = tracked_log(vz / z, anchor=target)
    const = np.sum(L * wz / z)
    L = L - 2j * np.pi * np.round((const.imag - target.imag) / (2 * np.pi))
    A = (z[None, :] ** (-exps[:, None] - 1)) * wz[None, :]
    return A @ L


def grunsky_table(
    F: MapLike,
    G: MapLike,
    N: int,
    *,
    m: int = 128,
    exterior_radii: Tuple[float, float] = EXTERIOR_RADII,
    interior_radii: Tuple[float, float] = INTERIOR_RADII,
    tol: float = 1e-11,
    max_widen: int = 8,
) -> GrunskyTable:
    """Grunsky coefficients of (F, G) for ``|m|, |n| <= N``.

    ``F`` is the interior map (value 0 at 0) and ``G`` the exterior map (simple
    pole at infinity).  Either may be a series or an :class:`InverseMap`.
    Row and column 0 are obtained twice, from the two-variable expansions and
    from ``log(G/z)``, ``log(F/z)``; they are averaged when they agree within
    ``tol`` and the disagreement is recorded in ``defects``.
    """
    if N < 1:
        raise DomainError("order must be >= 1")
    if m < 4 * N:
        raise DomainError(f"torus grid {m} too coarse for order {N}")
    F, G = _as_map(F), _as_map(G)
    alpha, beta = F.leading(), G.leading()
    if alpha == 0 or beta == 0:
        raise DomainError("leading coefficient is zero")
    logb = complex(np.log(beta))

    ge0, ge1 = G.sample(m, exterior_radii[0]), G.sample(m, exterior_radii[1])
    fi0, fi1 = F.sample(m, interior_radii[0]), F.sample(m, interior_radii[1])
    pos = np.arange(1, N + 1)
    nonneg = np.arange(0, N + 1)

    # G-G: coefficient of z^-m zeta^-n
    cgg = _block(ge0, ge1, "diff", -pos, -pos, logb)
    bpp = -cgg
    # G-F: coefficient of z^-m zeta^n, n >= 0.  The contour pair must keep
    # G(z) away from F(zeta); widen it until the sampled values separate.
    gm, fm = ge0, fi0
    R, r = exterior_radii[0], interior_radii[0]
    for _ in range(max_widen):
        if np.min(np.abs(gm[1])) > 1.05 * np.max(np.abs(fm[1])):
            break
        R, r = R * 1.15, r / 1.15
        gm, fm = G.sample(m, R), F.sample(m, r)
    cgf = _block(gm, fm, "mixed", -np.arange(0, N + 1), nonneg, logb)
    bpm = -cgf[1:, :]  # b[m, -n], m >= 1, n >= 0
    # F-F: coefficient of z^m zeta^n, m, n >= 0
    cff = _block(fi0, fi1, "diff", nonneg, nonneg, -logb)
    bmm = -cff  # b[-m, -n]

    defects = {
        "asym++": float(np.max(np.abs(bpp - bpp.T))),
        "asym--": float(np.max(np.abs(bmm - bmm.T))),
        "mixed_row0": float(np.max(np.abs(cgf[0, 1:]))),
    }

    # the same mixed block with the interior contour moved
    cgf2 = _block(gm, F.sample(m, 0.9 * r), "mixed", -np.arange(0, N + 1), nonneg, logb)
    defects["mixed_radii"] = float(np.max(np.abs(cgf2 - cgf)))

    # row 0 from the one-variable expansions
    lg = _line_log(ge0, -pos, logb)  # log(G/z) coefficients of z^-m
    lf = _line_log(fi0, pos, -logb)  # log(F/z) coefficients of z^m
    b0p_line = -lg
    b0m_line = -lf
    defects["row0+"] = float(np.max(np.abs(b0p_line - bpm[:, 0])))
    defects["row0-"] = float(np.max(np.abs(b0m_line - bmm[0, 1:])))

    b0p = bpm[:, 0]
    if defects["row0+"] <= tol * max(1.0, np.max(np.abs(b0p))):
        b0p = 0.5 * (b0p + b0p_line)
    b0m = bmm[0, 1:]
    if defects["row0-"] <= tol * max(1.0, np.max(np.abs(b0m))):
        b0m = 0.5 * (b0m + b0m_line)

    V = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
    idx = lambda k: k + N  # noqa: E731
    P = idx(pos)
    V[np.ix_(P, P)] = 0.5 * (bpp + bpp.T)
    Mneg = idx(-nonneg)
    V[np.ix_(Mneg, Mneg)] = 0.5 * (bmm + bmm.T)
    V[np.ix_(P, Mneg)] = bpm
    V[np.ix_(Mneg, P)] = bpm.T
    V[P, N] = V[N, P] = b0p
    V[idx(-pos), N] = V[N, idx(-pos)] = b0m
    V[N, N] = logb
    return GrunskyTable(N, V, defects)


def grunsky_table_of_inverse_pair(f: ComplexSeries, g: ComplexSeries, N: int, **kw) -> GrunskyTable:
    """Grunsky table of ``(f^{-1}, g^{-1})`` without inverting any series."""
    return grunsky_table(InverseMap(f), InverseMap(g), N, **kw)


# ----------------------------------------------------------------------
# Faber polynomials


@dataclass(frozen=True, eq=False)
class FaberPolys:
    """``P[n-1]`` is P_n (window [0, n]); ``Q[n-1]`` is Q_n (window [-n, 0])."""

    P: List[ComplexSeries]
    Q: List[ComplexSeries]

    def p(self, n: int) -> ComplexSeries:
        return self.P[n - 1]

    def q(self, n: int) -> ComplexSeries:
        return self.Q[n - 1]

    @property
    def order(self) -> int:
        return len(self.P)


def _faber_from_generators(ginv: ComplexSeries, finv_recip: ComplexSeries, N: int) -> FaberPolys:
    """P_n = (ginv^n)_{>=0}, Q_n = (finv_recip^n)_{<=0}."""
    P, Q = [], []
    for n in range(1, N + 1):
        pn = power(ginv, n, (-n, n))
        P.append(project(pn, ">=0").truncate((0, n)))
        qn = power(finv_recip, n, (-n, n))
        Q.append(project(qn, "<=0").truncate((-n, 0)))
    return FaberPolys(P, Q)


def faber(F: ComplexSeries, G: ComplexSeries, N: int) -> FaberPolys:
    """Faber polynomials P_n = ((G^-1)^n)_{>=0} and Q_n = ((F^-1)^-n)_{<=0}, n = 1..N."""
    ginv = invert_composition(G, order=N + 1)
    finv = invert_composition(F, order=N + 1)
    finv_recip = reciprocal(finv, (-1, N + 1))
    return _faber_from_generators(ginv, finv_recip, N)


def faber_of_inverse_pair(f: ComplexSeries, g: ComplexSeries, N: int) -> FaberPolys:
    """Faber polynomials of ``(f^{-1}, g^{-1})``: (g^n)_{>=0} and ((1/f)^n)_{<=0}."""
    return _faber_from_generators(g, reciprocal(f, (-1, N + 1)), N)


# ----------------------------------------------------------------------
# expansion identities


def _poly_in_inverse(q: ComplexSeries, recip: ComplexSeries, window) -> ComplexSeries:
    """q(1/x) for a polynomial q in 1/w, given the series ``recip = 1/x``."""
    return compose(q.reflect(), recip, window)


def verify_faber_expansions(
    F: ComplexSeries,
    G: ComplexSeries,
    N: int,
    table: Optional[GrunskyTable] = None,
    polys: Optional[FaberPolys] = None,
) -> Dict[str, float]:
    """Coefficient residuals of the six Faber/Grunsky expansion identities, maximized over n <= N."""
    table = table or grunsky_table(F, G, N)
    polys = polys or faber(F, G, N)
    b = table
    res = {}

    lg = log_ratio(G.truncate((G.lo, 1)), 1, N)
    want = ComplexSeries.from_dict({0: b(0, 0), **{-k: -b(0, k) for k in range(1, N + 1)}}, (-N, 0))
    res["log_G"] = lg.truncate((-N, 0)).max_abs_diff(want)

    lf = log_ratio(F, 1, N)
    want = ComplexSeries.from_dict({0: -b(0, 0), **{k: -b(0, -k) for k in range(1, N + 1)}}, (0, N))
    res["log_F"] = lf.truncate((0, N)).max_abs_diff(want)

    rG = reciprocal_at_infinity(G, (-N - 2 * N - 2, -1))
    rF = reciprocal(F, (-1, 2 * N + 1))
    worst = {k: 0.0 for k in ("P(G)", "P(F)", "Q(G)", "Q(F)")}
    for n in range(1, N + 1):
        P, Q = polys.p(n), polys.q(n)
        lhs = compose(P, G, (-N, n))
        want = ComplexSeries.from_dict({n: 1.0, **{-k: n * b(n, k) for k in range(1, N + 1)}}, (-N, n))
        worst["P(G)"] = max(worst["P(G)"], lhs.max_abs_diff(want))

        lhs = compose(P, F, (0, N))
        want = ComplexSeries.from_dict({0: n * b(n, 0), **{k: n * b(n, -k) for k in range(1, N + 1)}}, (0, N))
        worst["P(F)"] = max(worst["P(F)"], lhs.max_abs_diff(want))

        lhs = _poly_in_inverse(Q, rG, (-N, 0))
        want = ComplexSeries.from_dict({0: -n * b(-n, 0), **{-k: n * b(-n, k) for k in range(1, N + 1)}}, (-N, 0))
        worst["Q(G)"] = max(worst["Q(G)"], lhs.max_abs_diff(want))

        lhs = _poly_in_inverse(Q, rF, (-n, N))
        terms = {k: n * b(-n, -k) for k in range(1, N + 1)}
        terms[-n] = terms.get(-n, 0) + 1.0
        want = ComplexSeries.from_dict(terms, (-n, N))
        worst["Q(F)"] = max(worst["Q(F)"], lhs.max_abs_diff(want))
    res.update(worst)
    return res
