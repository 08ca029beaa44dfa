"""Truncated Laurent series with complex coefficients, and circle sampling.

A :class:`ComplexSeries` stores the coefficients of ``sum_{k=lo}^{hi} c_k w^k``.
All operations return new objects; nothing is mutated in place.

Products and compositions are truncated back into an explicit window
``(lo, hi)``.  Spectral conversions use the uniform grid
``w_j = r * exp(2 pi i j / m)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError

Window = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class ComplexSeries:
    lo: int
    hi: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if self.hi < self.lo:
            raise DomainError(f"empty window [{self.lo}, {self.hi}]")
        if c.size != self.hi - self.lo + 1:
            raise DomainError(
                f"window [{self.lo}, {self.hi}] needs {self.hi - self.lo + 1} coefficients, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, terms: dict, window: Optional[Window] = None) -> "ComplexSeries":
        """Build from ``{exponent: coefficient}``."""
        if window is None:
            window = (min(terms), max(terms))
        lo, hi = window
        c = np.zeros(hi - lo + 1, dtype=complex)
        for k, v in terms.items():
            if lo <= k <= hi:
                c[k - lo] = v
        return cls(lo, hi, c)

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "ComplexSeries":
        return cls(k, k, [c])

    @classmethod
    def zeros(cls, window: Window) -> "ComplexSeries":
        lo, hi = window
        return cls(lo, hi, np.zeros(hi - lo + 1, dtype=complex))

    # access -----------------------------------------------------------

    @property
    def window(self) -> Window:
        return (self.lo, self.hi)

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def coeff(self, k: int) -> complex:
        if self.lo <= k <= self.hi:
            return complex(self.coeffs[k - self.lo])
        return 0j

    def coeff_array(self, window: Window) -> np.ndarray:
        """Coefficients over an arbitrary window, zero-padded."""
        lo, hi = window
        out = np.zeros(hi - lo + 1, dtype=complex)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo : b - lo + 1] = self.coeffs[a - self.lo : b - self.lo + 1]
        return out

    def valuation(self, tol: float = 0.0) -> Optional[int]:
        """Lowest exponent with ``|c_k| > tol``; None for the zero series."""
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return None if nz.size == 0 else int(self.lo + nz[0])

    def degree(self, tol: float = 0.0) -> Optional[int]:
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return None if nz.size == 0 else int(self.lo + nz[-1])

    def trim(self, tol: float = 0.0) -> "ComplexSeries":
        v, d = self.valuation(tol), self.degree(tol)
        if v is None:
            return ComplexSeries(0, 0, [0.0])
        return self.truncate((v, d))

    def truncate(self, window: Window) -> "ComplexSeries":
        lo, hi = window
        if hi < lo:
            raise DomainError(f"empty window [{lo}, {hi}]")
        return ComplexSeries(lo, hi, self.coeff_array(window))

    # evaluation -------------------------------------------------------

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        # Horner on the shifted polynomial, then multiply by z**lo
        p = np.polyval(self.coeffs[::-1], z)
        if self.lo == 0:
            return p
        return p * z ** self.lo

    def derivative(self) -> "ComplexSeries":
        k = self.exponents
        d = self.coeffs * k
        if self.lo == 0 and self.hi == 0:
            return ComplexSeries(0, 0, [0.0])
        if self.lo == 0:
            return ComplexSeries(0, self.hi - 1, d[1:])
        return ComplexSeries(self.lo - 1, self.hi - 1, d)

    def conj(self) -> "ComplexSeries":
        """Coefficient conjugation: z -> conj(s(conj z))."""
        return ComplexSeries(self.lo, self.hi, np.conj(self.coeffs))

    def shift(self, k: int) -> "ComplexSeries":
        """Multiply by w**k."""
        return ComplexSeries(self.lo + k, self.hi + k, self.coeffs)

    def reflect(self) -> "ComplexSeries":
        """Substitute w -> 1/w."""
        return ComplexSeries(-self.hi, -self.lo, self.coeffs[::-1])

    # arithmetic -------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ComplexSeries):
            other = ComplexSeries.monomial(0, complex(other))
        w = (min(self.lo, other.lo), max(self.hi, other.hi))
        return ComplexSeries(w[0], w[1], self.coeff_array(w) + other.coeff_array(w))

    __radd__ = __add__

    def __neg__(self):
        return ComplexSeries(self.lo, self.hi, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ComplexSeries):
            return mul(other, self)
        return ComplexSeries(self.lo, self.hi, self.coeffs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return ComplexSeries(self.lo, self.hi, self.coeffs / complex(scalar))

    def max_abs_diff(self, other: "ComplexSeries") -> float:
        w = (min(self.lo, other.lo), max(self.hi, other.hi))
        return float(np.max(np.abs(self.coeff_array(w) - other.coeff_array(w))))

    # serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "lo": int(self.lo),
            "hi": int(self.hi),
            "re": [float(x) for x in self.coeffs.real],
            "im": [float(x) for x in self.coeffs.imag],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ComplexSeries":
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
        return cls(int(d["lo"]), int(d["hi"]), re + 1j * im)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self):
        return f"ComplexSeries(lo={self.lo}, hi={self.hi}, coeffs={np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True, eq=False)
class CircleSamples:
    """Values of a function at ``w_j = radius * exp(2 pi i j / m)``."""

    m: int
    values: np.ndarray = field(repr=False)
    radius: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.m & (self.m - 1):
            raise DomainError(f"grid size must be a power of two, got {self.m}")
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.size != self.m:
            raise DomainError(f"expected {self.m} samples, got {v.size}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        return circle_nodes(self.m, self.radius)


def circle_nodes(m: int, radius: float = 1.0) -> np.ndarray:
    return radius * np.exp(2j * np.pi * np.arange(m) / m)


def contour_mean(values: np.ndarray, nodes: np.ndarray) -> complex:
    """Trapezoid rule for (1/2 pi i) \\oint h(w) dw over a circle, given h at the nodes."""
    return complex(np.mean(values * nodes))


def _check_window(window: Optional[Window]) -> Window:
    if window is None:
        raise DomainError("window required")
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise DomainError(f"empty window [{lo}, {hi}]")
    return lo, hi


# ----------------------------------------------------------------------
# products


def mul(a: ComplexSeries, b: ComplexSeries, window: Optional[Window] = None) -> ComplexSeries:
    """Product ``a*b``; by default the full product window is kept."""
    full = ComplexSeries(a.lo + b.lo, a.hi + b.hi, np.convolve(a.coeffs, b.coeffs))
    if window is None:
        return full
    return full.truncate(_check_window(window))


def power(s: ComplexSeries, n: int, window: Window) -> ComplexSeries:
    """``s**n`` (n >= 0) truncated to ``window`` after every product.

    Intermediate products are kept exact over the window only when the
    caller picks a window wide enough for the coefficients it needs.
    """
    window = _check_window(window)
    if n < 0:
        raise DomainError("negative powers need reciprocal()")
    out = ComplexSeries.monomial(0, 1.0)
    base = s
    while n:
        if n & 1:
            out = mul(out, base, window)
        n >>= 1
        if n:
            base = mul(base, base, window)
    return out.truncate(window)


def _ps_reciprocal(c: np.ndarray, n: int) -> np.ndarray:
    """First n+1 coefficients of 1/p for a power series p with p(0) != 0."""
    c = np.asarray(c, dtype=complex)
    if c[0] == 0:
        raise DomainError("power series has zero constant term")
    c = np.concatenate([c, np.zeros(max(0, n + 1 - c.size), dtype=complex)])[: n + 1]
    r = np.zeros(n + 1, dtype=complex)
    r[0] = 1.0 / c[0]
    for k in range(1, n + 1):
        r[k] = -np.dot(c[1 : k + 1], r[k - 1 :: -1][:k]) / c[0]
    return r


def reciprocal(s: ComplexSeries, window: Window) -> ComplexSeries:
    """``1/s`` expanded around the lowest nonzero exponent of ``s``.

    For a series with leading exponent ``d`` this is
    ``w**-d / c_d * (1 + ...)`` with increasing exponents, truncated to window.
    """
    window = _check_window(window)
    d = s.valuation()
    if d is None:
        raise DomainError("reciprocal of the zero series")
    p = s.coeffs[d - s.lo :]
    n = window[1] + d
    if n < 0:
        return ComplexSeries.zeros(window)
    r = _ps_reciprocal(p, n)
    return ComplexSeries(-d, -d + n, r).truncate(window)


def reciprocal_at_infinity(s: ComplexSeries, window: Window) -> ComplexSeries:
    """``1/s`` expanded around the highest exponent (a series in 1/w)."""
    return reciprocal(s.reflect(), (-window[1], -window[0])).reflect()


# ----------------------------------------------------------------------
# composition and inversion


def _ps_compose(outer: np.ndarray, inner: np.ndarray, n: int) -> np.ndarray:
    """outer(inner(x)) mod x**(n+1); inner must have zero constant term."""
    inner = np.concatenate([inner, np.zeros(max(0, n + 1 - len(inner)), dtype=complex)])[: n + 1]
    out = np.zeros(n + 1, dtype=complex)
    for c in outer[::-1]:
        out = np.convolve(out, inner)[: n + 1]
        out[0] += c
    return out


def _horner(outer: ComplexSeries, inner: ComplexSeries, window: Window) -> ComplexSeries:
    """Formal Horner evaluation of a polynomial outer (exponents >= 0) at a Laurent inner.

    Intermediate products are kept on a guard window wide enough that every
    coefficient inside ``window`` is exact.
    """
    lo, hi = window
    D = outer.hi
    ilo, ihi = inner.lo, inner.hi
    glo = max(lo - D * max(ihi, 0), min(0, D * ilo))
    ghi = min(hi - D * min(ilo, 0), max(0, D * ihi))
    glo, ghi = min(glo, lo, 0), max(ghi, hi, 0)
    acc = ComplexSeries.monomial(0, outer.coeff(D))
    for k in range(D - 1, -1, -1):
        acc = mul(acc, inner, (glo, ghi)) + outer.coeff(k)
    return acc.truncate(window)


def compose(
    outer: ComplexSeries,
    inner: ComplexSeries,
    window: Optional[Window] = None,
    m: int = 256,
    radius: float = 1.0,
) -> ComplexSeries:
    """Truncated series of ``outer(inner(w))``.

    An ``outer`` with only nonnegative exponents is composed formally (Horner
    with guarded truncation), so polynomial compositions are exact inside the
    window.  Every other case is composed by sampling ``inner`` on the circle
    of the given radius and evaluating ``outer`` there; ``m`` must resolve the
    requested window.
    """
    if window is None:
        if outer.lo >= 0 and inner.lo >= 1:
            window = (0 if outer.lo == 0 else outer.lo * inner.lo, outer.hi * inner.hi)
        else:
            raise DomainError("window required for sampled composition")
    lo, hi = _check_window(window)
    if outer.lo >= 0:
        return _horner(outer, inner, (lo, hi))
    nodes = circle_nodes(m, radius)
    vals = inner(nodes)
    if np.min(np.abs(vals)) < 1e-12 * max(1.0, np.max(np.abs(vals))):
        raise DomainError("inner samples reach the pole of outer at 0")
    return from_samples(CircleSamples(m, outer(vals), radius), (lo, hi))


def _ps_invert(c: np.ndarray, n: int) -> np.ndarray:
    """Compositional inverse of x*c1 + x^2*c2 + ... to order n, by Newton iteration."""
    c = np.concatenate([np.asarray(c, dtype=complex), np.zeros(max(0, n + 1 - len(c)), dtype=complex)])[: n + 1]
    if c[0] != 0:
        raise DomainError("series must vanish at 0")
    if n < 1:
        return np.zeros(n + 1, dtype=complex)
    if c[1] == 0:
        raise DomainError("leading coefficient is zero; not invertible")
    dc = (c * np.arange(n + 1))[1:]
    r = np.zeros(n + 1, dtype=complex)
    r[1] = 1.0 / c[1]
    id_ = np.zeros(n + 1, dtype=complex)
    id_[1] = 1.0
    prec = 1
    # quadratic convergence: correct to order 2*prec after each step
    while True:
        prec = min(2 * prec, n)
        sr = _ps_compose(c, r, n) - id_
        dsr = _ps_compose(dc, r, n)
        r = r - np.convolve(sr, _ps_reciprocal(dsr, n))[: n + 1]
        if prec >= n:
            break
    # one clean-up pass absorbs accumulated rounding
    sr = _ps_compose(c, r, n) - id_
    r = r - np.convolve(sr, _ps_reciprocal(_ps_compose(dc, r, n), n))[: n + 1]
    return r


def invert_composition(s: ComplexSeries, order: Optional[int] = None) -> ComplexSeries:
    """Compositional inverse of a valuation-1 series, or of a series with a simple pole at infinity.

    * ``s = c1 w + c2 w^2 + ...``: returns ``r`` with window ``[1, hi]`` and
      ``s(r(w)) = w`` to truncation order.
    * ``s = b w + b0 + b1/w + ...`` (``hi == 1``): returns the inverse near
      infinity with window ``[lo, 1]``.
    """
    st = s
    if s.lo >= 0 and s.coeff(0) == 0:
        if s.coeff(1) == 0:
            raise DomainError("leading coefficient is zero; not invertible")
        n = order or max(s.hi, 1)
        r = _ps_invert(s.coeff_array((0, n)), n)
        return ComplexSeries(0, n, r).truncate((1, n))
    if s.hi == 1:
        b = s.coeff(1)
        if b == 0:
            raise DomainError("leading coefficient is zero; not invertible")
        depth = order or max(1 - s.lo, 1)
        n = depth + 2
        # t(x) = 1/s(1/x) is a valuation-one series in x
        sx = st.reflect()  # window [-1, -lo]
        t = reciprocal(sx, (1, n))
        tinv = _ps_invert(t.coeff_array((0, n)), n)
        tinv_s = ComplexSeries(0, n, tinv).truncate((1, n))
        inv_x = reciprocal(tinv_s, (-1, n - 2))  # 1/tinv(x), exponents in x
        return inv_x.reflect().truncate((-depth, 1))
    raise DomainError("series must have valuation 1 or a simple pole at infinity")


# ----------------------------------------------------------------------
# logarithms


def _ps_log(c: np.ndarray, n: int) -> np.ndarray:
    """log(p) - log(p(0)) mod x**(n+1)."""
    c = np.concatenate([np.asarray(c, dtype=complex), np.zeros(max(0, n + 1 - len(c)), dtype=complex)])[: n + 1]
    dp = (c * np.arange(n + 1))[1:]
    q = np.convolve(dp, _ps_reciprocal(c, n))[:n]
    out = np.zeros(n + 1, dtype=complex)
    out[1:] = q / np.arange(1, n + 1)
    return out


def _ps_exp(c: np.ndarray, n: int) -> np.ndarray:
    """exp(p) mod x**(n+1) for a power series p."""
    c = np.concatenate([np.asarray(c, dtype=complex), np.zeros(max(0, n + 1 - len(c)), dtype=complex)])[: n + 1]
    e = np.zeros(n + 1, dtype=complex)
    e[0] = np.exp(c[0])
    kc = c * np.arange(n + 1)
    for k in range(1, n + 1):
        e[k] = np.dot(kc[1 : k + 1], e[k - 1 :: -1][:k]) / k
    return e


def log_ratio(s: ComplexSeries, d: int, order: Optional[int] = None) -> ComplexSeries:
    """Series of ``log(s(w) / w**d)`` to ``order`` terms (default: the span of ``s``).

    ``d`` must be the lowest exponent of ``s`` (result in powers ``w^0..w^order``)
    or the highest (result in powers ``w^-order..w^0``).  The constant term
    is the principal logarithm of the leading coefficient.
    """
    n = s.hi - s.lo if order is None else int(order)
    if d == s.lo:
        lead = s.coeff(d)
        if lead == 0:
            raise DomainError("leading coefficient is zero")
        out = _ps_log(s.coeffs / lead, n)
        out[0] = np.log(lead)
        return ComplexSeries(0, n, out)
    if d == s.hi:
        return log_ratio(s.reflect(), -d, n).reflect()
    raise DomainError(f"exponent {d} is neither the lowest nor the highest of the window")


def exp_series(s: ComplexSeries, window: Window) -> ComplexSeries:
    """``exp(s)`` for a series with only nonnegative (or only nonpositive) exponents."""
    lo, hi = _check_window(window)
    if s.lo >= 0:
        return ComplexSeries(0, hi, _ps_exp(s.coeff_array((0, hi)), hi)).truncate((lo, hi))
    if s.hi <= 0:
        return exp_series(s.reflect(), (-hi, -lo)).reflect()
    raise DomainError("exp of a two-sided series is not a formal series")


# ----------------------------------------------------------------------
# projections

_PARTS = {
    ">0": lambda k: k > 0,
    "<0": lambda k: k < 0,
    "=0": lambda k: k == 0,
    ">=0": lambda k: k >= 0,
    "<=0": lambda k: k <= 0,
}


def project(s: ComplexSeries, part: Union[str, Iterable[int]]) -> ComplexSeries:
    """Keep exactly the requested exponents; the window is unchanged."""
    k = s.exponents
    if isinstance(part, str):
        key = part.replace("≥", ">=").replace("≤", "<=").replace(" ", "")
        if key not in _PARTS:
            raise DomainError(f"unknown part {part!r}")
        mask = _PARTS[key](k)
    else:
        keep = set(int(x) for x in part)
        mask = np.array([x in keep for x in k])
    return ComplexSeries(s.lo, s.hi, np.where(mask, s.coeffs, 0))


# ----------------------------------------------------------------------
# spectral conversions


def to_samples(s: ComplexSeries, m: int, radius: float = 1.0) -> CircleSamples:
    if m < 2 * (s.hi - s.lo):
        raise DomainError(f"grid of {m} points aliases window of span {s.hi - s.lo}")
    return CircleSamples(m, s(circle_nodes(m, radius)), radius)


def fourier_coefficients(values: np.ndarray, window: Window, radius: float = 1.0) -> np.ndarray:
    """Coefficients c_lo..c_hi of a Laurent series from samples on a circle."""
    lo, hi = window
    m = len(values)
    spec = np.fft.fft(values) / m
    k = np.arange(lo, hi + 1)
    c = spec[k % m]
    if radius != 1.0:
        c = c * radius ** (-k.astype(float))
    return c


def from_samples(v: CircleSamples, window: Window) -> ComplexSeries:
    lo, hi = _check_window(window)
    if hi - lo > v.m // 2:
        raise DomainError(f"window span {hi - lo} exceeds m/2 = {v.m // 2}")
    return ComplexSeries(lo, hi, fourier_coefficients(v.values, (lo, hi), v.radius))


def tracked_log(values: np.ndarray, anchor: Optional[complex] = None) -> np.ndarray:
    """Continuous logarithm of closed-loop samples.

    The phase is unwrapped from the first sample; a net winding around the
    loop raises :class:`DomainError`.  With ``anchor`` the 2 pi i multiple
    is chosen so the loop mean is closest to ``anchor``.
    """
    values = np.asarray(values, dtype=complex)
    if np.any(values == 0):
        raise DomainError("log of zero on the sample grid")
    ph = np.unwrap(np.angle(np.append(values, values[0])))
    wind = (ph[-1] - ph[0]) / (2 * np.pi)
    if abs(wind) > 0.5:
        raise DomainError(f"samples wind {wind:+.2f} times around 0; log is not single-valued")
    out = np.log(np.abs(values)) + 1j * ph[:-1]
    if anchor is not None:
        k = np.round((np.mean(out).imag - complex(anchor).imag) / (2 * np.pi))
        out = out - 2j * np.pi * k
    return out


def newton_solve(series: ComplexSeries, target: np.ndarray, start: np.ndarray, iters: int = 50, tol: float = 1e-15) -> np.ndarray:
    """Vectorized Newton solve of ``series(x) = target`` from ``start``."""
    d = series.derivative()
    x = np.array(start, dtype=complex)
    for _ in range(iters):
        step = (series(x) - target) / d(x)
        x = x - step
        if np.max(np.abs(step)) < tol:
            break
    return x
