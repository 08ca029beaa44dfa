"""Verification suites: corpus construction, check execution and report emission.

A :class:`SuiteConfig` names a corpus of pairs (oracle parameters, JSON
files, Sigma constructions, welded circle maps) and the checks to run.
:func:`run_suite` evaluates every applicable check on every entry and
returns a :class:`Report` whose JSON form is byte-stable apart from the
timestamp.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import oracle, pairspace, tau, toda, welding
from .errors import ConvergenceError, DomainError, LocusError
from .grunsky import grunsky_table, grunsky_table_of_inverse_pair, verify_faber_expansions
from .pairspace import ConformalPair
from .series import ComplexSeries

ALL_CHECKS = (
    "grunsky-symmetry",
    "faber",
    "moments-oracle",
    "jump",
    "duality",
    "tau-closed-form",
    "tau-gradient",
    "tau-hessian",
    "lax",
    "string",
    "rh",
    "sigma",
    "welding",
    "fourier",
)

DEFAULT_TOLERANCES = {
    "grunsky-symmetry": 1e-11,
    "faber": 1e-10,
    "moments-oracle": 1e-10,
    "jump": 1e-8,
    "duality": 1e-6,
    "tau-closed-form": 1e-9,
    "tau-sum": 1e-10,
    "tau-gradient": 1e-6,
    "tau-hessian": 1e-4,
    "lax": 1e-5,
    "string": 1e-6,
    "canonical": 1e-6,
    "rh": 1e-8,
    "sigma": 1e-10,
    "harmonic": 1e-9,
    "welding": 1e-8,
    "welding-closed-form": 1e-8,
    "fourier-closed-form": 1e-9,
    "fourier-duality": 1e-6,
    "fourier-gradient": 1e-5,
    "fourier-hessian": 1e-4,
    "fourier-dual-variation": 1e-5,
    "homeo-lax": 1e-3,
}

IDENTITIES = {
    "grunsky-symmetry": "b[m,n] = b[n,m]",
    "faber": "Faber polynomial expansions of log G, log F, P_n, Q_n",
    "moments-oracle": "quadrature moments = closed-form Mobius moments",
    "jump": "S_+ - S_- = conj-data jump on both curves",
    "duality": "d t_m / d eps_n = delta_nm",
    "tau-closed-form": "log T = closed-form Mobius tau",
    "tau-sum": "log T integral form = series form",
    "tau-gradient": "d log T / d t_n = v_n",
    "tau-hessian": "d2 log T / dt_m dt_n = weighted Grunsky coefficient of the inverse pair",
    "lax": "dL/dt_n = {B_n, L}_T at O(eps^2)",
    "string": "{g, 1/f}_T = 1",
    "canonical": "{g, M}_T = g",
    "rh": "M = M~ and f M~ = g on the unit circle",
    "sigma": "conj(t_n) = -t_-n and Im t_0 = 0 on Sigma",
    "harmonic": "harmonic moments = pair-space moments on Sigma",
    "welding": "compose_welding(weld(gamma)) = gamma",
    "welding-closed-form": "welded Mobius (b, c) = closed form",
    "fourier-closed-form": "Fourier times of the Mobius circle map = closed form",
    "fourier-duality": "d_n t_m = delta_nm on the welded locus",
    "fourier-gradient": "d_n log tau = v_n on the welded locus",
    "fourier-hessian": "d_m d_n log tau = weighted Grunsky coefficient of (f, g)",
    "fourier-dual-variation": "d_n v_m = weighted Grunsky coefficient of (f, g)",
    "homeo-lax": "Lax equations for (g^-1, f^-1) along d_n at O(eps^2)",
}


MOMENT_ORDERS = (24, 32, 48)
TAIL_TOL = 1e-11

# ----------------------------------------------------------------------
# configuration


@dataclass
class SuiteConfig:
    order: int = 12
    grid: int = pairspace.DEFAULT_GRID
    fd_eps: float = tau.FD_EPS
    tolerances: Dict[str, float] = field(default_factory=dict)
    corpus: List[dict] = field(default_factory=lambda: [{"type": "oracle", "a": 0.3, "b": 1.2, "c": 0.24}])
    checks: List[str] = field(default_factory=lambda: list(ALL_CHECKS))
    fmt: str = "json"
    workers: int = 1
    global_tol: Optional[float] = None
    lax_flows: List[int] = field(default_factory=lambda: [1, 2, 3, -1, -2, -3])

    def validate(self) -> None:
        if self.order > self.grid // 8:
            raise DomainError(f"order {self.order} exceeds grid/8 = {self.grid // 8}")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise DomainError(f"tolerance for {k} must be positive")
        if self.global_tol is not None and self.global_tol < 0:
            raise DomainError("global tolerance must be >= 0")
        unknown = set(self.checks) - set(ALL_CHECKS)
        if unknown:
            raise DomainError(f"unknown checks {sorted(unknown)}")
        if any(int(n) == 0 for n in self.lax_flows):
            raise DomainError("lax flows must be nonzero")
        if self.fmt not in ("json", "csv"):
            raise DomainError("format must be json or csv")

    def tol(self, key: str) -> float:
        if self.global_tol is not None:
            return self.global_tol
        return self.tolerances.get(key, DEFAULT_TOLERANCES[key])

    @classmethod
    def from_json(cls, d: dict) -> "SuiteConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown config keys {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg


# ----------------------------------------------------------------------
# report


@dataclass(frozen=True)
class CheckRecord:
    check: str
    identity: str
    entry: str
    indices: Tuple
    residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def sort_key(self):
        return (self.check, self.entry, tuple(str(i) for i in self.indices))


CSV_FIELDS = ("check", "identity", "entry", "indices", "residual", "tolerance", "passed", "note")


@dataclass
class Report:
    records: List[CheckRecord] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)

    def sorted_records(self) -> List[CheckRecord]:
        return sorted(self.records, key=CheckRecord.sort_key)

    @property
    def totals(self) -> Dict[str, int]:
        n_pass = sum(r.passed for r in self.records)
        return {"total": len(self.records), "passed": n_pass, "failed": len(self.records) - n_pass}

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records)

    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_json(self) -> dict:
        recs = []
        for r in self.sorted_records():
            d = asdict(r)
            d["indices"] = list(r.indices)
            recs.append(d)
        return {"metadata": dict(sorted(self.metadata.items())), "totals": self.totals, "records": recs}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "Report":
        recs = [CheckRecord(r["check"], r["identity"], r["entry"], tuple(r["indices"]), float(r["residual"]),
                            float(r["tolerance"]), bool(r["passed"]), r.get("note", "")) for r in d["records"]]
        return cls(recs, dict(d.get("metadata", {})))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.sorted_records():
            w.writerow([r.check, r.identity, r.entry, " ".join(str(i) for i in r.indices), repr(r.residual),
                        repr(r.tolerance), int(r.passed), r.note])
        return buf.getvalue()


def sweep_csv(rows: Iterable[Tuple[float, float]], header: Tuple[str, str] = ("eps", "residual")) -> str:
    """Two-column CSV for order-of-accuracy plots."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for e, r in rows:
        w.writerow([repr(float(e)), repr(float(r))])
    return buf.getvalue()


def read_sweep_csv(text: str) -> Tuple[np.ndarray, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    if not rows:
        return np.zeros(0), np.zeros(0)
    a = np.array([[float(x) for x in r] for r in rows])
    return a[:, 0], a[:, 1]


def loglog_slope(eps: np.ndarray, res: np.ndarray) -> float:
    """Least-squares slope of log residual against log eps."""
    return float(np.polyfit(np.log(eps), np.log(res), 1)[0])


# ----------------------------------------------------------------------
# corpus


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    kind: str  # "pair", "oracle", "sigma", "homeo"
    pair: ConformalPair
    homeo: Optional[welding.CircleHomeo] = None
    params: Optional[oracle.MobiusParams] = None
    homeo_params: Optional[Tuple[complex, float]] = None


def _cplx(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


def build_entry(spec: dict, grid: int = pairspace.DEFAULT_GRID) -> CorpusEntry:
    """One corpus entry from its JSON description."""
    kind = spec.get("type")
    if kind == "identity":
        return CorpusEntry("identity", "pair", pairspace.identity_pair(m=grid))
    if kind == "oracle":
        p = oracle.MobiusParams(_cplx(spec["a"]), _cplx(spec["b"]), _cplx(spec["c"]))
        return CorpusEntry(f"oracle({p.a:.4g},{p.b:.4g},{p.c:.4g})", "oracle", oracle.mobius_pair(p, m=grid), params=p)
    if kind == "pair":
        if "path" in spec:
            with open(spec["path"]) as fh:
                d = json.load(fh)
            name = spec.get("name", spec["path"])
        else:
            d = spec["pair"]
            name = spec.get("name", "pair")
        return CorpusEntry(name, "pair", ConformalPair.from_json(d))
    if kind == "coefficients":
        a = [_cplx(x) for x in spec["a"]]
        bc = [_cplx(x) for x in spec["b"]]
        return CorpusEntry(spec.get("name", "coefficients"), "pair", pairspace.pair_from_coefficients(a, bc, grid))
    if kind == "sigma":
        coeffs = [_cplx(x) for x in spec["g"]]  # [b, b0, b_-1, ...]
        g = ComplexSeries(2 - len(coeffs), 1, np.array(coeffs[::-1]))
        return CorpusEntry(spec.get("name", "sigma"), "sigma", welding.sigma_pair(g, grid))
    if kind == "homeo-mobius":
        a, alpha = _cplx(spec["a"]), float(spec.get("alpha", 0.0))
        h, pair, _, _ = oracle.mobius_homeo(a, alpha, grid)
        return CorpusEntry(f"homeo-mobius({a:.4g},{alpha:.4g})", "homeo", welding.weld(h), h, homeo_params=(a, alpha))
    if kind == "homeo-phase":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        u = welding.random_phase(rng, grid, float(spec.get("amplitude", 0.05)), int(spec.get("degree", 4)))
        h = welding.CircleHomeo.from_phase(u)
        return CorpusEntry(f"homeo-phase(seed={spec.get('seed', 0)})", "homeo", welding.weld(h), h)
    if kind == "homeo-file":
        with open(spec["path"]) as fh:
            h = welding.CircleHomeo.from_json(json.load(fh))
        return CorpusEntry(spec.get("name", spec["path"]), "homeo", welding.weld(h), h)
    raise DomainError(f"unknown corpus entry type {kind!r}")


# ----------------------------------------------------------------------
# checks


def _rec(cfg: SuiteConfig, key: str, entry: CorpusEntry, indices, residual: float, extra_ok: bool = True, note: str = "") -> CheckRecord:
    tol = cfg.tol(key)
    residual = float(residual)
    passed = bool(np.isfinite(residual) and residual <= tol and extra_ok)
    return CheckRecord(key, IDENTITIES[key], entry.name, tuple(indices), residual, tol, passed, note)


IDX = (-3, -2, -1, 0, 1, 2, 3)
HESSIAN_PAIRS = ((0, 0), (1, 1), (1, -1), (2, 0), (-2, 3))


def _check_grunsky(cfg, e):
    N = min(cfg.order, 12)
    out = [_rec(cfg, "grunsky-symmetry", e, ("forward", N), grunsky_table(e.pair.f, e.pair.g, N).asymmetry())]
    out.append(_rec(cfg, "grunsky-symmetry", e, ("inverse", N), grunsky_table_of_inverse_pair(e.pair.f, e.pair.g, N).asymmetry()))
    return out


def _check_faber(cfg, e):
    N = min(cfg.order, 12)
    res = verify_faber_expansions(e.pair.f, e.pair.g, N)
    return [_rec(cfg, "faber", e, (k, N), v) for k, v in sorted(res.items())]


def _check_moments_oracle(cfg, e):
    if e.params is None:
        return []
    mq = pairspace.moments(e.pair)
    mc = oracle.mobius_moments(e.params, 3)
    err = max(max(abs(mq.t[n] - mc.t[n]), abs(mq.v[n] - mc.v[n])) for n in range(-3, 4))
    return [_rec(cfg, "moments-oracle", e, (3,), err)]


def converged_moments(pair: ConformalPair) -> pairspace.MomentSet:
    """Moments at the order in MOMENT_ORDERS with the smallest Orlov-Schulman tail.

    Larger orders shorten the truncation tail but amplify quadrature roundoff
    by |g|^N on curves that come close to the origin, so the tail is minimised
    over the candidates rather than assumed to shrink monotonically.
    """
    best, best_tail = None, np.inf
    for N in MOMENT_ORDERS:
        moms = pairspace.moments(pair, N)
        t = toda.orlov_tail(pair, moms)
        if t < best_tail:
            best, best_tail = moms, t
        if t <= TAIL_TOL:
            break
    return best


def _check_jump(cfg, e):
    r2, r1 = pairspace.jump_residual(e.pair, converged_moments(e.pair))
    return [_rec(cfg, "jump", e, ("S",), r2), _rec(cfg, "jump", e, ("S~",), r1)]


def _check_duality(cfg, e):
    J = tau.duality_matrix(e.pair, IDX, cfg.fd_eps)
    return [_rec(cfg, "duality", e, ("-3..3",), np.max(np.abs(J - np.eye(len(IDX)))))]


def _check_tau_closed(cfg, e):
    moms = pairspace.moments(e.pair)
    li = tau.log_tau_integral(e.pair, moms)
    out = [_rec(cfg, "tau-sum", e, (), abs(li - tau.log_tau_sum(moms)))]
    if e.params is not None:
        out.append(_rec(cfg, "tau-closed-form", e, (), abs(li - oracle.mobius_log_tau(e.params))))
    return out


def _check_tau_gradient(cfg, e):
    return [_rec(cfg, "tau-gradient", e, (n,), tau.check_tau_gradient(e.pair, n, cfg.fd_eps)) for n in IDX]


def _check_tau_hessian(cfg, e):
    kappa = grunsky_table_of_inverse_pair(e.pair.f, e.pair.g, 3)
    return [_rec(cfg, "tau-hessian", e, mn, tau.check_hessian(e.pair, *mn, kappa=kappa)) for mn in HESSIAN_PAIRS]


def _check_lax(cfg, e):
    out = []
    flows = toda.PairFlows(e.pair)
    for n in cfg.lax_flows:
        for which in ("g", "f"):
            d = toda.lax_order(flows, n, cfg.fd_eps, which)
            out.append(_rec(cfg, "lax", e, (n, which), d["residual"], d["order_ok"], f"ratio={d['ratio']:.3f}"))
    return out


def _check_string(cfg, e):
    return [_rec(cfg, "string", e, (), toda.string_residual(e.pair, cfg.fd_eps)),
            _rec(cfg, "canonical", e, (), toda.canonical_residual(e.pair, cfg.fd_eps, converged_moments(e.pair).order))]


def _check_rh(cfg, e):
    r = toda.rh_identities(e.pair, converged_moments(e.pair))
    return [_rec(cfg, "rh", e, (k,), v) for k, v in sorted(r.items())]


def _check_sigma(cfg, e):
    if e.kind != "sigma":
        return []
    N = min(cfg.order, 12)
    m = pairspace.moments(e.pair, N)
    h = welding.harmonic_moments(e.pair.g, N, e.pair.m)
    err = max(max(abs(m.t[n] - h.t[n]), abs(m.v[n] - h.v[n])) for n in range(-N, N + 1))
    return [_rec(cfg, "sigma", e, (N,), welding.sigma_defect(m)), _rec(cfg, "harmonic", e, (N,), err)]


def _check_welding(cfg, e):
    if e.homeo is None:
        return []
    out = [_rec(cfg, "welding", e, (), welding.compose_welding(e.pair).max_abs_diff(e.homeo))]
    if e.homeo_params is not None:
        p = oracle.homeo_params(*e.homeo_params)
        err = max(abs(e.pair.b - p.b), abs(e.pair.g.coeff(0) - p.c))
        out.append(_rec(cfg, "welding-closed-form", e, (), err))
    return out


def _check_fourier(cfg, e):
    if e.homeo is None:
        return []
    out = []
    flows = welding.HomeoFlows(e.homeo, e.pair)
    if e.homeo_params is not None:
        fm = welding.fourier_moments(e.homeo, e.pair, 3)
        t, _ = oracle.mobius_fourier_moments(*e.homeo_params, 3)
        out.append(_rec(cfg, "fourier-closed-form", e, (), max(abs(fm.t[n] - t[n]) for n in (-1, 0, 1))))
    J = welding.homeo_duality_matrix(flows, IDX, cfg.fd_eps)
    out.append(_rec(cfg, "fourier-duality", e, ("-3..3",), np.max(np.abs(J - np.eye(len(IDX))))))
    table = welding.forward_table(e.pair, 3)
    for n in (-1, 0, 1):
        out.append(_rec(cfg, "fourier-gradient", e, (n,), welding.check_homeo_gradient(flows, n, cfg.fd_eps)))
        dv = welding.homeo_dual_variation(flows, n, IDX, cfg.fd_eps)
        err = max(abs(dv[mm] - tau.hessian_expected(table, n, mm)) for mm in IDX)
        out.append(_rec(cfg, "fourier-dual-variation", e, (n,), err))
    for mn in ((0, 0), (1, 1), (1, -1)):
        out.append(_rec(cfg, "fourier-hessian", e, mn, welding.check_homeo_hessian(flows, *mn, table=table)))
    for n in (1, -1):
        d = welding.homeo_lax_order(flows, n)
        out.append(_rec(cfg, "homeo-lax", e, (n, "L"), d["residual"], d["order_ok"], f"ratio={d['ratio']:.3f}"))
    return out


CHECKS: Dict[str, Callable] = {
    "grunsky-symmetry": _check_grunsky,
    "faber": _check_faber,
    "moments-oracle": _check_moments_oracle,
    "jump": _check_jump,
    "duality": _check_duality,
    "tau-closed-form": _check_tau_closed,
    "tau-gradient": _check_tau_gradient,
    "tau-hessian": _check_tau_hessian,
    "lax": _check_lax,
    "string": _check_string,
    "rh": _check_rh,
    "sigma": _check_sigma,
    "welding": _check_welding,
    "fourier": _check_fourier,
}


def _run_entry(cfg: SuiteConfig, spec: dict) -> List[CheckRecord]:
    label = json.dumps(spec, sort_keys=True)
    try:
        entry = build_entry(spec, cfg.grid)
    except (DomainError, LocusError, ConvergenceError, KeyError, TypeError, ValueError, OSError) as exc:
        return [CheckRecord("corpus", "corpus entry is well formed", label, (), float("nan"), 0.0, False, f"skipped: {exc}")]
    out: List[CheckRecord] = []
    for name in cfg.checks:
        try:
            out.extend(CHECKS[name](cfg, entry))
        except (DomainError, LocusError, ConvergenceError) as exc:
            out.append(CheckRecord(name, "check ran", entry.name, (), float("nan"), 0.0, False, f"error: {exc}"))
    return out


def run_suite(cfg: SuiteConfig, timestamp: Optional[str] = None) -> Report:
    """Run every selected check over the corpus; records are order-stable."""
    cfg.validate()
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(lambda s: _run_entry(cfg, s), cfg.corpus))
    else:
        chunks = [_run_entry(cfg, s) for s in cfg.corpus]
    records = [r for c in chunks for r in c]
    meta = {
        "timestamp": timestamp if timestamp is not None else time.strftime("%Y-%m-%dT%H:%M:%S"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "order": cfg.order,
        "grid": cfg.grid,
        "fd_eps": cfg.fd_eps,
        "checks": list(cfg.checks),
        "lax_flows": [int(n) for n in cfg.lax_flows],
        "negative_flow_convention": toda.NEGATIVE_FLOW_CONVENTION,
    }
    return Report(records, meta)


def default_corpus() -> List[dict]:
    """The desk-scale corpus: identity, Mobius oracles, a perturbed pair, a Sigma pair, welded circle maps."""
    return [
        {"type": "identity"},
        {"type": "oracle", "a": 0.3, "b": 1.2, "c": 0.24},
        {"type": "oracle", "a": [0.1, 0.2], "b": [0.9, -0.3], "c": [0.05, -0.1]},
        {"type": "coefficients", "name": "perturbed", "a": [1.0, 0.05, -0.01, 0.005], "b": [1.0, 0.03, 0.04, -0.01]},
        {"type": "sigma", "name": "sigma", "g": [1.1, 0.03, [0.05, 0.03], -0.01]},
        {"type": "homeo-mobius", "a": 0.2, "alpha": 0.0},
        {"type": "homeo-phase", "seed": 0, "amplitude": 0.05},
    ]
