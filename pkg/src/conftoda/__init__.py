"""Integrable structure on pairs of univalent conformal maps.

Truncated Laurent series (:mod:`series`), Grunsky coefficients and Faber
polynomials (:mod:`grunsky`), the pair space with its time variables
(:mod:`pairspace`), the tau function (:mod:`tau`), the Toda Lax system
(:mod:`toda`), conformal welding and the Fourier-moment hierarchy
(:mod:`welding`), the Mobius oracle (:mod:`oracle`) and verification
reports (:mod:`report`).
"""

from . import grunsky, oracle, pairspace, report, series, tau, toda, welding
from .errors import ConvergenceError, DomainError, LocusError
from .grunsky import GrunskyTable, faber, grunsky_table, grunsky_table_of_inverse_pair
from .oracle import MobiusParams, mobius_pair
from .pairspace import ConformalPair, MomentSet, identity_pair, moments, normalize_pair
from .report import Report, SuiteConfig, run_suite
from .series import ComplexSeries
from .tau import log_tau_integral, log_tau_sum
from .welding import CircleHomeo, compose_welding, sigma_pair, weld

__version__ = "0.1.0"

__all__ = [
    "series", "grunsky", "pairspace", "tau", "toda", "welding", "oracle", "report",
    "ComplexSeries", "ConformalPair", "MomentSet", "GrunskyTable", "MobiusParams", "CircleHomeo",
    "Report", "SuiteConfig", "DomainError", "ConvergenceError", "LocusError",
    "faber", "grunsky_table", "grunsky_table_of_inverse_pair", "identity_pair", "moments", "normalize_pair",
    "mobius_pair", "log_tau_integral", "log_tau_sum", "weld", "compose_welding", "sigma_pair", "run_suite",
]
