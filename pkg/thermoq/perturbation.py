"""
The weak-coupling term E_p(T) = k_B T ln Tr exp(-beta E(0)), the corrected
spectrum E(T) = E(0) + E_p(T), the self-consistent iteration of the
Hamiltonian and the scan for temperature ranges where E_p stays small.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from thermoq.core import (
    Free,
    LevelSet,
    SystemSpec,
    ThermalPoint,
    UnitsConfig,
    make_levels,
)
from thermoq.errors import DomainError
from thermoq.numerics import Bracket, find_root, log_sum_exp

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.1
DEFAULT_I_MAX = 1
DEFAULT_ITERATION_TOL = 1e-6


@dataclass(frozen=True)
class PerturbationResult:
    """E_p(T) together with the smallness test |E_p| <= threshold."""

    ep: float
    T: float
    within_validity: bool
    threshold: float

    @classmethod
    def evaluate(cls, ep: float, T: float, threshold: float = DEFAULT_THRESHOLD):
        if not threshold > 0:
            raise DomainError(f"validity threshold must be > 0, got {threshold}")
        within = abs(ep) <= threshold
        if not within:
            logger.debug("E_p(T=%g) = %.6g exceeds threshold %g", T, ep, threshold)
        return cls(ep=float(ep), T=float(T), within_validity=within, threshold=threshold)


@dataclass(frozen=True)
class IterationTrace:
    """
    Corrections E_p^(I) for I = 1..i_max. The correction of H_0 is taken as 0,
    so a single step converges when |E_p^(1)| <= tolerance.
    """

    corrections: Tuple[float, ...]
    converged: bool
    tolerance: float


@dataclass(frozen=True)
class ValidityWindow:
    t_lo: float
    t_hi: float


@dataclass(frozen=True)
class ValidityReport:
    intervals: Tuple[ValidityWindow, ...]
    crossings: Tuple[float, ...]
    threshold: float


def log_partition_trace(levels: LevelSet, tp: ThermalPoint) -> float:
    """ln sum_i exp(-beta E_i), never formed from raw exponentials."""
    tp.require_positive()
    return log_sum_exp(-tp.beta * levels.as_array())


def partition_trace(levels: LevelSet, tp: ThermalPoint) -> float:
    """
    Truncated partition sum over the level set.

    Return:
        float: sum_i exp(-beta E_i); may underflow to 0 for T far below the gap
    """
    return math.exp(log_partition_trace(levels, tp))


def ep_discrete(
    levels: LevelSet, tp: ThermalPoint, threshold: float = DEFAULT_THRESHOLD
) -> PerturbationResult:
    """E_p = k_B T ln Tr exp(-beta E(0)) for a truncated discrete spectrum."""
    ep = tp.kT * log_partition_trace(levels, tp)
    return PerturbationResult.evaluate(ep, tp.T, threshold)


def ep_free(
    tp: ThermalPoint, m: float, threshold: float = DEFAULT_THRESHOLD
) -> PerturbationResult:
    """
    E_p = k_B T ln sqrt(2 pi m k_B T) for the free particle, from the Gaussian
    momentum integral of the trace.
    """
    tp.require_positive()
    if not m > 0:
        raise DomainError(f"mass must be > 0, got {m}")
    ep = 0.5 * tp.kT * math.log(2.0 * math.pi * m * tp.kT)
    return PerturbationResult.evaluate(ep, tp.T, threshold)


def ep_free_equipartition(tp: ThermalPoint, m: float) -> float:
    """Same quantity written through <E> = k_B T / 2: <E> ln(4 pi m <E>)."""
    tp.require_positive()
    mean = tp.mean_energy
    return mean * math.log(4.0 * math.pi * m * mean)


def ep_for_spec(
    spec: SystemSpec, tp: ThermalPoint, threshold: float = DEFAULT_THRESHOLD
) -> PerturbationResult:
    """E_p for any model system; the thermal point carries the units used for k_B."""
    if isinstance(spec, Free):
        return ep_free(tp, spec.units.mass(spec.m), threshold)
    return ep_discrete(make_levels(spec), tp, threshold)


def thermal_point(spec: SystemSpec, T: float) -> ThermalPoint:
    """ThermalPoint in the units of the given system."""
    return ThermalPoint(T=float(T), units=spec.units)


def ep_scan(spec: SystemSpec, temperatures: Iterable[float]) -> np.ndarray:
    """E_p evaluated at every temperature of a grid."""
    return np.array([ep_for_spec(spec, thermal_point(spec, T)).ep for T in temperatures])


def corrected_energy(e0: float, ep: PerturbationResult) -> float:
    """E(T) = E(0) + E_p(T)."""
    return e0 + ep.ep


def low_temperature_limit(levels: LevelSet) -> float:
    """
    Literal T -> 0+ limit of E_p for a discrete spectrum, which is -E_min and not
    zero: the dominant term of the trace is exp(-beta E_min).
    """
    return -levels.e_min


def self_consistent_iterate(
    levels: LevelSet,
    tp: ThermalPoint,
    i_max: int = DEFAULT_I_MAX,
    tol: float = DEFAULT_ITERATION_TOL,
) -> IterationTrace:
    """
    Iterates H_I = H_0 + k_B T ln Tr exp(-beta H_{I-1}) on the spectrum: every level
    of H_{I-1} is the bare level shifted by the previous correction.

    Return:
        IterationTrace: corrections for I = 1..i_max and the convergence flag
    """
    tp.require_positive()
    if i_max < 1:
        raise DomainError(f"i_max must be >= 1, got {i_max}")
    bare = levels.as_array()
    corrections: List[float] = []
    previous = 0.0
    for order in range(1, i_max + 1):
        correction = tp.kT * log_sum_exp(-tp.beta * (bare + previous))
        logger.debug("order %d: E_p = %.15g", order, correction)
        corrections.append(correction)
        previous = correction
    before_last = corrections[-2] if len(corrections) > 1 else 0.0
    converged = abs(corrections[-1] - before_last) <= tol
    return IterationTrace(corrections=tuple(corrections), converged=converged, tolerance=tol)


def expectation_gap(trace: IterationTrace) -> List[float]:
    """|<H_I> - <H_{I-1}>| for every order, with <H_0> carrying no correction."""
    gaps = []
    previous = 0.0
    for correction in trace.corrections:
        gaps.append(abs(correction - previous))
        previous = correction
    return gaps


def zero_crossing(spec: SystemSpec, bracket: Bracket, tol: float = 1e-12) -> float:
    """Temperature T* inside the bracket at which E_p(T*) = 0."""
    return find_root(lambda T: ep_for_spec(spec, thermal_point(spec, T)).ep, bracket, tol)


def free_zero_temperature(m: float, units: Optional[UnitsConfig] = None) -> float:
    """Analytic zero of the free-particle E_p: T = 1 / (2 pi m k_B)."""
    kB = units.kB if units is not None else 1.0
    return 1.0 / (2.0 * math.pi * m * kB)


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Index ranges [start, stop] of maximal runs of True."""
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def validity_range(
    spec: SystemSpec,
    t_lo: float,
    t_hi: float,
    threshold: float = DEFAULT_THRESHOLD,
    samples: int = 400,
) -> ValidityReport:
    """
    Scans E_p over a uniform temperature grid and reports the maximal intervals
    where |E_p| <= threshold, with interior edges refined by root finding on
    |E_p| - threshold, together with every bracketed zero crossing of E_p.
    """
    if not 0 < t_lo < t_hi:
        raise DomainError(f"scan needs 0 < t_lo < t_hi, got [{t_lo}, {t_hi}]")
    if samples < 2:
        raise DomainError(f"scan needs at least 2 samples, got {samples}")
    if not threshold > 0:
        raise DomainError(f"validity threshold must be > 0, got {threshold}")

    grid = np.linspace(t_lo, t_hi, samples)
    ep = ep_scan(spec, grid)

    def excess(T):
        return abs(ep_for_spec(spec, thermal_point(spec, T)).ep) - threshold

    intervals = []
    for start, stop in _runs(np.abs(ep) <= threshold):
        lo = grid[start]
        hi = grid[stop]
        if start > 0:
            lo = find_root(excess, Bracket(grid[start - 1], grid[start]))
        if stop < samples - 1:
            hi = find_root(excess, Bracket(grid[stop], grid[stop + 1]))
        intervals.append(ValidityWindow(t_lo=float(lo), t_hi=float(hi)))

    def ep_of(T):
        return ep_for_spec(spec, thermal_point(spec, T)).ep

    crossings = []
    for i in range(samples - 1):
        if ep[i] == 0.0:
            crossings.append(float(grid[i]))
        elif ep[i] * ep[i + 1] < 0:
            crossings.append(find_root(ep_of, Bracket(grid[i], grid[i + 1])))
    if ep[-1] == 0.0:
        crossings.append(float(grid[-1]))

    logger.info(
        "validity scan on [%g, %g]: %d interval(s), %d crossing(s)",
        t_lo,
        t_hi,
        len(intervals),
        len(crossings),
    )
    return ValidityReport(
        intervals=tuple(intervals), crossings=tuple(crossings), threshold=threshold
    )
