"""
Temperature-dependent wavefunctions of the three model systems and the
perturbation ratio alpha = E_p(T) / 2 E_n(0).

Wave descriptors accept T = 0, where E_p is taken as exactly zero and the
zero-temperature textbook forms are returned.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from thermoq.core import Box, Oscillator, SystemSpec, ThermalPoint, level_energy, x0
from thermoq.errors import (
    DomainError,
    EvanescentRegimeError,
    FrequencyCollapseError,
)
from thermoq.numerics import hermite
from thermoq.perturbation import DEFAULT_THRESHOLD, ep_for_spec

logger = logging.getLogger(__name__)


class BoxDomain(str, Enum):
    PHYSICAL = "physical"  # [0, L]
    SYMMETRIC = "symmetric"  # [-L/2, L/2]
    ANYWHERE = "anywhere"  # plotting, no check

    def bounds(self, L: float):
        if self is BoxDomain.PHYSICAL:
            return 0.0, L
        if self is BoxDomain.SYMMETRIC:
            return -0.5 * L, 0.5 * L
        return -math.inf, math.inf


def _ep(spec: SystemSpec, tp: ThermalPoint, threshold: float = DEFAULT_THRESHOLD) -> float:
    if tp.is_zero:
        return 0.0
    result = ep_for_spec(spec, tp, threshold)
    if not result.within_validity:
        logger.warning(
            "T=%g lies outside the validity range (|E_p|=%.4g > %g)",
            tp.T,
            abs(result.ep),
            threshold,
        )
    return result.ep


def alpha(spec: SystemSpec, n: int, tp: ThermalPoint) -> float:
    """
    Perturbation ratio alpha_n = E_p(T) / (2 E_n(0)) of one mode.

    Return:
        float: alpha for mode n, zero at any zero crossing of E_p
    """
    tp.require_positive()
    e0 = level_energy(spec, n)
    if not e0 > 0:
        raise DomainError(f"alpha needs E_n(0) > 0, got {e0}")
    return ep_for_spec(spec, tp).ep / (2.0 * e0)


# --- particle in a box ---


@dataclass(frozen=True)
class BoxWave:
    n: int
    L: float
    T: float
    k_eff: float
    alpha: float


def box_wave(spec: Box, n: int, tp: ThermalPoint) -> BoxWave:
    """
    Mode n of the box at temperature T with k_eff = sqrt(2 m E_n(T)) / hbar.
    Fails when E_n(T) < 0, where k_eff would not be real.
    """
    e0 = level_energy(spec, n)
    ep = _ep(spec, tp)
    e_T = e0 + ep
    if e_T < 0:
        raise DomainError(f"E_{n}(T={tp.T}) = {e_T:.6g} < 0, wavenumber is not real")
    if ep == 0.0:
        k_eff = n * math.pi / spec.L
    else:
        k_eff = math.sqrt(2.0 * spec.units.mass(spec.m) * e_T) / spec.units.hbar
    return BoxWave(n=n, L=spec.L, T=tp.T, k_eff=k_eff, alpha=ep / (2.0 * e0))


def _check_box_domain(w: BoxWave, x, domain: BoxDomain):
    lo, hi = BoxDomain(domain).bounds(w.L)
    x = np.asarray(x, dtype=float)
    if np.any(x < lo) or np.any(x > hi):
        raise DomainError(f"position outside the {BoxDomain(domain).value} box [{lo}, {hi}]")
    return x


def box_psi(w: BoxWave, x, domain: BoxDomain = BoxDomain.PHYSICAL):
    """sqrt(2/L) sin(k_eff x); x may be a scalar or an array."""
    x = _check_box_domain(w, x, domain)
    psi = math.sqrt(2.0 / w.L) * np.sin(w.k_eff * x)
    return psi if psi.ndim else float(psi)


def box_psi_linearized(w: BoxWave, x, domain: BoxDomain = BoxDomain.PHYSICAL):
    """Box mode with the first-order wavenumber (n pi / L)(1 + alpha)."""
    x = _check_box_domain(w, x, domain)
    k = w.n * math.pi / w.L * (1.0 + w.alpha)
    psi = math.sqrt(2.0 / w.L) * np.sin(k * x)
    return psi if psi.ndim else float(psi)


# --- free particle ---


@dataclass(frozen=True)
class FreeWave:
    k: float
    T: float
    direction: int
    k_T: float


def _thermal_log_term(tp: ThermalPoint, m: float, hbar: float) -> float:
    """(m / hbar^2) k_B T ln(2 pi m k_B T); zero at T = 0."""
    if tp.is_zero:
        return 0.0
    return m / hbar**2 * tp.kT * math.log(2.0 * math.pi * m * tp.kT)


def free_k(k: float, tp: ThermalPoint, m: float = 1.0) -> float:
    """
    Temperature-dependent wave vector k(T) = [k^2 + (m/hbar^2) k_B T ln(2 pi m k_B T)]^(1/2),
    evaluated without expansion. m is the formula mass, i.e. UnitsConfig.mass(m) of the
    system; hbar and k_B come from tp.units.
    """
    radicand = k * k + _thermal_log_term(tp, m, tp.units.hbar)
    if radicand < 0:
        raise EvanescentRegimeError(k, tp.T, radicand)
    return math.sqrt(radicand)


def free_k_approx(k: float, tp: ThermalPoint, m: float = 1.0) -> float:
    """First-order binomial expansion k [1 + (m k_B T / 2 hbar^2 k^2) ln(2 pi m k_B T)]."""
    if k == 0:
        raise DomainError("the binomial expansion of k(T) needs k != 0")
    return k * (1.0 + _thermal_log_term(tp, m, tp.units.hbar) / (2.0 * k * k))


def free_energy(k: float, tp: ThermalPoint, m: float = 1.0) -> float:
    """Spectrum E_k(T) = hbar^2 k^2 / 2m + E_p(T) of the free particle."""
    hbar = tp.units.hbar
    kinetic = hbar**2 * k * k / (2.0 * m)
    if tp.is_zero:
        return kinetic
    return kinetic + 0.5 * tp.kT * math.log(2.0 * math.pi * m * tp.kT)


def free_wave(k: float, tp: ThermalPoint, m: float = 1.0, direction: int = +1) -> FreeWave:
    if direction not in (+1, -1):
        raise DomainError(f"direction must be +1 or -1, got {direction}")
    return FreeWave(k=k, T=tp.T, direction=direction, k_T=free_k(k, tp, m))


def free_psi(w: FreeWave, x):
    """Plane wave exp(+/- i k(T) x); unit modulus everywhere."""
    psi = np.exp(1j * w.direction * w.k_T * np.asarray(x, dtype=float))
    return psi if psi.ndim else complex(psi)


def free_psi_approx(k: float, tp: ThermalPoint, x, m: float = 1.0, direction: int = +1):
    """exp(+/- i k x) exp(+/- i [m k_B T / 2 hbar^2 k] ln(2 pi m k_B T) x)."""
    k_approx = free_k_approx(k, tp, m)
    psi = np.exp(1j * direction * k_approx * np.asarray(x, dtype=float))
    return psi if psi.ndim else complex(psi)


# --- harmonic oscillator ---


@dataclass(frozen=True)
class OscWave:
    n: int
    omega: float
    T: float
    Omega_n: float
    x0_nT: float


def osc_omega(spec: Oscillator, n: int, tp: ThermalPoint) -> float:
    """
    Generalised angular frequency Omega_n(T) = omega + E_p(T) / ((n + 1/2) hbar).

    Return:
        float: Omega_n(T) > 0; FrequencyCollapseError otherwise
    """
    tp.require_positive()
    if n < 0:
        raise DomainError(f"oscillator modes start at n=0, got n={n}")
    omega_n = spec.omega + _ep(spec, tp) / ((n + 0.5) * spec.units.hbar)
    if omega_n <= 0:
        raise FrequencyCollapseError(n, tp.T, omega_n)
    return omega_n


def osc_wave(spec: Oscillator, n: int, tp: ThermalPoint) -> OscWave:
    omega_n = spec.omega if tp.is_zero else osc_omega(spec, n, tp)
    length = math.sqrt(spec.units.hbar / (spec.units.mass(spec.m) * omega_n))
    return OscWave(n=n, omega=spec.omega, T=tp.T, Omega_n=omega_n, x0_nT=length)


def osc_length(spec: Oscillator, n: int, tp: ThermalPoint) -> float:
    """Characteristic length x0(n, T) = sqrt(hbar / m Omega_n(T))."""
    return osc_wave(spec, n, tp).x0_nT


def osc_length_linearized(spec: Oscillator, n: int, tp: ThermalPoint) -> float:
    """First-order form x0 (1 - alpha_n) of the characteristic length."""
    return x0(spec) * (1.0 - alpha(spec, n, tp))


def hermite_function(n: int, x, length: float):
    """
    Normalised Hermite function of degree n on the length scale `length`; the
    prefactor (sqrt(pi) 2^n n! length)^(-1/2) is built in log space.
    """
    y = np.asarray(x, dtype=float) / length
    log_norm = -0.5 * (0.5 * math.log(math.pi) + n * math.log(2.0) + gammaln(n + 1) + math.log(length))
    psi = np.exp(log_norm - 0.5 * y * y) * hermite(n, y)
    return psi if np.ndim(psi) else float(psi)


def osc_psi(w: OscWave, x):
    """Oscillator mode n at temperature T on its own length scale x0(n, T)."""
    return hermite_function(w.n, x, w.x0_nT)
