"""
Numerical kernels used by the physics modules: adaptive Simpson quadrature,
bracketing root finding, the Hermite recurrence and a stable log-sum-exp.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from thermoq.errors import BracketError, DomainError, QuadratureError

logger = logging.getLogger(__name__)

# panels evaluated before adaptive refinement starts
_INITIAL_PANELS = 8


@dataclass(frozen=True)
class QuadratureSettings:
    """
    Tolerances of the adaptive Simpson integrator.

    infinite_cutoff is the half-width, in multiples of the caller's length scale,
    at which infinite integration limits are truncated. max_evals bounds the total
    number of integrand evaluations of one call.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 50
    infinite_cutoff: float = 12.0
    max_evals: int = 2_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_depth < 1:
            raise DomainError(f"max_depth must be >= 1, got {self.max_depth}")
        if not self.infinite_cutoff > 0:
            raise DomainError("infinite_cutoff must be strictly positive")
        if self.max_evals < 2 * _INITIAL_PANELS + 1:
            raise DomainError(f"max_evals too small: {self.max_evals}")


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 3.0 * (fa + 4.0 * fm + fb)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
    scale: float = 1.0,
) -> float:
    """
    Adaptive Simpson integration of f over [a, b].

    Infinite limits are truncated at -/+ settings.infinite_cutoff * scale, which is
    adequate for integrands with Gaussian decay on that length scale. The local
    tolerance of a panel is proportional to its width, so the sum of accepted
    panel errors stays below max(abs_tol, rel_tol * |I|).

    Return:
        float: the Richardson-corrected estimate of the integral
    """
    if math.isinf(a):
        a = math.copysign(settings.infinite_cutoff * scale, a)
    if math.isinf(b):
        b = math.copysign(settings.infinite_cutoff * scale, b)
    if not a < b:
        raise DomainError(f"integration needs a < b, got [{a}, {b}]")

    evals = 0

    def fx(x):
        nonlocal evals
        evals += 1
        value = float(f(x))
        if not math.isfinite(value):
            raise DomainError(f"integrand is not finite at x={x}")
        return value

    width = b - a
    nodes = np.linspace(a, b, 2 * _INITIAL_PANELS + 1)
    values = [fx(x) for x in nodes]
    panels = []
    coarse = 0.0
    for i in range(_INITIAL_PANELS):
        lo, mid, hi = nodes[2 * i], nodes[2 * i + 1], nodes[2 * i + 2]
        whole = _simpson(values[2 * i], values[2 * i + 1], values[2 * i + 2], (hi - lo) / 2)
        coarse += whole
        panels.append((lo, hi, values[2 * i], values[2 * i + 1], values[2 * i + 2], whole))

    tol = max(settings.abs_tol, settings.rel_tol * abs(coarse))
    total = 0.0
    error = 0.0
    failed = False
    # explicit stack: (a, b, fa, fm, fb, whole, depth)
    stack = [(lo, hi, fa, fm, fb, whole, 0) for lo, hi, fa, fm, fb, whole in reversed(panels)]
    while stack:
        lo, hi, fa, fm, fb, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        flm = fx(0.5 * (lo + mid))
        frm = fx(0.5 * (mid + hi))
        left = _simpson(fa, flm, fm, h / 2)
        right = _simpson(fm, frm, fb, h / 2)
        delta = (left + right - whole) / 15.0
        local_tol = tol * (hi - lo) / width
        if abs(delta) <= local_tol or depth >= settings.max_depth or evals >= settings.max_evals:
            if abs(delta) > local_tol:
                failed = True
            total += left + right + delta
            error += abs(delta)
            continue
        stack.append((mid, hi, fm, frm, fb, right, depth + 1))
        stack.append((lo, mid, fa, flm, fm, left, depth + 1))

    if failed:
        raise QuadratureError(
            f"adaptive Simpson on [{a}, {b}] did not converge "
            f"(max_depth={settings.max_depth}, evaluations={evals})",
            estimate=total,
            error_bound=error,
        )
    return total


def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-12) -> float:
    """
    Locates a sign change of f inside the bracket with Brent's method, which falls
    back to bisection whenever interpolation does not shrink the bracket.

    Return:
        float: the root, always inside [bracket.lo, bracket.hi]
    """
    f_lo = float(f(bracket.lo))
    f_hi = float(f(bracket.hi))
    if f_lo == 0.0:
        return bracket.lo
    if f_hi == 0.0:
        return bracket.hi
    if f_lo * f_hi > 0 or not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise BracketError(bracket.lo, bracket.hi, f_lo, f_hi)
    root = brentq(f, bracket.lo, bracket.hi, xtol=tol, maxiter=200)
    logger.debug("root %.15g found in [%g, %g]", root, bracket.lo, bracket.hi)
    return float(root)


def hermite(n: int, y):
    """
    Physicists' Hermite polynomial H_n(y) from H_{k+1} = 2y H_k - 2k H_{k-1}.
    Accepts a scalar or a numpy array; n up to about 50 stays finite for |y| < 20.
    """
    if n < 0:
        raise DomainError(f"Hermite degree must be >= 0, got {n}")
    y = np.asarray(y, dtype=float)
    h_prev = np.ones_like(y)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * y
    for k in range(1, n):
        h_prev, h = h, 2.0 * y * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def log_sum_exp(values: Sequence[float]) -> float:
    """
    ln sum_i exp(v_i), evaluated with a max shift so that large negative entries
    (down to -1e6 and beyond) neither underflow nor lose precision.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("log_sum_exp needs at least one value")
    return float(logsumexp(values))
