"""
Invariant suite run by the `verify` command: limits, scaling laws, closed forms
against quadrature, and the iteration algebra.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from thermoq.analysis import (
    FIG3_CLAIMED_BOUND,
    AlphaMode,
    OverlapConvention,
    OverlapDomain,
    appendix_overlap_quadrature,
    appendixD_factor,
    box_overlap,
    osc_overlap,
    residual_closed,
    residual_exact,
    residual_peak,
    residual_quadrature_alpha,
)
from thermoq.core import Box, Oscillator, ThermalPoint, make_levels
from thermoq.errors import ConfigError
from thermoq.numerics import DEFAULT_QUADRATURE, Bracket, QuadratureSettings
from thermoq.perturbation import (
    ep_discrete,
    ep_free,
    ep_free_equipartition,
    free_zero_temperature,
    self_consistent_iterate,
    zero_crossing,
)
from thermoq.wavefunctions import BoxDomain, box_psi, box_wave, free_k, free_k_approx

logger = logging.getLogger(__name__)

RESIDUAL_ALPHAS = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0)
RESIDUAL_MODES = (1, 2, 3, 4)
QUADRATURE_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    """
    Outcome of one invariant. deviation marks checks that confirm a documented
    disagreement with a statement of the source derivation.
    """

    name: str
    passed: bool
    value: float
    target: float
    tolerance: float
    detail: str = ""
    deviation: bool = False

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        note = " [documented deviation]" if self.deviation else ""
        return (
            f"{status} {self.name}: value={self.value:.12g} target={self.target:.12g} "
            f"tol={self.tolerance:.3g}{note} {self.detail}".rstrip()
        )


def _check(name, value, target, tolerance, detail="", deviation=False) -> Check:
    passed = bool(abs(value - target) <= tolerance)
    return Check(name, passed, float(value), float(target), float(tolerance), detail, deviation)


class VerificationSuite:
    """
    Runs named groups of checks. comparison_tol, when given, replaces the tolerance of
    every quadrature-versus-closed-form comparison.
    """

    def __init__(
        self,
        comparison_tol: Optional[float] = None,
        quadrature: QuadratureSettings = DEFAULT_QUADRATURE,
        alpha: float = 0.1,
        seed: int = 7,
    ):
        self.comparison_tol = comparison_tol
        self.quadrature = quadrature
        self.alpha = alpha
        self.seed = seed
        self.groups: Dict[str, Callable[[], List[Check]]] = {
            "box_zero": self.box_zero,
            "scaling": self.scaling,
            "free_zero": self.free_zero,
            "boundary": self.boundary,
            "residual": self.residual,
            "residual_limit": self.residual_limit,
            "fig3_bound": self.fig3_bound,
            "oscillator_norm": self.oscillator_norm,
            "appendixD": self.appendix_d,
            "shift_covariance": self.shift_covariance,
            "iteration": self.iteration,
            "low_temperature": self.low_temperature,
            "free_k": self.free_k,
            "overlaps": self.overlaps,
        }

    def _quad_tol(self, default: float) -> float:
        return default if self.comparison_tol is None else self.comparison_tol

    def run(self, names: Optional[Iterable[str]] = None) -> List[Check]:
        """
        Return:
            List[Check]: results of the selected groups (all by default), in group order
        """
        selected = list(names) if names else list(self.groups)
        unknown = [name for name in selected if name not in self.groups]
        if unknown:
            raise ConfigError(
                f"unknown check(s) {', '.join(unknown)}; available: {', '.join(self.groups)}"
            )
        results = []
        for name in selected:
            checks = self.groups[name]()
            for check in checks:
                if check.deviation:
                    logger.warning("documented deviation %s: %s", check.name, check.detail)
            logger.info("%s: %d/%d passed", name, sum(c.passed for c in checks), len(checks))
            results.extend(checks)
        return results

    def box_zero(self) -> List[Check]:
        t_star = zero_crossing(Box(L=3.0), Bracket(0.5, 3.0))
        return [_check("box_zero_crossing_L3", t_star, 1.57, 0.02)]

    def scaling(self) -> List[Check]:
        box_products = []
        for L in (1.0, 2.0, 3.0, 4.0, 5.0):
            factor = (3.0 / L) ** 2
            t_star = zero_crossing(Box(L=L), Bracket(0.1 * factor, 5.0 * factor))
            box_products.append(t_star * L * L)
        osc_ratios = []
        for omega in (0.5, 1.0, 2.0, 4.0, 8.0):
            t_star = zero_crossing(Oscillator(omega=omega), Bracket(0.5 * omega, 2.0 * omega))
            osc_ratios.append(t_star / omega)

        def spread(values):
            return (max(values) - min(values)) / abs(np.mean(values))

        return [
            _check("scaling_box_TL2", spread(box_products), 0.0, 1e-6, f"T*L^2={box_products[0]:.10g}"),
            _check("scaling_osc_T_over_omega", spread(osc_ratios), 0.0, 1e-6, f"T*/omega={osc_ratios[0]:.10g}"),
        ]

    def free_zero(self) -> List[Check]:
        t0 = free_zero_temperature(1.0)
        tp = ThermalPoint(0.5)
        return [
            _check("free_zero_at_1_over_2pi", ep_free(ThermalPoint(t0), 1.0).ep, 0.0, 1e-10,
                   "E_p also vanishes away from absolute zero", deviation=True),
            _check("free_equipartition_form", ep_free_equipartition(tp, 1.0), ep_free(tp, 1.0).ep, 1e-12),
        ]

    def boundary(self) -> List[Check]:
        spec = Box(L=3.0)
        bound = 1e-2 * math.sqrt(2.0 / spec.L)
        checks = []
        for n in (1, 2):
            value = box_psi(box_wave(spec, n, ThermalPoint(1.57)), spec.L)
            checks.append(_check(f"boundary_T1.57_n{n}", abs(value), 0.0, bound))
        value = box_psi(box_wave(spec, 1, ThermalPoint(2.0)), spec.L)
        checks.append(_check("boundary_T2.0_n1", abs(value), 0.632, 0.005))
        return checks

    def residual(self) -> List[Check]:
        tol = self._quad_tol(QUADRATURE_TOL)
        worst_exact = 0.0
        worst_magnitude = 0.0
        for n in RESIDUAL_MODES:
            for a in RESIDUAL_ALPHAS:
                quad = residual_quadrature_alpha(n, a, 3.0, BoxDomain.SYMMETRIC, self.quadrature)
                worst_exact = max(worst_exact, abs(quad - residual_exact(n, a)))
                worst_magnitude = max(worst_magnitude, abs(abs(quad) - abs(residual_closed(n, a))))
        physical = residual_quadrature_alpha(1, 0.1, 3.0, BoxDomain.PHYSICAL, self.quadrature)
        odd_sign = residual_quadrature_alpha(1, 0.1, 3.0, BoxDomain.SYMMETRIC, self.quadrature)
        return [
            _check("residual_quadrature_vs_exact", worst_exact, 0.0, tol),
            _check("residual_quadrature_vs_closed_magnitude", worst_magnitude, 0.0, tol),
            _check(
                "residual_physical_domain",
                physical,
                residual_exact(1, 0.1, BoxDomain.PHYSICAL),
                tol,
            ),
            _check(
                "residual_odd_mode_sign",
                odd_sign,
                -residual_closed(1, 0.1),
                tol,
                "closed form carries sin(n pi alpha) where the integral gives (-1)^n sin(n pi alpha)",
                deviation=True,
            ),
        ]

    def residual_limit(self) -> List[Check]:
        worst = max(abs(residual_closed(n, 1e-6)) for n in RESIDUAL_MODES)
        return [_check("residual_alpha_to_zero", worst, 0.0, 1e-5)]

    def fig3_bound(self) -> List[Check]:
        alpha_peak, peak = residual_peak(1)
        return [
            Check(
                "fig3_claimed_bound",
                peak > FIG3_CLAIMED_BOUND,
                peak,
                FIG3_CLAIMED_BOUND,
                0.0,
                f"n=1 maximum at alpha={alpha_peak:.4f} exceeds the claimed band",
                deviation=True,
            )
        ]

    def oscillator_norm(self) -> List[Check]:
        tol = self._quad_tol(QUADRATURE_TOL)
        spec = Oscillator(omega=1.0)
        per_mode = OverlapConvention(AlphaMode.PER_MODE, OverlapDomain.FULL_LINE)
        checks = []
        for T in (1.1, 1.2):
            worst = max(
                abs(osc_overlap(spec, n, n, ThermalPoint(T), per_mode, self.quadrature) - 1.0)
                for n in range(6)
            )
            checks.append(_check(f"oscillator_norm_T{T:g}", worst, 0.0, tol))
        return checks

    def appendix_d(self) -> List[Check]:
        a = self.alpha
        factor = appendixD_factor(1, 1, a)
        polynomial = 1.0 - 0.75 * a * a - 0.25 * a**3
        quad = appendix_overlap_quadrature(1, 1, a, 1.0, self.quadrature)
        return [
            _check("appendixD_polynomial", factor, polynomial, 1e-12),
            _check("appendixD_quadrature", quad, factor, self._quad_tol(a * a)),
            _check(
                "appendixD_vs_exact_normalisation",
                factor,
                1.0,
                a * a,
                f"expanded factor {factor:.6g} vs exact 1.0",
                deviation=True,
            ),
        ]

    def shift_covariance(self) -> List[Check]:
        rng = np.random.default_rng(self.seed)
        shifts = rng.uniform(-5.0, 5.0, size=20)
        checks = []
        for label, levels, T in (
            ("box", make_levels(Box(L=3.0)), 2.0),
            ("oscillator", make_levels(Oscillator(omega=1.0)), 1.1),
        ):
            tp = ThermalPoint(T)
            base = ep_discrete(levels, tp).ep
            worst = max(abs(ep_discrete(levels.shifted(c), tp).ep - (base - c)) for c in shifts)
            checks.append(_check(f"shift_covariance_{label}", worst, 0.0, 1e-12))
        return checks

    def iteration(self) -> List[Check]:
        levels = make_levels(Box(L=3.0))
        trace = self_consistent_iterate(levels, ThermalPoint(2.0), i_max=6, tol=1e-6)
        first = trace.corrections[0]
        worst = max(
            abs(c - (first if i % 2 == 0 else 0.0)) for i, c in enumerate(trace.corrections)
        )
        consistent = True
        for T in np.linspace(0.5, 3.0, 26):
            tp = ThermalPoint(float(T))
            ep = ep_discrete(levels, tp).ep
            for tol in (1e-3, 1e-2, 1e-1):
                converged = self_consistent_iterate(levels, tp, i_max=4, tol=tol).converged
                consistent = consistent and (converged == (abs(ep) <= tol))
        return [
            _check("iteration_alternation", worst, 0.0, 1e-12),
            Check("iteration_converges_iff_small", consistent, float(consistent), 1.0, 0.0),
        ]

    def low_temperature(self) -> List[Check]:
        tp = ThermalPoint(1e-4)
        checks = []
        for label, spec in (("box", Box(L=3.0)), ("oscillator", Oscillator(omega=1.0))):
            levels = make_levels(spec)
            checks.append(
                _check(
                    f"low_temperature_{label}",
                    ep_discrete(levels, tp).ep,
                    -levels.e_min,
                    1e-3,
                    "limit is -E_min, not zero",
                    deviation=True,
                )
            )
        checks.append(_check("low_temperature_free", ep_free(ThermalPoint(1e-6), 1.0).ep, 0.0, 1e-5))
        return checks

    def free_k(self) -> List[Check]:
        tp = ThermalPoint(0.01)
        return [_check("free_k_binomial_gap", free_k(1.0, tp), free_k_approx(1.0, tp), 1e-4)]

    def overlaps(self) -> List[Check]:
        box = Box(L=3.0)
        osc = Oscillator(omega=1.0)
        box_star = ThermalPoint(zero_crossing(box, Bracket(0.5, 3.0)))
        osc_star = ThermalPoint(zero_crossing(osc, Bracket(0.5, 2.0)))
        physical = OverlapConvention(AlphaMode.PER_MODE, OverlapDomain.PHYSICAL)
        full_line = OverlapConvention(AlphaMode.PER_MODE, OverlapDomain.FULL_LINE)
        worst_box = max(
            abs(box_overlap(box, m, n, box_star, physical, self.quadrature) - (m == n))
            for m in (1, 2, 3)
            for n in (1, 2, 3)
        )
        worst_osc = max(
            abs(osc_overlap(osc, m, n, osc_star, full_line, self.quadrature) - (m == n))
            for m in range(4)
            for n in range(4)
        )
        return [
            _check("overlap_box_delta_at_zero_crossing", worst_box, 0.0, 1e-6),
            _check("overlap_oscillator_delta_at_zero_crossing", worst_osc, 0.0, 1e-6),
        ]


def all_passed(checks: List[Check]) -> bool:
    return all(check.passed for check in checks)
