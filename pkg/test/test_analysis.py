import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from thermoq.analysis import (
    DEFAULT_BOX_CONVENTION,
    FIGURE_IDS,
    AlphaMode,
    CurveTable,
    OverlapConvention,
    OverlapDomain,
    ResultTable,
    appendix_overlap_quadrature,
    appendixD_factor,
    box_overlap,
    box_overlap_closed,
    figure_curves,
    osc_overlap,
    residual_closed,
    residual_exact,
    residual_peak,
    residual_quadrature,
    residual_quadrature_alpha,
)
from thermoq.core import Box, Oscillator, ThermalPoint, UnitsConfig
from thermoq.errors import ConfigError, DomainError
from thermoq.numerics import Bracket
from thermoq.perturbation import zero_crossing
from thermoq.wavefunctions import BoxDomain, box_wave

PHYSICAL_PER_MODE = OverlapConvention(AlphaMode.PER_MODE, OverlapDomain.PHYSICAL)
FULL_LINE_PER_MODE = OverlapConvention(AlphaMode.PER_MODE, OverlapDomain.FULL_LINE)
FULL_LINE_SHARED = OverlapConvention(AlphaMode.SHARED_ALPHA, OverlapDomain.FULL_LINE)


# --- Pytest Fixtures ---
@pytest.fixture
def box():
    return Box(L=3.0)


@pytest.fixture
def oscillator():
    return Oscillator(omega=1.0)


@pytest.fixture(scope="module")
def box_star():
    """Thermal point at the zero crossing of the L=3 box."""
    return ThermalPoint(zero_crossing(Box(L=3.0), Bracket(0.5, 3.0)))


# Test OverlapConvention
def test_convention_parses_strings():
    convention = OverlapConvention("per_mode", "physical")
    assert convention.mode is AlphaMode.PER_MODE
    assert convention.box_domain() is BoxDomain.PHYSICAL


def test_convention_domain_checks():
    with pytest.raises(DomainError):
        FULL_LINE_SHARED.box_domain()
    with pytest.raises(DomainError):
        DEFAULT_BOX_CONVENTION.require_oscillator()
    with pytest.raises(ValueError):
        OverlapConvention("both", "physical")


# Test residual probability
def test_residual_closed_value():
    assert residual_closed(1, 0.1) == pytest.approx(0.0894211, abs=1e-7)
    assert residual_closed(2, 0.0) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("a", [0.01, 0.05, 0.1, 0.2, 0.5, 1.0])
def test_residual_quadrature_matches_exact(n, a):
    value = residual_quadrature_alpha(n, a, 3.0, BoxDomain.SYMMETRIC)
    assert value == pytest.approx(residual_exact(n, a), abs=1e-8)
    assert abs(value) == pytest.approx(abs(residual_closed(n, a)), abs=1e-8)


def test_residual_symmetric_sign_alternates():
    for n in (1, 2, 3):
        assert residual_exact(n, 0.1) == pytest.approx((-1) ** n * residual_closed(n, 0.1), abs=1e-13)


def test_residual_physical_domain():
    expected = math.sin(0.2 * math.pi) / (2 * math.pi * 1.1)
    assert residual_exact(1, 0.1, BoxDomain.PHYSICAL) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(0.085045, abs=1e-6)
    assert residual_quadrature_alpha(1, 0.1, 3.0, BoxDomain.PHYSICAL) == pytest.approx(expected, abs=1e-8)


def test_residual_requires_bounded_domain():
    with pytest.raises(DomainError):
        residual_exact(1, 0.1, BoxDomain.ANYWHERE)
    with pytest.raises(DomainError):
        residual_quadrature_alpha(1, 0.1, 3.0, BoxDomain.ANYWHERE)
    with pytest.raises(DomainError):
        residual_closed(0, 0.1)


def test_residual_vanishes_as_alpha_goes_to_zero():
    for n in (1, 2, 3, 4):
        assert abs(residual_closed(n, 1e-6)) <= 1e-5


def test_residual_quadrature_uses_mode_alpha(box):
    tp = ThermalPoint(2.0)
    a = box_wave(box, 1, tp).alpha
    assert residual_quadrature(box, 1, tp) == pytest.approx(residual_exact(1, a), abs=1e-8)
    physical = residual_quadrature(box, 1, tp, PHYSICAL_PER_MODE)
    assert physical == pytest.approx(residual_exact(1, a, BoxDomain.PHYSICAL), abs=1e-8)


def test_residual_peak_exceeds_claimed_band():
    alpha_peak, peak = residual_peak(1)
    assert alpha_peak == pytest.approx(0.4303, abs=2e-3)
    assert peak == pytest.approx(0.2172, abs=1e-3)
    assert peak > 0.009


# Test box overlaps
def test_box_overlap_matches_closed_form(box):
    tp = ThermalPoint(2.0)
    a1 = box_wave(box, 1, tp).alpha
    a2 = box_wave(box, 2, tp).alpha
    value = box_overlap(box, 1, 2, tp, PHYSICAL_PER_MODE)
    assert value == pytest.approx(box_overlap_closed(1, 2, a1, a2, 3.0, BoxDomain.PHYSICAL), abs=1e-9)
    # well above 0.1 at T = 2: the per-mode wavenumbers differ enough to spoil orthogonality
    assert value == pytest.approx(0.274575, abs=1e-5)
    shared = box_overlap(box, 1, 2, tp)
    assert shared == pytest.approx(box_overlap_closed(1, 2, a2, a2, 3.0, BoxDomain.SYMMETRIC), abs=1e-9)


def test_box_overlap_symmetric_domain_odd_difference(box):
    """sin(pi x/L) and sin(2 pi x/L) are not orthogonal on [-L/2, L/2]."""
    value = box_overlap(box, 1, 2, ThermalPoint(0.0))
    assert value == pytest.approx(8.0 / (3.0 * math.pi), abs=1e-9)


def test_box_overlap_delta_at_zero_crossing(box, box_star):
    for m in (1, 2, 3):
        for n in (1, 2, 3):
            value = box_overlap(box, m, n, box_star, PHYSICAL_PER_MODE)
            assert value == pytest.approx(float(m == n), abs=1e-6)


def test_box_overlap_rejects_full_line(box):
    with pytest.raises(DomainError):
        box_overlap(box, 1, 1, ThermalPoint(1.0), FULL_LINE_SHARED)
    with pytest.raises(DomainError):
        box_overlap(box, 0, 1, ThermalPoint(1.0))


# Test oscillator overlaps
def test_osc_overlap_normalised(oscillator):
    for n in range(6):
        value = osc_overlap(oscillator, n, n, ThermalPoint(1.1), FULL_LINE_PER_MODE)
        assert value == pytest.approx(1.0, abs=1e-8)


def test_osc_overlap_shared_alpha_is_orthogonal(oscillator):
    tp = ThermalPoint(1.1)
    assert osc_overlap(oscillator, 0, 2, tp) == pytest.approx(0.0, abs=1e-9)
    assert osc_overlap(oscillator, 1, 3, tp) == pytest.approx(0.0, abs=1e-9)


def test_osc_overlap_per_mode_lengths_break_orthogonality(oscillator):
    value = osc_overlap(oscillator, 0, 2, ThermalPoint(1.1), FULL_LINE_PER_MODE)
    assert value == pytest.approx(-0.035, abs=5e-3)


def test_osc_overlap_parity_zero(oscillator):
    value = osc_overlap(oscillator, 0, 1, ThermalPoint(1.1), FULL_LINE_PER_MODE)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_osc_overlap_rejects_box_domain(oscillator):
    with pytest.raises(DomainError):
        osc_overlap(oscillator, 0, 0, ThermalPoint(1.1), DEFAULT_BOX_CONVENTION)


# Test the expanded normalisation factor
@given(st.floats(min_value=-0.5, max_value=0.5))
def test_appendix_factor_polynomial(a):
    expected = 1.0 - 0.75 * a * a - 0.25 * a**3
    assert appendixD_factor(2, 2, a) == pytest.approx(expected, abs=1e-12)


def test_appendix_factor_off_diagonal():
    assert appendixD_factor(1, 3, 0.1) == 0.0
    assert appendixD_factor(0, 0, 0.1) == pytest.approx(0.99225, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=5), st.floats(min_value=0.0, max_value=0.2))
def test_appendix_quadrature_within_alpha_squared(n, a):
    value = appendix_overlap_quadrature(n, n, a)
    assert value == pytest.approx(appendixD_factor(n, n, a), abs=1e-8)
    assert abs(value - 1.0) <= a * a + 1e-8


def test_appendix_quadrature_off_diagonal():
    assert appendix_overlap_quadrature(0, 2, 0.1) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(DomainError):
        appendix_overlap_quadrature(0, 0, 1.0)


# Test tables
def test_result_table_requires_rows():
    with pytest.raises(DomainError):
        ResultTable(label="empty", frame=pd.DataFrame({"T": []}))


def test_curve_table_validation():
    with pytest.raises(DomainError):
        CurveTable.from_columns("one", {"x": [0.0, 1.0]})
    with pytest.raises(DomainError):
        CurveTable.from_columns("short", {"x": [0.0], "y": [1.0]})
    with pytest.raises(DomainError):
        CurveTable.from_columns("unsorted", {"x": [1.0, 0.0], "y": [1.0, 2.0]})
    table = CurveTable.from_columns("ok", {"x": [0.0, 1.0], "y": [1.0, 2.0]}, {"n": 1})
    assert table.grid_name == "x"
    assert table.columns == {"x": [0.0, 1.0], "y": [1.0, 2.0]}


# Test figure curves
def test_figure_2a_defaults():
    tables = figure_curves("2a")
    assert len(tables) == 4
    assert [t.meta["n"] for t in tables] == [1, 2, 1, 2]
    hot = tables[2].frame
    assert hot["psi"].iloc[-1] == pytest.approx(-0.632, abs=5e-3)


def test_figure_2a_accepts_length_list():
    tables = figure_curves("2a", {"L": [2.0], "T": [1.0], "n": [1]})
    assert tables[0].meta["L"] == 2.0
    assert tables[0].frame["x"].iloc[-1] == 2.0


def test_figure_2b_crossing_near_1_57():
    tables = figure_curves("2b")
    assert len(tables) == 5
    l3 = next(t for t in tables if t.meta["L"] == 3.0)
    assert l3.meta["zero_crossing"] == pytest.approx(1.57, abs=0.02)


def test_figure_3_reports_peak():
    tables = figure_curves("3")
    assert [t.meta["n"] for t in tables] == [1, 2, 3, 4]
    assert tables[0].meta["peak_residual"] > tables[0].meta["claimed_bound"]
    assert tables[0].frame["residual"].max() == pytest.approx(0.2172, abs=2e-3)


def test_figure_4_free_particle():
    (table,) = figure_curves("4")
    assert table.meta["analytic_zero"] == pytest.approx(1.0 / (2.0 * math.pi))
    assert table.frame["ep"].iloc[0] < 0 < table.frame["ep"].iloc[-1]


def test_figure_5_unit_modulus():
    params = {"samples": 200}
    real = figure_curves("5a", params)
    imag = figure_curves("5b", params)
    assert len(real) == len(imag) == 4
    for re_table, im_table in zip(real, imag):
        modulus = re_table.frame["re"] ** 2 + im_table.frame["im"] ** 2
        np.testing.assert_allclose(modulus, 1.0, atol=1e-12)


def test_figure_6_crossings_increase_with_omega():
    tables = figure_curves("6")
    crossings = [t.meta["zero_crossing"] for t in tables]
    assert all(c is not None for c in crossings)
    assert all(b > a for a, b in zip(crossings, crossings[1:]))


def test_figure_7_needs_omega():
    with pytest.raises(ConfigError):
        figure_curves("7")


def test_figure_7_six_modes_per_temperature():
    tables = figure_curves("7", {"omega": 0.1, "T": [0.1, 0.2]})
    assert len(tables) == 12
    assert {t.meta["T"] for t in tables} == {0.1, 0.2}


def test_figure_modes_accept_any_iterable():
    tables = figure_curves("7", {"omega": 0.1, "T": 0.1, "n": range(2)})
    assert [t.meta["n"] for t in tables] == [0, 1]


def test_figure_curves_use_given_units():
    """Doubling k_B halves every crossing temperature; mass_unit scales the free-particle zero."""
    (box_curve,) = figure_curves("2b", {"L": [3.0], "units": UnitsConfig(kB=2.0)})
    assert box_curve.meta["zero_crossing"] == pytest.approx(1.57 / 2.0, abs=0.01)
    (free_curve,) = figure_curves("4", {"units": UnitsConfig(mass_unit=2.0)})
    assert free_curve.meta["analytic_zero"] == pytest.approx(1.0 / (4.0 * math.pi))


def test_unknown_figure():
    assert "9" not in FIGURE_IDS
    with pytest.raises(ConfigError):
        figure_curves("9")
