import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_hermite

from thermoq.errors import BracketError, DomainError, QuadratureError
from thermoq.numerics import (
    DEFAULT_QUADRATURE,
    Bracket,
    QuadratureSettings,
    find_root,
    hermite,
    integrate,
    log_sum_exp,
)

# explicit physicists' Hermite polynomials up to degree 5
EXPLICIT_HERMITE = [
    lambda y: np.ones_like(y),
    lambda y: 2 * y,
    lambda y: 4 * y**2 - 2,
    lambda y: 8 * y**3 - 12 * y,
    lambda y: 16 * y**4 - 48 * y**2 + 12,
    lambda y: 32 * y**5 - 160 * y**3 + 120 * y,
]


# Test QuadratureSettings and Bracket
def test_quadrature_settings_defaults():
    assert DEFAULT_QUADRATURE.abs_tol == 1e-10
    assert DEFAULT_QUADRATURE.rel_tol == 1e-10
    assert DEFAULT_QUADRATURE.max_depth == 50
    assert DEFAULT_QUADRATURE.infinite_cutoff == 12.0


@pytest.mark.parametrize(
    "kwargs", [{"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_depth": 0}, {"infinite_cutoff": 0.0}]
)
def test_quadrature_settings_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureSettings(**kwargs)


def test_bracket_ordering():
    with pytest.raises(DomainError):
        Bracket(1.0, 1.0)


# Test integrate
def test_integrate_polynomial():
    assert integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_integrate_gaussian_infinite_limits():
    value = integrate(lambda x: math.exp(-x * x), -math.inf, math.inf)
    assert value == pytest.approx(math.sqrt(math.pi), abs=1e-9)


def test_integrate_box_probability():
    """In-box probability of the first-order mode, L=3, alpha=0.1, on [-L/2, L/2]."""
    L, a = 3.0, 0.1
    value = integrate(lambda x: 2.0 / L * math.sin(math.pi * x * (1 + a) / L) ** 2, -L / 2, L / 2)
    assert value == pytest.approx(1.0 - math.sin(math.pi * (1 + a)) / (math.pi * (1 + a)), abs=1e-9)
    # odd mode: the probability exceeds one on the symmetric interval
    assert value == pytest.approx(1.0894211, abs=1e-6)


def test_integrate_is_deterministic():
    f = lambda x: math.sin(3 * x) * math.exp(-x)
    assert integrate(f, 0.0, 5.0) == integrate(f, 0.0, 5.0)


def test_integrate_rejects_reversed_limits():
    with pytest.raises(DomainError):
        integrate(lambda x: x, 1.0, 0.0)


def test_integrate_rejects_non_finite_integrand():
    with pytest.raises(DomainError):
        integrate(lambda x: math.inf, 0.0, 1.0)


def test_integrate_reports_non_convergence():
    tight = QuadratureSettings(abs_tol=1e-14, rel_tol=1e-14, max_depth=1)
    with pytest.raises(QuadratureError) as excinfo:
        integrate(lambda x: math.sqrt(abs(x - 0.3)), 0.0, 1.0, tight)
    assert excinfo.value.estimate == pytest.approx(0.5, abs=0.01)
    assert excinfo.value.error_bound > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
def test_integrate_is_linear(a, b):
    f = lambda x: math.cos(x)
    g = lambda x: x**3 - x
    combined = integrate(lambda x: a * f(x) + b * g(x), -1.0, 2.0)
    separate = a * integrate(f, -1.0, 2.0) + b * integrate(g, -1.0, 2.0)
    assert combined == pytest.approx(separate, abs=10 * DEFAULT_QUADRATURE.abs_tol * max(1.0, abs(a) + abs(b)))


# Test find_root
def test_find_root_linear():
    assert find_root(lambda x: x - 2.0, Bracket(0.0, 5.0)) == pytest.approx(2.0, abs=1e-12)


def test_find_root_endpoint_exact_zero():
    assert find_root(lambda x: x, Bracket(0.0, 1.0)) == 0.0


def test_find_root_without_sign_change():
    with pytest.raises(BracketError) as excinfo:
        find_root(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))
    assert excinfo.value.f_lo == 2.0


@given(st.floats(min_value=-9.0, max_value=9.0))
def test_find_root_stays_in_bracket(r):
    root = find_root(lambda x: math.tanh(x - r), Bracket(-10.0, 10.0))
    assert -10.0 <= root <= 10.0
    assert root == pytest.approx(r, abs=1e-9)


# Test hermite
def test_hermite_small_values():
    assert hermite(0, 0.7) == 1.0
    assert hermite(1, 2.0) == 4.0
    assert hermite(3, 1.0) == -4.0


def test_hermite_matches_explicit_polynomials():
    y = np.linspace(-3.0, 3.0, 20)
    for n, poly in enumerate(EXPLICIT_HERMITE):
        np.testing.assert_allclose(hermite(n, y), poly(y), rtol=1e-12, atol=1e-12)


def test_hermite_matches_scipy_up_to_degree_50():
    y = np.linspace(-4.0, 4.0, 17)
    for n in (10, 25, 50):
        reference = eval_hermite(n, y)
        np.testing.assert_allclose(hermite(n, y), reference, rtol=1e-9, atol=1e-9 * np.abs(reference).max())


def test_hermite_negative_degree():
    with pytest.raises(DomainError):
        hermite(-1, 0.0)


# Test log_sum_exp
def test_log_sum_exp_examples():
    assert log_sum_exp([0.0]) == 0.0
    assert log_sum_exp([math.log(2), math.log(2)]) == pytest.approx(math.log(4), abs=1e-15)
    assert log_sum_exp([-10000.0, -10001.0]) == pytest.approx(
        -10000.0 + math.log1p(math.exp(-1.0)), abs=1e-9
    )
    assert log_sum_exp([-10000.0, -10001.0]) == pytest.approx(-9999.6867, abs=1e-4)


def test_log_sum_exp_deep_negative():
    assert log_sum_exp([-1e6, -1e6]) == pytest.approx(-1e6 + math.log(2.0), abs=1e-9)


def test_log_sum_exp_empty():
    with pytest.raises(DomainError):
        log_sum_exp([])


@given(
    st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=20),
    st.floats(min_value=-100, max_value=100),
)
def test_log_sum_exp_shift_identity(values, c):
    shifted = log_sum_exp([v + c for v in values])
    assert shifted == pytest.approx(log_sum_exp(values) + c, abs=1e-12)
