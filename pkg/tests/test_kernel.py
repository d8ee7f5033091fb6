import math

import numpy as np
import pytest

from fracbvp.grid import make_mesh, production_mesh
from fracbvp.kernel import gamma, green_eval, green_hat_integral, green_integral

from oracles import gauss_kernel_hat_integral

ALPHAS = (1.1, 1.25, 1.5, 1.75, 2.0)


def test_gamma_known_values():
    assert gamma(1.0) == 1.0
    assert gamma(2.0) == 1.0
    assert abs(gamma(0.5) - math.sqrt(math.pi)) < 1e-12
    assert abs(gamma(5.0) - 24.0) < 1e-10


def test_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        gamma(0.0)
    with pytest.raises(ValueError):
        gamma(-1.5)


def test_green_classical_point():
    # alpha = 2 reduces to the classical kernel s(1-t) for s <= t
    assert green_eval(0.5, 0.5, 2.0) == pytest.approx(0.25, abs=1e-15)
    assert green_eval(0.7, 0.2, 2.0) == pytest.approx(0.2 * 0.3, abs=1e-15)
    assert green_eval(0.2, 0.7, 2.0) == pytest.approx(0.2 * 0.3, abs=1e-15)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_green_vanishes_at_s_boundary(alpha):
    t = np.linspace(0.0, 1.0, 11)
    assert np.all(green_eval(t, np.zeros_like(t), alpha) == 0.0)
    assert np.all(np.abs(green_eval(t, np.ones_like(t), alpha)) < 1e-15)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_green_vanishes_at_t_boundary(alpha):
    s = np.linspace(0.0, 1.0, 11)
    assert np.all(green_eval(np.zeros_like(s), s, alpha) == 0.0)
    assert np.all(np.abs(green_eval(np.ones_like(s), s, alpha)) < 1e-15)


def test_green_integral_closed_form_value():
    # integral over s at t = 0.25, alpha = 1.5: t^(alpha-1)(1-t)/Gamma(alpha+1)
    expected = 0.25 ** 0.5 * 0.75 / gamma(2.5)
    assert green_integral(0.25, 1.5) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.2820948, abs=5e-7)


@pytest.mark.parametrize("alpha", (1.1, 1.5, 2.0))
@pytest.mark.parametrize("grading", ("uniform", "graded"))
def test_hat_integrals_sum_to_kernel_integral(alpha, grading):
    # hats sum to one, so summing the closed-form hat integrals must
    # reproduce the closed-form kernel integral to rounding
    mesh = (make_mesh(80, "uniform") if grading == "uniform"
            else production_mesh(alpha, 80))
    t = np.linspace(0.0, 1.0, 37)
    total = np.zeros_like(t)
    for j in range(len(mesh.nodes)):
        total += green_hat_integral(t, j, mesh, alpha)
    assert np.max(np.abs(total - green_integral(t, alpha))) < 1e-13


@pytest.mark.parametrize("alpha", ALPHAS)
def test_hat_integrals_vanish_at_t_boundary(alpha):
    mesh = make_mesh(16, "uniform")
    for j in range(len(mesh.nodes)):
        assert abs(green_hat_integral(0.0, j, mesh, alpha)) < 1e-15
        assert abs(green_hat_integral(1.0, j, mesh, alpha)) < 1e-15


@pytest.mark.parametrize("alpha", (1.5, 2.0))
def test_hat_integral_against_quadrature_oracle(alpha):
    # independent composite-Gauss oracle, split at the kink s = t
    mesh = make_mesh(10, "uniform")
    for t in (0.131, 0.5, 0.77):
        for j in (0, 3, 5, 10):
            oracle = gauss_kernel_hat_integral(t, j, mesh.nodes, alpha)
            closed = green_hat_integral(t, j, mesh, alpha)
            assert closed == pytest.approx(oracle, abs=1e-13)


def _property_grid(n_t=41, n_s=41):
    t = np.linspace(0.0, 1.0, n_t)[:, None]
    s = np.linspace(0.0, 1.0, n_s)[None, :]
    return t, s


@pytest.mark.parametrize("alpha", ALPHAS)
def test_kernel_nonnegative(alpha):
    t, s = _property_grid()
    assert np.min(green_eval(t, s, alpha)) >= -1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
def test_kernel_hump_bound(alpha):
    t, s = _property_grid()
    g = green_eval(t, s, alpha)
    hump = (s * (1.0 - s)) ** (alpha - 1.0) / gamma(alpha)
    assert np.all(g <= hump + 1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_kernel_two_sided_bound(alpha):
    t, s = _property_grid()
    g = green_eval(t, s, alpha)
    lower = ((alpha - 1.0) / gamma(alpha)
             * t ** (alpha - 1.0) * (1.0 - t) * s * (1.0 - s) ** (alpha - 1.0))
    assert np.all(g >= lower - 1e-12)
    # upper envelope: at s = 1 it is +inf for alpha < 2 and holds trivially
    s_in = s[:, :-1]
    upper = (t ** (alpha - 1.0) * (1.0 - t) * (1.0 - s_in) ** (alpha - 2.0)
             / gamma(alpha))
    assert np.all(g[:, :-1] <= upper + 1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_kernel_weighted_bound(alpha):
    t, s = _property_grid()
    g = green_eval(t, s, alpha)
    weighted = t ** (2.0 - alpha) * g
    lower = ((alpha - 1.0) / gamma(alpha)
             * t * (1.0 - t) * s * (1.0 - s) ** (alpha - 1.0))
    upper = s * (1.0 - s) ** (alpha - 1.0) / gamma(alpha)
    assert np.all(weighted >= lower - 1e-12)
    assert np.all(weighted <= upper + 1e-12)


def test_kernel_continuity_in_alpha():
    t, s = _property_grid(21, 21)
    base = green_eval(t, s, 1.6)
    gaps = [np.max(np.abs(green_eval(t, s, 1.6 + d) - base))
            for d in (0.1, 0.01, 0.001)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


def test_order_validation():
    from fracbvp.errors import HypothesisError
    with pytest.raises(HypothesisError):
        green_eval(0.5, 0.5, 1.0)
    with pytest.raises(HypothesisError):
        green_eval(0.5, 0.5, 2.5)
    with pytest.raises(ValueError):
        green_eval(1.5, 0.5, 1.5)
