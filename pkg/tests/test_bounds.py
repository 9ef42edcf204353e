import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from holderipm.bounds import (
    BoundParams,
    ExtensionSpec,
    NegativeBoundWarning,
    dudley_plain,
    dudley_refined_eval,
    entropy_upper_bound,
    extension_rate,
    finite_sample_bound,
    improved_dudley_closed_form,
    rate_exponent,
)


def tau_grid_minimum(a, beta, points=10**6):
    """min over tau = k / points of tau + a * int_tau^1 eps^-beta (closed-form integral)."""
    tau = np.arange(1, points + 1) / points
    if beta == 1.0:
        integral = -np.log(tau)
    else:
        integral = (1.0 - tau ** (1.0 - beta)) / (1.0 - beta)
    vals = tau + a * integral
    if beta < 1:
        vals = np.append(vals, a / (1.0 - beta))  # tau = 0
    return float(vals.min())


def test_entropy_bound_examples():
    assert entropy_upper_bound(0.5, BoundParams(1, 1, K=1, lam=1)) == pytest.approx(2.0)
    assert entropy_upper_bound(1.0, BoundParams(0.7, 3, K=2.5, lam=4.0)) == pytest.approx(10.0)
    assert entropy_upper_bound(0.25, BoundParams(2, 2, lam=1)) == pytest.approx(
        entropy_upper_bound(0.25, BoundParams(1, 1, lam=1)))


def test_default_lambda():
    assert BoundParams(1, 3).lam == 27.0


def test_params_validation():
    with pytest.raises(ValueError):
        BoundParams(0.0, 1)
    with pytest.raises(ValueError):
        BoundParams(1.0, 1, K=-1)
    with pytest.raises(ValueError):
        ExtensionSpec(1.0, 0.0)


def test_dudley_plain_closed_form_and_quadrature():
    params = BoundParams(1, 1, K=2.0, lam=1.5)
    expected = 2 * 3.0 * 0.7 * math.sqrt(3.0) * math.sqrt(2.0)
    assert dudley_plain(params, subgauss_K=0.7, C=3.0) == pytest.approx(expected)
    for L in (0.5, 2.0):
        p = BoundParams(0.8, 1, L=L, K=1.0, lam=2.0)
        numeric, _ = quad(lambda e: math.sqrt(entropy_upper_bound(e, p)), 0, 2 * L)
        assert dudley_plain(p) == pytest.approx(numeric, rel=1e-6)


def test_dudley_plain_divergence():
    assert math.isinf(dudley_plain(BoundParams(1, 2)))
    assert math.isinf(dudley_plain(BoundParams(2, 4)))
    assert math.isfinite(dudley_plain(BoundParams(1, 1)))


def test_lemma_examples():
    assert improved_dudley_closed_form(2.0, 0.5).f_star == 1.0
    opt = improved_dudley_closed_form(0.25, 2.0)
    assert opt.f_star == pytest.approx(0.75)
    assert opt.tau_star == pytest.approx(0.5)
    assert improved_dudley_closed_form(math.exp(-1), 1.0).f_star == pytest.approx(2 / math.e)


@pytest.mark.parametrize("a,beta", [(0.25, 2.0), (math.exp(-1), 1.0), (0.05, 0.5), (0.6, 3.0), (2.0, 0.5)])
def test_lemma_matches_grid_oracle(a, beta):
    assert improved_dudley_closed_form(a, beta).f_star == pytest.approx(tau_grid_minimum(a, beta), abs=1e-5)


def test_lemma_continuous_at_beta_one():
    at_one = improved_dudley_closed_form(0.3, 1.0).f_star
    for delta in (1e-6, 1e-9, 1e-12):
        assert improved_dudley_closed_form(0.3, 1 + delta).f_star == pytest.approx(at_one, abs=1e-5)
        assert improved_dudley_closed_form(0.3, 1 - delta).f_star == pytest.approx(at_one, abs=1e-5)


def test_refined_examples():
    assert dudley_refined_eval(1.0, 0.7) == 4.0
    assert dudley_refined_eval(5.0, 2.0) == 4.0
    assert dudley_refined_eval(0.25, 2.0) == pytest.approx(3.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-4, 2.0), st.floats(1e-4, 2.0), st.floats(0.1, 4.0))
def test_refined_monotone_in_a(a, b, beta):
    lo, hi = sorted((a, b))
    assert dudley_refined_eval(lo, beta) <= dudley_refined_eval(hi, beta) + 1e-12


def test_display_formula_example():
    got = finite_sample_bound(100, BoundParams(1, 4, K=1, lam=1), "paper-display")
    assert got.value == pytest.approx(12 * 100 ** (-0.25) * min(2, 1 + 0.5 * math.log(100 / 9)))
    assert got.value == pytest.approx(7.59, abs=5e-3)
    assert got.branch == "alpha<d/2"


@pytest.mark.parametrize("alpha,d", [(0.5, 1), (1, 2), (1.5, 3)])
def test_branch_equality_at_boundary(alpha, d):
    params = BoundParams(alpha, d, lam=1)
    n = 1000.0
    kl = params.K * params.lam
    first = 12 * (kl / n) ** (alpha / d) * (1 + 0.5 * math.log(n / (9 * kl)))
    second = 12 * (kl / n) ** 0.5 * (1 + (alpha / d) * math.log(n / (9 * kl)))
    assert first == second
    assert finite_sample_bound(n, params, "paper-display").value == first


def test_display_negative_warns():
    with pytest.warns(NegativeBoundWarning):
        out = finite_sample_bound(1, BoundParams(1, 1), "paper-display")
    assert out.value < 0


def test_composed_small_n_uses_a_ge_one():
    out = finite_sample_bound(3, BoundParams(1, 1))
    assert out.value == 8.0
    assert out.branch == "a>=1"


def test_display_slope_slow_regime():
    params = BoundParams(1, 4, lam=1)
    scaled = [finite_sample_bound(n, params, "paper-display").value * n**0.25 for n in (1e8, 1e9, 1e10)]
    assert max(scaled) == pytest.approx(min(scaled))


@pytest.mark.parametrize("alpha,d", [(0.5, 1), (1, 1), (1, 3), (0.5, 2), (2, 1)])
def test_composed_nonincreasing_and_close_to_display(alpha, d):
    params = BoundParams(alpha, d)
    ns = np.unique(np.geomspace(10, 10**6, 60).astype(int))
    vals = [finite_sample_bound(int(n), params).value for n in ns]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for n in ns[ns > 100 * params.K * params.lam]:
            comp = finite_sample_bound(int(n), params).value
            disp = finite_sample_bound(int(n), params, "paper-display").value
            assert 1 / 6 <= comp / disp <= 6


def test_rate_exponent_examples():
    assert rate_exponent(1, 4) == (0.25, False)
    assert rate_exponent(1, 2) == (0.5, True)
    assert rate_exponent(3, 2) == (0.5, False)


def test_extension_rate_examples():
    assert extension_rate(ExtensionSpec(1.0, 4)) == (0.25, False)
    assert extension_rate(ExtensionSpec(1.0, 2)) == (0.5, True)
    assert extension_rate(ExtensionSpec(1.0, 1)) == (0.5, False)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("d", [1, 2, 3, 4, 6])
def test_extension_specialises(alpha, d):
    assert rate_exponent(alpha, d) == extension_rate(ExtensionSpec(1.0, d / alpha))
