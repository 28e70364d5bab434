import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyrisk import (
    AlphaStableSubordinator,
    BrownianWithDrift,
    CompoundPoissonExp,
    FactorCombination,
    GammaSubordinator,
    combine,
    combine_deriv,
    factor_from_dict,
    laplace_exponent,
    laplace_exponent_deriv,
)
from levyrisk.errors import DomainError

ALL_KINDS = [
    BrownianWithDrift(mu=0.3, sigma=1.2),
    GammaSubordinator(a=2.0, b=3.0, mu=0.1),
    AlphaStableSubordinator(alpha=0.6, mu=0.2),
    CompoundPoissonExp(lam=1.5, eta=2.0, mu=0.05),
]


def test_phi_at_zero_is_zero():
    for factor in ALL_KINDS:
        assert laplace_exponent(factor, 0.0) == 0.0


def test_brownian_exponent_matches_transform():
    # E[e^{-sY_t}] = e^{-mu t s + sigma^2 s^2 t / 2}  =>  phi = mu s - sigma^2 s^2/2
    mu, sigma = 0.7, 1.3
    f = BrownianWithDrift(mu=mu, sigma=sigma)
    for s in (0.1, 1.0, 2.5):
        assert laplace_exponent(f, s) == pytest.approx(mu * s - 0.5 * sigma**2 * s**2)


def test_gamma_exponent_value():
    # -ln E[e^{-3 W_1}] for gamma(a=2, b=3) is 2*ln(2); cross-checked by MC.
    f = GammaSubordinator(a=2.0, b=3.0, mu=0.0)
    assert laplace_exponent(f, 3.0) == pytest.approx(2.0 * math.log(2.0), rel=1e-12)


def test_gamma_exponent_matches_monte_carlo():
    f = GammaSubordinator(a=2.0, b=3.0, mu=0.0)
    rng = np.random.default_rng(1234)
    x = rng.gamma(2.0, 1.0 / 3.0, 10**6)
    estimate = -math.log(np.mean(np.exp(-3.0 * x)))
    assert estimate == pytest.approx(2.0 * math.log(2.0), abs=2e-3)


def test_stable_and_poisson_exponent_forms():
    st_f = AlphaStableSubordinator(alpha=0.5, mu=0.4)
    assert laplace_exponent(st_f, 4.0) == pytest.approx(0.4 * 4.0 + 2.0)
    cp = CompoundPoissonExp(lam=2.0, eta=3.0, mu=0.1)
    assert laplace_exponent(cp, 1.0) == pytest.approx(0.1 + 2.0 / 4.0)


def test_negative_s_rejected():
    for factor in ALL_KINDS:
        with pytest.raises(DomainError):
            laplace_exponent(factor, -0.1)
        with pytest.raises(DomainError):
            laplace_exponent_deriv(factor, -1.0)


def test_deriv_examples():
    assert laplace_exponent_deriv(BrownianWithDrift(mu=1.0, sigma=2.0), 0.0) == 1.0
    g = GammaSubordinator(a=2.0, b=3.0, mu=0.0)
    assert laplace_exponent_deriv(g, 3.0) == pytest.approx(2.0 / 6.0)


@pytest.mark.parametrize("factor", ALL_KINDS, ids=lambda f: f.kind)
def test_deriv_matches_finite_differences(factor):
    for s in np.geomspace(1e-3, 1e3, 25):
        h = 1e-6 * s
        fd = (factor.phi(s + h) - factor.phi(s - h)) / (2 * h)
        assert laplace_exponent_deriv(factor, s) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("factor", ALL_KINDS, ids=lambda f: f.kind)
def test_second_deriv_matches_finite_differences(factor):
    for s in np.geomspace(1e-2, 1e2, 15):
        h = 1e-4 * s
        fd = (factor.dphi(s + h) - factor.dphi(s - h)) / (2 * h)
        assert laplace_exponent_deriv(factor, s, order=2) == pytest.approx(
            fd, rel=1e-5, abs=1e-12
        )


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(ALL_KINDS),
    st.floats(min_value=1e-3, max_value=50.0),
    st.floats(min_value=1e-3, max_value=50.0),
    st.floats(min_value=1e-3, max_value=50.0),
)
def test_negative_phi_is_convex(factor, s1, s2, s3):
    # ln E[e^{-s W_1}] = -phi(s) must be convex: chord inequality.
    a, b, c = sorted((s1, s2, s3))
    if a == b or b == c:
        return
    lam = (c - b) / (c - a)
    chord = lam * (-factor.phi(a)) + (1 - lam) * (-factor.phi(c))
    assert -factor.phi(b) <= chord + 1e-12


@pytest.mark.parametrize("factor", ALL_KINDS, ids=lambda f: f.kind)
def test_phi_gap_matches_naive_difference(factor):
    for s in np.geomspace(1e-3, 1e3, 25):
        naive = factor.phi(s) - s * factor.dphi(s)
        assert factor.phi_gap(s) == pytest.approx(naive, rel=1e-9, abs=1e-12)


def test_phi_gap_immune_to_drift_cancellation():
    # At s = 1e50 the naive difference phi - s*phi' is pure rounding noise of
    # the mu*s terms; the gap form must still carry the curved part.
    g = GammaSubordinator(a=2.0, b=1.0, mu=0.3)
    s = 1e50
    expected = 2.0 * (math.log1p(s) - s / (1.0 + s))
    assert g.phi_gap(s) == pytest.approx(expected, rel=1e-12)
    combo = FactorCombination([g, CompoundPoissonExp(lam=1.0, eta=2.0, mu=5.0)],
                              [1.0, 1.0])
    assert combo.phi_gap(s) == pytest.approx(expected + 1.0, rel=1e-12)


def test_combine_identity_and_zero():
    f = GammaSubordinator(a=1.0, b=2.0, mu=0.3)
    single = FactorCombination([f], [1.0])
    for s in (0.0, 0.5, 4.0):
        assert combine(single, s) == laplace_exponent(f, s)
    zero = FactorCombination(ALL_KINDS, [0.0] * len(ALL_KINDS))
    for s in (0.0, 1.0, 10.0):
        assert combine(zero, s) == 0.0


def test_combine_two_brownians_adds_variances():
    s1, s2 = 0.8, 1.7
    combo = FactorCombination(
        [BrownianWithDrift(0.0, s1), BrownianWithDrift(0.0, s2)], [1.0, 1.0]
    )
    merged = BrownianWithDrift(0.0, math.hypot(s1, s2))
    for s in (0.1, 1.0, 3.0):
        assert combine(combo, s) == pytest.approx(merged.phi(s), rel=1e-14)


def test_combine_deriv_and_scaling():
    combo = FactorCombination(ALL_KINDS, [0.5, 1.0, 0.25, 2.0])
    for s in (0.3, 2.0):
        fd = (combo.phi(s + 1e-7) - combo.phi(s - 1e-7)) / 2e-7
        assert combine_deriv(combo, s) == pytest.approx(fd, rel=1e-6)
    lam = 3.0
    scaled = combo.scaled(lam)
    for s in (0.2, 1.1):
        assert scaled.phi(s) == pytest.approx(combo.phi(lam * s), rel=1e-15)


def test_combination_length_mismatch():
    with pytest.raises(ValueError, match="weights"):
        FactorCombination(ALL_KINDS, [1.0, 2.0])


def test_parameter_validation():
    with pytest.raises(ValueError):
        BrownianWithDrift(mu=0.0, sigma=0.0)
    with pytest.raises(ValueError):
        GammaSubordinator(a=-1.0, b=1.0)
    with pytest.raises(ValueError):
        AlphaStableSubordinator(alpha=1.0)
    with pytest.raises(ValueError):
        CompoundPoissonExp(lam=1.0, eta=0.0)


def test_factor_from_dict_round_trip():
    for factor in ALL_KINDS:
        spec = {"kind": factor.kind}
        spec.update(factor.params())
        assert factor_from_dict(spec) == factor
    with pytest.raises(ValueError, match="kind"):
        factor_from_dict({"mu": 0.0})
    with pytest.raises(ValueError, match="unknown"):
        factor_from_dict({"kind": "cauchy"})
