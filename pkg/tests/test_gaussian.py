import doctest
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interventions import gaussian
from interventions.errors import DegenerateMeasurementError, IdealLimitError, InvalidParameterError
from interventions.gaussian import (
    GaussianMoment,
    MeasurementModel,
    SystemContext,
    conditional_state,
    equivalent_pair,
    final_state,
    intervention_ledger,
    mutual_information,
    noisy_shift_energy,
    outcome_distribution,
    sharpness,
)

positive = st.floats(0.05, 20.0)
sharp = st.floats(1.01, 1e4)


def mi_by_quadrature(prior: GaussianMoment, model: MeasurementModel, n=1601, width=12.0) -> float:
    """I = int P(p) M(x|p) ln[M(x|p) / P(x)] dp dx on a tensor trapezoid grid."""
    out = outcome_distribution(prior, model)
    p = np.linspace(prior.mean - width * prior.std, prior.mean + width * prior.std, n)
    x = np.linspace(out.mean - width * out.std, out.mean + width * out.std, n)
    pp, xx = np.meshgrid(p, x, indexing="ij")
    m = model.kernel(xx, pp)
    joint = prior.pdf(pp) * m
    log_ratio = np.log(np.maximum(m, 1e-300)) - np.log(np.maximum(out.pdf(xx), 1e-300))
    return float(np.trapezoid(np.trapezoid(joint * log_ratio, x, axis=1), p))


def test_doctests():
    assert doctest.testmod(gaussian).failed == 0


def test_sharpness_and_conditional_state_c2():
    prior = GaussianMoment(0.0, 1.0)
    model = MeasurementModel(1.0)
    assert sharpness(prior, model) == 2.0
    post = conditional_state(prior, model, 1.0)
    assert post.mean == pytest.approx(0.5, abs=1e-15)
    assert post.variance == pytest.approx(0.5, abs=1e-15)


def test_outcome_distribution():
    out = outcome_distribution(GaussianMoment(1.0, 2.0), MeasurementModel(0.5, coupling=3.0))
    assert (out.mean, out.variance) == (3.0, 18.5)


def test_ledger_c2_closed_forms():
    led = intervention_ledger(SystemContext(), MeasurementModel(1.0))
    assert led.avg_work == pytest.approx(1.0, abs=1e-15)
    assert led.avg_energy_change == pytest.approx(-0.25, abs=1e-15)
    assert led.efficiency == pytest.approx(0.25, abs=1e-15)
    assert led.mutual_information == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert led.entropy_change == pytest.approx(-0.5 * math.log(2), abs=1e-15)
    assert led.extractable_work_bound == pytest.approx(0.25, abs=1e-15)
    assert all(led.checks().values())


@pytest.mark.parametrize("c", [1.5, 2.0, 5.0, 100.0, 1e6])
def test_efficiency_formula(c):
    ctx = SystemContext(2.0, 0.7)
    led = intervention_ledger(ctx, MeasurementModel.from_sharpness(c, ctx.thermal_variance, 1.3))
    assert abs(led.efficiency - ((c - 1) / c) ** 2) <= 1e-12


@pytest.mark.parametrize("c", [1.5, 2.0, 5.0, 100.0])
def test_mutual_information_quadrature_oracle(c):
    prior = GaussianMoment(0.3, 1.7)
    model = MeasurementModel.from_sharpness(c, prior.variance, coupling=0.8)
    assert abs(mi_by_quadrature(prior, model) - mutual_information(c)) <= 1e-6


def test_perfect_measurement_limit():
    ctx = SystemContext(1.0, 1.0)
    led = intervention_ledger(ctx, MeasurementModel.perfect())
    assert led.efficiency == 1.0
    assert led.avg_work == 0.5
    assert math.isinf(led.mutual_information)
    assert led.entropy_change == -math.inf
    with pytest.raises(IdealLimitError):
        sharpness(ctx.thermal_prior(), MeasurementModel.perfect())
    with pytest.raises(IdealLimitError):
        final_state(ctx, MeasurementModel.perfect())


def test_zero_noise_requires_explicit_ideal():
    with pytest.raises(IdealLimitError):
        MeasurementModel(0.0)
    with pytest.raises(InvalidParameterError):
        MeasurementModel(1.0, ideal=True)
    with pytest.raises(InvalidParameterError):
        MeasurementModel(-1.0)


def test_degenerate_measurement_rejected():
    with pytest.raises(DegenerateMeasurementError):
        MeasurementModel.from_sharpness(1.0, 1.0)
    # sharpness indistinguishable from 1 in floating point
    with pytest.raises(DegenerateMeasurementError):
        intervention_ledger(SystemContext(), MeasurementModel(1e300))


def test_invalid_moments():
    with pytest.raises(InvalidParameterError):
        GaussianMoment(0.0, 0.0)
    with pytest.raises(InvalidParameterError):
        GaussianMoment(math.nan, 1.0)
    with pytest.raises(InvalidParameterError):
        SystemContext(mass=0.0)


def test_noisy_shift_energy():
    assert noisy_shift_energy(2.0, 1.0, mass=0.5) == 5.0
    with pytest.raises(InvalidParameterError):
        noisy_shift_energy(1.0, -0.1)


def test_equivalent_pair_reference_configuration():
    pair = equivalent_pair(SystemContext(1.0, 2.0), target_variance=1.0, noise=0.5)
    assert pair.sigma_conservative == pytest.approx(2.0, abs=1e-14)
    assert pair.sigma_noisy == pytest.approx(2.0 / 3.0, abs=1e-14)
    f1 = final_state(SystemContext(1.0, 2.0), MeasurementModel(pair.sigma_conservative))
    f2 = final_state(SystemContext(1.0, 2.0), MeasurementModel(pair.sigma_noisy), 0.5)
    assert abs(f1.variance - f2.variance) <= 1e-12 and f1.mean == f2.mean
    assert pair.ledger_noisy.noisy and not pair.ledger_conservative.noisy


def test_equivalent_pair_rejects_bad_inputs():
    ctx = SystemContext(1.0, 2.0)
    with pytest.raises(InvalidParameterError):
        equivalent_pair(ctx, 1.0, 1.5)
    with pytest.raises(InvalidParameterError):
        equivalent_pair(ctx, 3.0, 0.5)


@settings(max_examples=200, deadline=None)
@given(delta=positive, mu=st.floats(0.1, 10.0), sigma=positive, x=st.floats(-10, 10))
def test_posterior_contracts(delta, mu, sigma, x):
    prior = GaussianMoment(0.0, delta)
    model = MeasurementModel(sigma, mu)
    assert conditional_state(prior, model, x).variance < delta


@settings(max_examples=200, deadline=None)
@given(delta=positive, mu=st.floats(0.1, 10.0), c=sharp)
def test_law_of_total_variance(delta, mu, c):
    prior = GaussianMoment(0.0, delta)
    model = MeasurementModel.from_sharpness(c, delta, mu)
    gain = (c - 1) / (c * mu)
    explained = gain**2 * outcome_distribution(prior, model).variance
    assert explained + delta / c == pytest.approx(delta, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(m=positive, t=positive, c=sharp)
def test_ledger_invariants(m, t, c):
    ctx = SystemContext(m, t)
    led = intervention_ledger(ctx, MeasurementModel.from_sharpness(c, ctx.thermal_variance))
    assert all(led.checks().values())
    assert abs(abs(led.avg_energy_change) / led.avg_work - ((c - 1) / c) ** 2) <= 1e-12
    assert led.extractable_work_bound < led.avg_work


@settings(max_examples=100, deadline=None)
@given(c1=sharp, c2=sharp)
def test_efficiency_monotone(c1, c2):
    ctx = SystemContext()
    lo, hi = sorted((c1, c2))
    if hi - lo < 1e-6 * hi:
        return
    e_lo = intervention_ledger(ctx, MeasurementModel.from_sharpness(lo, 1.0)).efficiency
    e_hi = intervention_ledger(ctx, MeasurementModel.from_sharpness(hi, 1.0)).efficiency
    assert e_hi > e_lo


@settings(max_examples=100, deadline=None)
@given(target=st.floats(0.1, 0.9), frac=st.floats(0.05, 0.95), thermal=st.floats(1.0, 10.0))
def test_equivalent_pair_final_states_agree(target, frac, thermal):
    ctx = SystemContext(1.0, thermal)
    target *= thermal
    noise = frac * target
    pair = equivalent_pair(ctx, target, noise)
    f1 = final_state(ctx, MeasurementModel(pair.sigma_conservative))
    f2 = final_state(ctx, MeasurementModel(pair.sigma_noisy), noise)
    assert abs(f1.variance - f2.variance) <= 1e-12 * max(1.0, thermal)
