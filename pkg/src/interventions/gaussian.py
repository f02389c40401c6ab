"""Closed-form Gaussian measurement, control and thermodynamic ledger.

A free particle's momentum is measured by an apparatus whose pointer is
shifted by ``coupling * p`` and carries Gaussian noise of variance
``apparatus_variance``.  The outcome-conditioned control then shifts the
momentum, optionally adding Gaussian noise.  Every quantity here is a
closed form in the sharpness

    C = 1 + coupling**2 * prior_variance / apparatus_variance.

Conventions: k_B = 1, entropies in nats, thermal momentum variance
``mass * temperature``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMeasurementError, IdealLimitError, InvalidParameterError


@dataclass(frozen=True)
class GaussianMoment:
    """Mean and variance of a one-dimensional Gaussian momentum distribution."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise InvalidParameterError(f"variance must be finite and > 0, got {self.variance!r}")
        if not math.isfinite(self.mean):
            raise InvalidParameterError(f"mean must be finite, got {self.mean!r}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, p):
        return np.exp(-((p - self.mean) ** 2) / (2 * self.variance)) / np.sqrt(2 * np.pi * self.variance)


@dataclass(frozen=True)
class MeasurementModel:
    """Gaussian pointer measurement with kernel M(x|p) = N(x; coupling * p, apparatus_variance).

    ``apparatus_variance == 0`` is only accepted together with ``ideal=True``;
    the perfect measurement is an explicit, opt-in limit.
    """

    apparatus_variance: float
    coupling: float = 1.0
    ideal: bool = False

    def __post_init__(self):
        if self.coupling == 0 or not math.isfinite(self.coupling):
            raise InvalidParameterError("coupling must be finite and non-zero")
        if self.apparatus_variance < 0 or math.isnan(self.apparatus_variance):
            raise InvalidParameterError(f"apparatus_variance must be >= 0, got {self.apparatus_variance!r}")
        if self.ideal and self.apparatus_variance != 0:
            raise InvalidParameterError("ideal=True requires apparatus_variance == 0")
        if self.apparatus_variance == 0 and not self.ideal:
            raise IdealLimitError("apparatus_variance == 0 is the ideal limit; construct with ideal=True")

    @classmethod
    def perfect(cls, coupling: float = 1.0) -> "MeasurementModel":
        return cls(apparatus_variance=0.0, coupling=coupling, ideal=True)

    @classmethod
    def from_sharpness(cls, sharpness_value: float, prior_variance: float, coupling: float = 1.0) -> "MeasurementModel":
        """Apparatus that achieves a given sharpness C against ``prior_variance``."""
        if math.isinf(sharpness_value):
            return cls.perfect(coupling)
        if not sharpness_value > 1:
            raise DegenerateMeasurementError(f"sharpness must be > 1, got {sharpness_value!r}")
        return cls(coupling**2 * prior_variance / (sharpness_value - 1), coupling)

    def kernel(self, x, p):
        """M(x|p), vectorised over numpy arrays."""
        s = self.apparatus_variance
        return np.exp(-((x - self.coupling * p) ** 2) / (2 * s)) / np.sqrt(2 * np.pi * s)


@dataclass(frozen=True)
class SystemContext:
    """Mass and bath temperature of the particle (k_B = 1)."""

    mass: float = 1.0
    temperature: float = 1.0

    def __post_init__(self):
        if not (self.mass > 0 and self.temperature > 0):
            raise InvalidParameterError("mass and temperature must be > 0")

    @property
    def thermal_variance(self) -> float:
        return self.mass * self.temperature

    def thermal_prior(self) -> GaussianMoment:
        return GaussianMoment(0.0, self.thermal_variance)


@dataclass(frozen=True)
class ThermoLedger:
    """Per-intervention energy, entropy and information bookkeeping.

    ``noisy`` marks a ledger whose control step adds momentum noise; for
    such ledgers the efficiency is an upper-bound estimate and the
    information-entropy duality is not expected to hold.
    """

    avg_work: float
    avg_energy_change: float
    efficiency: float
    entropy_change: float
    mutual_information: float
    free_energy_change: float
    extractable_work_bound: float
    sharpness: float
    noisy: bool = False

    def checks(self, tol: float = 1e-12) -> dict[str, bool]:
        """Named pass/fail flags for the ledger invariants."""
        out = {
            "efficiency_in_unit_interval": -tol <= self.efficiency <= 1 + tol,
            "mutual_information_nonnegative": self.mutual_information >= 0,
            "extractable_work_bound_le_avg_work": self.extractable_work_bound <= self.avg_work * (1 + tol),
        }
        if not self.noisy:
            if math.isinf(self.mutual_information):
                out["entropy_change_equals_minus_information"] = self.entropy_change == -self.mutual_information
            else:
                out["entropy_change_equals_minus_information"] = (
                    abs(self.entropy_change + self.mutual_information) <= tol * max(1.0, self.mutual_information)
                )
        return out

    def as_dict(self) -> dict:
        return {
            "avg_work": self.avg_work,
            "avg_energy_change": self.avg_energy_change,
            "efficiency": self.efficiency,
            "entropy_change": self.entropy_change,
            "mutual_information": self.mutual_information,
            "free_energy_change": self.free_energy_change,
            "extractable_work_bound": self.extractable_work_bound,
            "sharpness": self.sharpness,
            "noisy": self.noisy,
        }


def sharpness(prior: GaussianMoment, model: MeasurementModel) -> float:
    """Measurement sharpness C = 1 + mu^2 * Delta / sigma.

    Raises
    ------
    IdealLimitError
        For the ideal apparatus; use the limit forms instead.
    """
    if model.ideal:
        raise IdealLimitError("sharpness is infinite for the ideal apparatus")
    return 1.0 + model.coupling**2 * prior.variance / model.apparatus_variance


def outcome_distribution(prior: GaussianMoment, model: MeasurementModel) -> GaussianMoment:
    """Distribution of the pointer reading x: N(mu * p0, sigma + mu^2 * Delta)."""
    mu = model.coupling
    return GaussianMoment(mu * prior.mean, model.apparatus_variance + mu**2 * prior.variance)


def conditional_state(prior: GaussianMoment, model: MeasurementModel, x: float) -> GaussianMoment:
    """Posterior momentum distribution given the pointer reading ``x``."""
    if model.ideal:
        raise IdealLimitError("conditional state is a point mass at x / coupling in the ideal limit")
    c = sharpness(prior, model)
    gain = (c - 1.0) / c
    return GaussianMoment(prior.mean + gain * (x / model.coupling - prior.mean), prior.variance / c)


def mutual_information(c: float) -> float:
    """Average system-apparatus mutual information in nats, 0.5 * ln C."""
    if not c >= 1:
        raise InvalidParameterError(f"sharpness must be >= 1, got {c!r}")
    return 0.5 * math.log(c)


def conservative_shift(state: GaussianMoment, shift: float) -> GaussianMoment:
    return GaussianMoment(state.mean + shift, state.variance)


def noisy_shift(state: GaussianMoment, shift: float, added_variance: float) -> GaussianMoment:
    """Shift convolved with a zero-mean Gaussian kick of variance ``added_variance``."""
    if added_variance < 0:
        raise InvalidParameterError("added_variance must be >= 0")
    return GaussianMoment(state.mean + shift, state.variance + added_variance)


def noisy_shift_energy(shift: float, added_variance: float, mass: float = 1.0) -> float:
    """Energy delivered by a noisy shift: shift^2 / 2m + added_variance / 2m."""
    if added_variance < 0:
        raise InvalidParameterError("added_variance must be >= 0")
    return (shift**2 + added_variance) / (2 * mass)


def zeroing_shift(prior: GaussianMoment, model: MeasurementModel, x: float) -> float:
    """Control shift that moves the conditional mean to zero."""
    return -conditional_state(prior, model, x).mean


def final_state(ctx: SystemContext, model: MeasurementModel, added_variance: float = 0.0) -> GaussianMoment:
    """Unconditional momentum distribution after measure, shift-to-zero and optional noise.

    Every conditional state is moved to zero mean, so the mixture over
    outcomes is the conditional variance plus the control noise.
    """
    if added_variance < 0:
        raise InvalidParameterError("added_variance must be >= 0")
    prior = ctx.thermal_prior()
    if model.ideal:
        if added_variance == 0:
            raise IdealLimitError("ideal measurement with conservative control leaves a point mass")
        return GaussianMoment(0.0, added_variance)
    return GaussianMoment(0.0, prior.variance / sharpness(prior, model) + added_variance)


def intervention_ledger(ctx: SystemContext, model: MeasurementModel, added_variance: float = 0.0) -> ThermoLedger:
    """Ledger for measure-then-zero on a thermal particle, with optional control noise.

    Work is charged as the squared momentum estimate x/mu over 2m, which
    averages to (Delta/2m) * C/(C-1); a noisy control additionally pays
    the heating term added_variance/2m.  Energy, entropy and free-energy
    changes are differences between the final and thermal distributions.
    """
    if added_variance < 0:
        raise InvalidParameterError("added_variance must be >= 0")
    m, temp = ctx.mass, ctx.temperature
    delta = ctx.thermal_variance
    heat = added_variance / (2 * m)
    prior = ctx.thermal_prior()

    if model.ideal:
        c = math.inf
        work = delta / (2 * m) + heat
        d_energy = -delta / (2 * m) + heat
        info = math.inf
        if added_variance == 0:
            d_entropy = -math.inf
            d_free = math.inf
            w_ext = delta / (2 * m)
        else:
            d_entropy = 0.5 * math.log(added_variance / delta)
            d_free = d_energy - temp * d_entropy
            w_ext = math.inf
    else:
        c = sharpness(prior, model)
        if c - 1.0 <= 0:
            raise DegenerateMeasurementError("C = 1: the measurement carries no information and work diverges")
        work = delta / (2 * m) * c / (c - 1.0) + heat
        d_energy = -delta / (2 * m) * (c - 1.0) / c + heat
        info = mutual_information(c)
        if added_variance == 0:
            d_entropy = -info
        else:
            d_entropy = -info + 0.5 * math.log1p(added_variance * c / delta)
        d_free = d_energy - temp * d_entropy
        w_ext = -d_free + temp * info

    return ThermoLedger(
        avg_work=work,
        avg_energy_change=d_energy,
        efficiency=abs(d_energy) / work,
        entropy_change=d_entropy,
        mutual_information=info,
        free_energy_change=d_free,
        extractable_work_bound=w_ext,
        sharpness=c,
        noisy=added_variance > 0,
    )


def intervene_to_zero(ctx: SystemContext, model: MeasurementModel) -> ThermoLedger:
    """Ledger for the conservative measure-and-shift-to-zero protocol.

    >>> led = intervene_to_zero(SystemContext(), MeasurementModel(1.0))
    >>> led.avg_work, led.avg_energy_change, led.efficiency
    (1.0, -0.25, 0.25)
    """
    return intervention_ledger(ctx, model, 0.0)


class EquivalentPair(NamedTuple):
    sigma_conservative: float
    sigma_noisy: float
    ledger_conservative: ThermoLedger
    ledger_noisy: ThermoLedger


def equivalent_pair(ctx: SystemContext, target_variance: float, noise: float) -> EquivalentPair:
    """Two protocols that both end in N(0, target_variance) from the thermal state.

    The first measures with sigma_1 = [1/target - 1/(m T)]^-1 and shifts
    conservatively; the second measures more sharply, with
    sigma_2 = [1/(target - noise) - 1/(m T)]^-1, and shifts with added
    noise variance ``noise``.  Unit coupling is used for both.
    """
    thermal = ctx.thermal_variance
    if not 0 < noise < target_variance:
        raise InvalidParameterError("need 0 < noise < target_variance")
    if not target_variance < thermal:
        raise InvalidParameterError(
            f"target_variance {target_variance} >= thermal variance {thermal}: apparatus variance would be negative"
        )
    sigma1 = 1.0 / (1.0 / target_variance - 1.0 / thermal)
    sigma2 = 1.0 / (1.0 / (target_variance - noise) - 1.0 / thermal)
    return EquivalentPair(
        sigma1,
        sigma2,
        intervention_ledger(ctx, MeasurementModel(sigma1)),
        intervention_ledger(ctx, MeasurementModel(sigma2), noise),
    )
