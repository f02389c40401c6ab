"""Monte Carlo trials of the measure-and-zero protocol.

Trial ``i`` draws its randomness from Philox block ``i`` under key
``seed``: four 64-bit words, of which the first two become the prior
momentum and the pointer noise through the inverse normal CDF.  A trial
is therefore a pure function of ``(seed, i)``.  Trials are processed in
fixed-size chunks whose partial sums are reduced in chunk order, so the
summary is bitwise identical for any number of workers.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import norm

from .errors import ConfigurationMismatchError, IdealLimitError, StatisticalPowerError
from .gaussian import MeasurementModel, SystemContext, ThermoLedger, outcome_distribution, sharpness

MIN_TRIALS = 1000
CHUNK = 1 << 16
N_BINS = 32
Z_LIMIT = 5.0


@dataclass(frozen=True)
class TrialRecord:
    prior_sample: float
    outcome: float
    shift_applied: float
    work: float
    post_momentum: float


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


@dataclass(frozen=True)
class ConditionalBin:
    index: int
    x_low: float
    x_high: float
    count: int
    mean_x: float
    mean_p: float
    var_p: float


@dataclass(frozen=True)
class RunSummary:
    """Aggregated statistics of one Monte Carlo run.

    ``mean_work`` averages the control cost (x/mu)^2 / 2m charged per
    trial; ``mean_shift_cost`` averages the kinetic energy of the applied
    shift itself, shift^2 / 2m, and is reported for comparison.
    """

    n_trials: int
    seed: int
    mass: float
    temperature: float
    coupling: float
    apparatus_variance: float
    mean_work: Estimate
    mean_energy_change: Estimate
    mean_shift_cost: Estimate
    empirical_efficiency: float
    conditional_slope: Estimate
    prior_variance: Estimate
    explained_variance: float
    residual_variance: float
    binned_conditional_moments: tuple[ConditionalBin, ...] = field(repr=False)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunSummary":
        raw = json.loads(text)
        for key in ("mean_work", "mean_energy_change", "mean_shift_cost", "conditional_slope", "prior_variance"):
            raw[key] = Estimate(**raw[key])
        raw["binned_conditional_moments"] = tuple(ConditionalBin(**b) for b in raw["binned_conditional_moments"])
        return cls(**raw)


def _uniforms(words: np.ndarray) -> np.ndarray:
    # top 53 bits -> open interval (0, 1)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def trial_normals(seed: int, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Standard normals (z_p, z_x) for trials ``start .. start + count - 1``."""
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(start)
    words = bitgen.random_raw(4 * count).reshape(count, 4)
    return ndtri(_uniforms(words[:, 0])), ndtri(_uniforms(words[:, 1]))


def _simulate(ctx: SystemContext, model: MeasurementModel, seed: int, start: int, count: int) -> dict[str, np.ndarray]:
    delta = ctx.thermal_variance
    mu, sigma = model.coupling, model.apparatus_variance
    c = 1.0 + mu**2 * delta / sigma
    z_p, z_x = trial_normals(seed, start, count)
    p = math.sqrt(delta) * z_p
    x = mu * p + math.sqrt(sigma) * z_x
    estimate = x / mu
    shift = -estimate * (c - 1.0) / c
    post = p + shift
    m2 = 2.0 * ctx.mass
    return {
        "p": p,
        "x": x,
        "shift": shift,
        "post": post,
        "work": estimate**2 / m2,
        "denergy": (post**2 - p**2) / m2,
        "shift_cost": shift**2 / m2,
    }


def iter_trials(ctx: SystemContext, model: MeasurementModel, n: int, seed: int):
    """Yield :class:`TrialRecord` objects one by one (for raw CSV streaming)."""
    for start in range(0, n, CHUNK):
        s = _simulate(ctx, model, seed, start, min(CHUNK, n - start))
        for i in range(len(s["p"])):
            yield TrialRecord(
                float(s["p"][i]), float(s["x"][i]), float(s["shift"][i]), float(s["work"][i]), float(s["post"][i])
            )


def write_trials_csv(path, ctx: SystemContext, model: MeasurementModel, n: int, seed: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["prior_sample", "outcome", "shift_applied", "work", "post_momentum"])
        for r in iter_trials(ctx, model, n, seed):
            w.writerow([f"{v:.17g}" for v in (r.prior_sample, r.outcome, r.shift_applied, r.work, r.post_momentum)])


def _chunk_stats(ctx, model, seed, start, count, edges):
    s = _simulate(ctx, model, seed, start, count)
    x, p = s["x"], s["p"]
    bins = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
    stats = {
        "n": count,
        "work": s["work"].sum(),
        "work2": (s["work"] ** 2).sum(),
        "de": s["denergy"].sum(),
        "de2": (s["denergy"] ** 2).sum(),
        "sc": s["shift_cost"].sum(),
        "sc2": (s["shift_cost"] ** 2).sum(),
        "p": p.sum(),
        "p2": (p**2).sum(),
        "bin_n": np.bincount(bins, minlength=N_BINS).astype(float),
        "bin_x": np.bincount(bins, weights=x, minlength=N_BINS),
        "bin_p": np.bincount(bins, weights=p, minlength=N_BINS),
        "bin_p2": np.bincount(bins, weights=p * p, minlength=N_BINS),
    }
    return stats


def _mean_se(total: float, total2: float, n: int) -> Estimate:
    mean = total / n
    var = max(total2 / n - mean**2, 0.0) * n / (n - 1)
    return Estimate(mean, math.sqrt(var / n))


def run_trials(ctx: SystemContext, model: MeasurementModel, n: int, seed: int, workers: int = 1) -> RunSummary:
    """Simulate ``n`` independent measure-and-zero trials from the thermal state.

    Outcomes are binned into 32 equal-probability bins of the analytic
    outcome distribution; the conditional-mean slope is a weighted
    least-squares fit of the bin means of p against the bin means of x.
    """
    if n < MIN_TRIALS:
        raise StatisticalPowerError(f"need at least {MIN_TRIALS} trials, got {n}")
    if model.ideal:
        raise IdealLimitError("Monte Carlo needs a finite-noise apparatus")
    outcome = outcome_distribution(ctx.thermal_prior(), model)
    inner = outcome.mean + outcome.std * norm.ppf(np.arange(1, N_BINS) / N_BINS)
    edges = np.concatenate([[-np.inf], inner, [np.inf]])

    starts = list(range(0, n, CHUNK))
    job = lambda st: _chunk_stats(ctx, model, seed, st, min(CHUNK, n - st), edges)  # noqa: E731
    if workers <= 1:
        parts = [job(st) for st in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, starts))

    tot = {k: 0.0 for k in ("work", "work2", "de", "de2", "sc", "sc2", "p", "p2")}
    bin_tot = {k: np.zeros(N_BINS) for k in ("bin_n", "bin_x", "bin_p", "bin_p2")}
    for part in parts:  # fixed chunk order
        for k in tot:
            tot[k] += float(part[k])
        for k in bin_tot:
            bin_tot[k] += part[k]

    work = _mean_se(tot["work"], tot["work2"], n)
    de = _mean_se(tot["de"], tot["de2"], n)
    sc = _mean_se(tot["sc"], tot["sc2"], n)
    p_mean = tot["p"] / n
    p_var = tot["p2"] / n - p_mean**2
    # se of a sample variance of a Gaussian
    prior_var = Estimate(p_var * n / (n - 1), p_var * math.sqrt(2.0 / (n - 1)))

    cnt = bin_tot["bin_n"]
    bins = []
    mx = np.divide(bin_tot["bin_x"], cnt, out=np.zeros(N_BINS), where=cnt > 0)
    mp = np.divide(bin_tot["bin_p"], cnt, out=np.zeros(N_BINS), where=cnt > 0)
    vp = np.divide(bin_tot["bin_p2"], cnt, out=np.zeros(N_BINS), where=cnt > 0) - mp**2
    vp = np.maximum(vp, 0.0)
    for i in range(N_BINS):
        bins.append(
            ConditionalBin(i, float(edges[i]), float(edges[i + 1]), int(cnt[i]), float(mx[i]), float(mp[i]), float(vp[i]))
        )

    ok = cnt > 1
    wts = cnt[ok] / np.maximum(vp[ok], 1e-300)
    xb, pb = mx[ok], mp[ok]
    xw = np.sum(wts * xb) / np.sum(wts)
    pw = np.sum(wts * pb) / np.sum(wts)
    sxx = np.sum(wts * (xb - xw) ** 2)
    slope = Estimate(float(np.sum(wts * (xb - xw) * (pb - pw)) / sxx), float(math.sqrt(1.0 / sxx)))

    explained = float(np.sum(cnt * (mp - p_mean) ** 2) / n)
    residual = float(np.sum(cnt * vp) / n)

    return RunSummary(
        n_trials=n,
        seed=seed,
        mass=ctx.mass,
        temperature=ctx.temperature,
        coupling=model.coupling,
        apparatus_variance=model.apparatus_variance,
        mean_work=work,
        mean_energy_change=de,
        mean_shift_cost=sc,
        empirical_efficiency=abs(de.value) / work.value,
        conditional_slope=slope,
        prior_variance=prior_var,
        explained_variance=explained,
        residual_variance=residual,
        binned_conditional_moments=tuple(bins),
    )


@dataclass(frozen=True)
class ZScore:
    quantity: str
    empirical: float
    stderr: float
    analytic: float
    z: float

    @property
    def flagged(self) -> bool:
        return not abs(self.z) < Z_LIMIT


def _z(name: str, est: Estimate, analytic: float) -> ZScore:
    diff = est.value - analytic
    if est.stderr > 0:
        z = diff / est.stderr
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return ZScore(name, est.value, est.stderr, analytic, z)


def compare(summary: RunSummary, ledger: ThermoLedger) -> list[ZScore]:
    """z-scores of the Monte Carlo estimates against an analytic ledger.

    The slope expectation uses the ledger's sharpness, so a ledger built
    for the wrong C is flagged rather than rejected.
    """
    if ledger.noisy:
        raise ConfigurationMismatchError("the Monte Carlo protocol is conservative; the ledger is for a noisy control")
    if not math.isfinite(ledger.sharpness):
        raise ConfigurationMismatchError("the Monte Carlo run has a finite-noise apparatus; the ledger is ideal")
    c = ledger.sharpness
    thermal = summary.mass * summary.temperature
    return [
        _z("mean_work", summary.mean_work, ledger.avg_work),
        _z("mean_energy_change", summary.mean_energy_change, ledger.avg_energy_change),
        _z("conditional_slope", summary.conditional_slope, (c - 1.0) / (c * summary.coupling)),
        _z("prior_variance", summary.prior_variance, thermal),
    ]


def total_variance_z(summary: RunSummary) -> float:
    """z-score of explained + residual variance against the thermal variance."""
    thermal = summary.mass * summary.temperature
    return (summary.explained_variance + summary.residual_variance - thermal) / summary.prior_variance.stderr


def summary_sharpness(summary: RunSummary) -> float:
    ctx = SystemContext(summary.mass, summary.temperature)
    return sharpness(ctx.thermal_prior(), MeasurementModel(summary.apparatus_variance, summary.coupling))
