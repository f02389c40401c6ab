"""Markov kernels on uniform momentum grids.

Densities are sampled on a uniform grid and integrated with the
trapezoidal rule.  Kernels are applied by direct quadrature; on a uniform
grid a translation-invariant kernel is a discrete convolution, evaluated
with ``np.convolve`` (no FFT) so every output cell sums in a fixed order.

Collision sign convention: the joint after the two-particle collision is

    P_f(p_a, p_b) = int d eps P_eps(eps - (p_b - p_a)) P_a(p_a + eps) P_b(p_b - eps)

which reduces to the exact swap P_a(p_b) P_b(p_a) when P_eps is a delta.
Equivalently p_a' = p_b + eta and p_b' = p_a - eta with eta ~ P_eps.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    GridTooLargeError,
    IdealLimitError,
    InvalidParameterError,
    LeakageError,
    OutcomeIncompatibleError,
    PreconditionError,
    ResolutionError,
)
from .gaussian import GaussianMoment, MeasurementModel

LEAKAGE_THRESHOLD = 1e-6
LEAKAGE_FRACTION = 0.05
MAX_JOINT_POINTS = 1024
MIN_POINTS = 16


@dataclass(frozen=True)
class Grid1D:
    lower: float
    upper: float
    points: int

    def __post_init__(self):
        if not self.upper > self.lower:
            raise InvalidParameterError("grid upper bound must exceed lower bound")
        if self.points < MIN_POINTS:
            raise InvalidParameterError(f"grid needs at least {MIN_POINTS} points, got {self.points}")

    @classmethod
    def centered(cls, mean: float, std: float, width: float = 8.0, points: int = 4096) -> "Grid1D":
        """Grid spanning ``mean +- width * std``."""
        return cls(mean - width * std, mean + width * std, points)

    @classmethod
    def symmetric(cls, spacing: float, half_width: float) -> "Grid1D":
        """Grid with the given spacing, symmetric about 0 and containing 0 as a node."""
        k = max(int(math.ceil(half_width / spacing)), (MIN_POINTS - 1) // 2 + 1)
        return cls(-k * spacing, k * spacing, 2 * k + 1)

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.points)

    def same_as(self, other: "Grid1D", rtol: float = 1e-12) -> bool:
        scale = max(abs(self.lower), abs(self.upper), 1.0)
        return (
            self.points == other.points
            and abs(self.lower - other.lower) <= rtol * scale
            and abs(self.upper - other.upper) <= rtol * scale
        )


def _trapz(values: np.ndarray, h: float, axis: int = -1):
    return np.trapezoid(values, dx=h, axis=axis)


def _outer_mask(n: int) -> np.ndarray:
    k = max(1, int(math.ceil(LEAKAGE_FRACTION * n)))
    mask = np.zeros(n, dtype=bool)
    mask[:k] = True
    mask[-k:] = True
    return mask


@dataclass(frozen=True, eq=False)
class GridDistribution:
    """Non-negative density sampled on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.points,):
            raise InvalidParameterError(f"values shape {v.shape} does not match grid ({self.grid.points},)")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("density values must be finite")
        if np.any(v < 0):
            raise InvalidParameterError("density values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "GridDistribution":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float)).normalized()

    @classmethod
    def point_mass(cls, grid: Grid1D, at: float = 0.0) -> "GridDistribution":
        """Discrete delta at the node nearest ``at``."""
        idx = int(round((at - grid.lower) / grid.spacing))
        if not 0 < idx < grid.points - 1:
            raise InvalidParameterError("point mass must sit on an interior node")
        v = np.zeros(grid.points)
        v[idx] = 1.0 / grid.spacing
        return cls(grid, v)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def mass(self) -> float:
        return float(_trapz(self.values, self.grid.spacing))

    def normalized(self) -> "GridDistribution":
        m = self.mass()
        if not m > 0:
            raise InvalidParameterError("cannot normalise a distribution with zero mass")
        return GridDistribution(self.grid, self.values / m)

    def mean(self) -> float:
        return float(_trapz(self.nodes * self.values, self.grid.spacing) / self.mass())

    def variance(self) -> float:
        mu = self.mean()
        return float(_trapz((self.nodes - mu) ** 2 * self.values, self.grid.spacing) / self.mass())

    def leakage(self) -> float:
        """Mass carried by the outer 5% of nodes (both ends together)."""
        mask = _outer_mask(self.grid.points)
        return float(self.grid.spacing * np.sum(self.values[mask]))

    def check_leakage(self, what: str = "distribution") -> "GridDistribution":
        leak = self.leakage()
        if leak >= LEAKAGE_THRESHOLD:
            raise LeakageError(f"{what}: mass {leak:.3e} in the outer 5% of the grid exceeds {LEAKAGE_THRESHOLD:g}")
        return self

    def l1_distance(self, other: "GridDistribution") -> float:
        if not self.grid.same_as(other.grid):
            raise InvalidParameterError("L1 distance needs identical grids")
        return float(_trapz(np.abs(self.values - other.values), self.grid.spacing))

    def reflected(self) -> np.ndarray:
        """Density evaluated at -p on this grid (linear interpolation, zero outside)."""
        return np.interp(-self.nodes, self.nodes, self.values, left=0.0, right=0.0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p", "density"])
            for p, v in zip(self.nodes, self.values):
                w.writerow([f"{p:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "GridDistribution":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        p = data[:, 0]
        return cls(Grid1D(float(p[0]), float(p[-1]), len(p)), data[:, 1])


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Density on the product grid ``grid_a x grid_b``; ``values[i, j]`` is at (a_i, b_j)."""

    grid_a: Grid1D
    grid_b: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid_a.points, self.grid_b.points):
            raise InvalidParameterError("joint values shape does not match the grids")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidParameterError("joint density must be finite and non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def product(cls, a: GridDistribution, b: GridDistribution) -> "JointDistribution":
        return cls(a.grid, b.grid, np.outer(a.values, b.values))

    def marginal_a(self) -> GridDistribution:
        return GridDistribution(self.grid_a, _trapz(self.values, self.grid_b.spacing, axis=1))

    def marginal_b(self) -> GridDistribution:
        return GridDistribution(self.grid_b, _trapz(self.values, self.grid_a.spacing, axis=0))

    def mass(self) -> float:
        return float(_trapz(_trapz(self.values, self.grid_b.spacing, axis=1), self.grid_a.spacing))

    def l1_distance(self, other: "JointDistribution") -> float:
        diff = np.abs(self.values - other.values)
        return float(_trapz(_trapz(diff, self.grid_b.spacing, axis=1), self.grid_a.spacing))

    def to_csv(self, path) -> None:
        a, b = self.grid_a.nodes, self.grid_b.nodes
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p_a", "p_b", "density"])
            for i, pa in enumerate(a):
                for j, pb in enumerate(b):
                    w.writerow([f"{pa:.17g}", f"{pb:.17g}", f"{self.values[i, j]:.17g}"])


def discretize(g: GaussianMoment, grid: Grid1D, min_width: float = 6.0) -> GridDistribution:
    """Sample and normalise a Gaussian on ``grid``.

    The grid must cover ``mean +- min_width * std`` and resolve the
    standard deviation with at least four nodes.
    """
    sd = g.std
    if grid.lower > g.mean - min_width * sd or grid.upper < g.mean + min_width * sd:
        raise LeakageError(f"grid [{grid.lower}, {grid.upper}] does not span +-{min_width} sd around {g.mean}")
    if grid.spacing > sd / 4:
        raise ResolutionError(f"grid spacing {grid.spacing:.3g} under-resolves std {sd:.3g}")
    d = GridDistribution(grid, g.pdf(grid.nodes)).normalized()
    return d.check_leakage("discretize")


def measurement_update(d: GridDistribution, model: MeasurementModel, x: float) -> tuple[GridDistribution, float]:
    """Bayes update with the Gaussian pointer kernel; returns (posterior, P(x))."""
    if model.ideal:
        raise IdealLimitError("the ideal kernel is a delta and cannot be applied on a grid")
    weighted = model.kernel(x, d.nodes) * d.values
    px = float(_trapz(weighted, d.grid.spacing))
    if not px >= 1e-300:
        raise OutcomeIncompatibleError(f"P(x={x}) = {px:.3e} is numerically zero")
    return GridDistribution(d.grid, weighted / px), px


def _gaussian_kernel_weights(h: float, n: int, shift: float, variance: float) -> np.ndarray:
    k = np.arange(-(n - 1), n) * h - shift
    w = np.exp(-(k**2) / (2 * variance))
    total = h * w.sum()
    if not total > 0:
        raise ResolutionError("control kernel vanishes on this grid")
    return w / total


def apply_control(d: GridDistribution, shift: float, added_variance: float = 0.0) -> GridDistribution:
    """Shift the distribution by ``shift``, convolving with N(0, added_variance).

    A zero variance is an interpolated translation; otherwise the shifted
    Gaussian kernel is applied by direct discrete convolution with weights
    normalised on the grid.
    """
    if added_variance < 0:
        raise InvalidParameterError("added_variance must be >= 0")
    h, n = d.grid.spacing, d.grid.points
    if added_variance == 0:
        out = np.interp(d.nodes - shift, d.nodes, d.values, left=0.0, right=0.0)
    else:
        if math.sqrt(added_variance) < h:
            raise ResolutionError(f"noise std {math.sqrt(added_variance):.3g} is below the grid spacing {h:.3g}")
        w = _gaussian_kernel_weights(h, n, shift, added_variance)
        out = h * np.convolve(d.values, w, mode="full")[n - 1 : 2 * n - 1]
    result = GridDistribution(d.grid, np.maximum(out, 0.0))
    return result.check_leakage("apply_control")


def intervention_probability(
    d: GridDistribution, model: MeasurementModel, x_grid: Grid1D, chunk: int = 256
) -> GridDistribution:
    """Outcome density P(x) = int M(x|p) d(p) dp on ``x_grid``, normalised over x."""
    if model.ideal:
        raise IdealLimitError("the ideal kernel is a delta and cannot be applied on a grid")
    xs = x_grid.nodes
    px = np.empty_like(xs)
    for start in range(0, len(xs), chunk):
        block = xs[start : start + chunk, None]
        px[start : start + chunk] = _trapz(model.kernel(block, d.nodes[None, :]) * d.values, d.grid.spacing, axis=1)
    return GridDistribution(x_grid, px).normalized().check_leakage("intervention_probability")


def eps_weights(eps: GridDistribution, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample the internal-noise density at multiples of ``spacing``.

    Returns integer offsets and weights normalised so that
    ``spacing * weights.sum() == 1``.
    """
    kmax = int(math.floor(max(abs(eps.grid.lower), abs(eps.grid.upper)) / spacing))
    offsets = np.arange(-kmax, kmax + 1)
    w = np.interp(offsets * spacing, eps.nodes, eps.values, left=0.0, right=0.0)
    keep = w > 0
    offsets, w = offsets[keep], w[keep]
    total = spacing * w.sum()
    if not total > 0:
        raise ResolutionError("internal-noise density has no weight on the collision grid")
    return offsets, w / total


def collision_map(
    pa: GridDistribution,
    pb: GridDistribution,
    eps: GridDistribution,
    workers: int = 1,
    max_points: int = MAX_JOINT_POINTS,
) -> JointDistribution:
    """Two-particle collision with internal noise ``eps`` (see module docstring).

    ``pa`` and ``pb`` must share one grid; the output joint lives on that
    grid squared.  Rows may be split across ``workers`` threads; each
    output cell accumulates the noise offsets in the same order, so the
    result does not depend on the worker count.
    """
    if not pa.grid.same_as(pb.grid):
        raise InvalidParameterError("pa and pb must share the same grid")
    n = pa.grid.points
    if n > max_points:
        need = 8 * n * n
        raise GridTooLargeError(
            f"{n}x{n} joint grid exceeds the {max_points}^2 cap (would need {need / 2**20:.1f} MiB per array)"
        )
    asym = float(_trapz(np.abs(eps.values - eps.reflected()), eps.grid.spacing))
    if asym >= 1e-9:
        raise PreconditionError(f"internal-noise density is not symmetric (L1 asymmetry {asym:.3e})")
    pa.check_leakage("collision input a")
    pb.check_leakage("collision input b")

    h = pa.grid.spacing
    offsets, w = eps_weights(eps, h)
    a, b = pa.values, pb.values

    def shifted(v: np.ndarray, k: int) -> np.ndarray:
        # out[i] = v[i + k], zero outside
        out = np.zeros_like(v)
        if abs(k) >= n:
            return out
        if k >= 0:
            out[: n - k] = v[k:]
        else:
            out[-k:] = v[: n + k]
        return out

    def rows(lo: int, hi: int) -> np.ndarray:
        acc = np.zeros((hi - lo, n))
        for k, wk in zip(offsets, w):
            # P_b(p_i - eta_k) * P_a(p_j + eta_k)
            bk = shifted(b, -int(k))[lo:hi]
            ak = shifted(a, int(k))
            acc += (wk * h) * np.outer(bk, ak)
        return acc

    if workers <= 1:
        values = rows(0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda lh: rows(*lh), zip(bounds[:-1], bounds[1:])))
        values = np.vstack(parts)

    joint = JointDistribution(pa.grid, pb.grid, values)
    joint.marginal_a().check_leakage("collision output a")
    joint.marginal_b().check_leakage("collision output b")
    return joint


def noise_density(variance: float, spacing: float, width: float = 8.0) -> GridDistribution:
    """Centred Gaussian internal-noise density on a symmetric grid of ``spacing``.

    A zero variance gives the discrete delta.  Variances too small to be
    resolved by ``spacing`` are sampled as-is and renormalised, which keeps
    the density symmetric (the collision precondition).
    """
    if variance < 0:
        raise InvalidParameterError("noise variance must be >= 0")
    if variance == 0:
        return GridDistribution.point_mass(Grid1D.symmetric(spacing, 4 * spacing))
    half = max(width * math.sqrt(variance), 4 * spacing)
    grid = Grid1D.symmetric(spacing, half)
    return GridDistribution.from_function(grid, lambda x: np.exp(-0.5 * x * x / variance))


def shift_error(g: GaussianMoment, grid: Grid1D, shifts) -> float:
    """Worst L1 error of an interpolated translation against the exact shifted Gaussian.

    Linear-interpolation error depends on where a shift falls inside a
    cell, so refinement studies should compare worst cases over a fixed
    set of sub-cell offsets rather than a single shift.
    """
    d = discretize(g, grid)
    worst = 0.0
    for s in shifts:
        exact = GridDistribution(grid, GaussianMoment(g.mean + s, g.variance).pdf(grid.nodes))
        worst = max(worst, apply_control(d, s).l1_distance(exact))
    return worst
