"""Gaussian covariance-matrix backend for the three-mode collision model.

Conventions (hbar = 1): quadratures are ordered (q_a, p_a, q_b, p_b, Q, P),
the symplectic form is block diagonal with blocks [[0, 1], [-1, 0]], the
vacuum has variance 1/2 in every quadrature, and a covariance matrix is
physical iff all its symplectic eigenvalues are >= 1/2.

The collision is |Psi_f> = V U |Psi_i> with

    U = exp[i Q (p_b - p_a)],   V = exp[-i P (q_b - q_a)].

In the Heisenberg picture X_f = U^dagger V^dagger X V U, so the phase-space
matrix of the collision is S_VU = S_V S_U.  It sends p_a to p_b + P and
p_b to p_a - P, but it also moves q_a to q_a + Q.  Momenta are swapped
exactly in the limit of a P-squeezed auxiliary while the positions of
both particles pick up the (then anti-squeezed) auxiliary Q noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameterError

VACUUM_VARIANCE = 0.5
MODES = ("a", "b", "aux")
QUADRATURES = ("q_a", "p_a", "q_b", "p_b", "Q", "P")
PHYSICAL_TOL = 1e-10
SYMPLECTIC_TOL = 1e-12


def omega(n_modes: int = 3) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Ascending symplectic spectrum of ``cov`` (one value per mode)."""
    n = cov.shape[0] // 2
    try:
        # L^T (i Omega) L is Hermitian with the same spectrum as i Omega cov
        low = np.linalg.cholesky(cov)
        ev = np.linalg.eigvalsh(low.T @ (1j * omega(n)) @ low)
    except np.linalg.LinAlgError:
        ev = np.linalg.eigvals(1j * omega(n) @ cov).real
    return np.sort(np.abs(ev))[::2]


@dataclass(frozen=True, eq=False)
class CovarianceState:
    """First and second moments of an n-mode Gaussian state."""

    mean: np.ndarray
    covariance: np.ndarray = field(repr=False)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.covariance, dtype=float)
        if mean.ndim != 1 or mean.size % 2 or cov.shape != (mean.size, mean.size):
            raise InvalidParameterError(f"mean {mean.shape} and covariance {cov.shape} do not describe a set of modes")
        if np.max(np.abs(cov - cov.T)) > 1e-12:
            raise InvalidParameterError("covariance is not symmetric")
        cov = (cov + cov.T) / 2
        nu = symplectic_eigenvalues(cov).min()
        if nu < VACUUM_VARIANCE - PHYSICAL_TOL:
            raise InvalidParameterError(f"unphysical covariance: smallest symplectic eigenvalue {nu:.6g} < 1/2")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def reduced(self, modes: Iterable[int]) -> "CovarianceState":
        idx = [2 * m + k for m in modes for k in (0, 1)]
        return CovarianceState(self.mean[idx], self.covariance[np.ix_(idx, idx)])

    def variance(self, index: int) -> float:
        return float(self.covariance[index, index])

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "covariance": self.covariance.tolist()}

    @classmethod
    def from_dict(cls, raw: dict) -> "CovarianceState":
        return cls(np.array(raw["mean"]), np.array(raw["covariance"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    matrix: np.ndarray = field(repr=False)
    displacement: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.array(self.matrix, dtype=float)
        n = s.shape[0] // 2
        if s.shape != (2 * n, 2 * n):
            raise InvalidParameterError(f"symplectic matrix must be square and even-sized, got {s.shape}")
        d = np.zeros(2 * n) if self.displacement is None else np.array(self.displacement, dtype=float)
        err = symplectic_error(s)
        if err > SYMPLECTIC_TOL:
            raise InvalidParameterError(f"matrix is not symplectic (error {err:.3e})")
        s.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "matrix", s)
        object.__setattr__(self, "displacement", d)

    def then(self, other: "SymplecticMap") -> "SymplecticMap":
        """Apply ``self`` first, then ``other``."""
        return SymplecticMap(other.matrix @ self.matrix, other.matrix @ self.displacement + other.displacement)

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "displacement": self.displacement.tolist()}

    @classmethod
    def from_dict(cls, raw: dict) -> "SymplecticMap":
        return cls(np.array(raw["matrix"]), np.array(raw["displacement"]))


def symplectic_error(s: np.ndarray) -> float:
    om = omega(s.shape[0] // 2)
    return float(np.max(np.abs(s @ om @ s.T - om)))


def _unit(row: str, col: str) -> np.ndarray:
    e = np.zeros((6, 6))
    e[QUADRATURES.index(row), QUADRATURES.index(col)] = 1.0
    return e


def symplectic_of_generators() -> tuple[SymplecticMap, SymplecticMap, SymplecticMap]:
    """Phase-space matrices (S_U, S_V, S_VU) of the collision unitaries.

    From [q, p] = i: U^dagger X U = X - i[Q (p_b - p_a), X] exactly, since
    the series stops at first order for these quadratic generators.
    """
    eye = np.eye(6)
    s_u = eye + _unit("q_a", "Q") - _unit("q_b", "Q") + _unit("P", "p_b") - _unit("P", "p_a")
    s_v = eye + _unit("p_a", "P") - _unit("p_b", "P") + _unit("Q", "q_b") - _unit("Q", "q_a")
    return SymplecticMap(s_u), SymplecticMap(s_v), SymplecticMap(s_v @ s_u)


def evolve(state: CovarianceState, smap: SymplecticMap) -> CovarianceState:
    s = smap.matrix
    return CovarianceState(s @ state.mean + smap.displacement, s @ state.covariance @ s.T)


# states


def single_mode(mean_q=0.0, mean_p=0.0, var_q=VACUUM_VARIANCE, var_p=VACUUM_VARIANCE, cov_qp=0.0) -> CovarianceState:
    return CovarianceState(np.array([mean_q, mean_p]), np.array([[var_q, cov_qp], [cov_qp, var_p]]))


def squeezed_auxiliary(p_variance: float) -> CovarianceState:
    """Minimum-uncertainty auxiliary with momentum variance ``p_variance``.

    The P eigenstate of the ideal model is the limit ``p_variance -> 0``;
    a zero variance is rejected rather than represented.
    """
    if not p_variance > 0:
        raise InvalidParameterError("auxiliary P-variance must be > 0; use a small squeezed value for the ideal limit")
    return single_mode(var_q=VACUUM_VARIANCE**2 / p_variance, var_p=p_variance)


def product_state(*states: CovarianceState) -> CovarianceState:
    mean = np.concatenate([s.mean for s in states])
    n = mean.size
    cov = np.zeros((n, n))
    i = 0
    for s in states:
        k = s.mean.size
        cov[i : i + k, i : i + k] = s.covariance
        i += k
    return CovarianceState(mean, cov)


def collision_input(a: CovarianceState, b: CovarianceState, aux_p_variance: float) -> CovarianceState:
    return product_state(a, b, squeezed_auxiliary(aux_p_variance))


def collide(state: CovarianceState) -> CovarianceState:
    return evolve(state, symplectic_of_generators()[2])


# figures of merit


def gaussian_fidelity(s1: CovarianceState, s2: CovarianceState) -> float:
    """Uhlmann fidelity of two single-mode Gaussian states (hbar = 1, vacuum variance 1/2)."""
    if s1.n_modes != 1 or s2.n_modes != 1:
        raise InvalidParameterError("fidelity is implemented for single-mode states")
    v = s1.covariance + s2.covariance
    d = s1.mean - s2.mean
    big = np.linalg.det(v)
    small = 4.0 * (np.linalg.det(s1.covariance) - 0.25) * (np.linalg.det(s2.covariance) - 0.25)
    small = max(small, 0.0)
    return float(math.exp(-0.5 * d @ np.linalg.solve(v, d)) / (math.sqrt(big + small) - math.sqrt(small)))


def swap_fidelity(state_f: CovarianceState, target_b_initial: CovarianceState) -> float:
    """Fidelity between the final reduced mode-a state and the initial mode-b state."""
    return gaussian_fidelity(state_f.reduced([0]), target_b_initial)


def momentum_swap_fidelity(state_f: CovarianceState, target_b_initial: CovarianceState) -> float:
    """Classical fidelity of the momentum marginals of final a and initial b.

    This is the quantity the collision actually transfers: it tends to 1
    as the auxiliary P-variance goes to 0, whereas the full-state
    fidelity does not because q_a picks up the auxiliary Q noise.
    """
    m1, v1 = state_f.mean[1], state_f.covariance[1, 1]
    m2, v2 = target_b_initial.mean[1], target_b_initial.covariance[1, 1]
    return float(2 * math.sqrt(v1 * v2) / (v1 + v2) * math.exp(-((m1 - m2) ** 2) / (2 * (v1 + v2))))


def partial_transpose(cov: np.ndarray, partition: Sequence[int]) -> np.ndarray:
    """Flip the sign of the momentum of every mode in ``partition``."""
    flip = np.ones(cov.shape[0])
    for m in partition:
        flip[2 * m + 1] = -1.0
    return cov * np.outer(flip, flip)


def log_negativity(state: CovarianceState, partition: Sequence[int]) -> float:
    nu = symplectic_eigenvalues(partial_transpose(state.covariance, partition))
    return float(np.sum(np.maximum(0.0, -np.log(2.0 * nu))))


def ppt_physicality(state: CovarianceState, partition: Sequence[int]) -> bool:
    """True iff the partially transposed covariance is still a physical state."""
    nu = symplectic_eigenvalues(partial_transpose(state.covariance, partition))
    return bool(nu.min() >= VACUUM_VARIANCE - PHYSICAL_TOL)


@dataclass(frozen=True)
class CollisionPoint:
    aux_p_variance: float
    swap_fidelity: float
    momentum_swap_fidelity: float
    log_negativity_ab_c: float
    ppt_physical_ab_c: bool
    var_p_a_final: float
    var_p_a_expected: float
    min_symplectic_eigenvalue: float


def collision_point(a: CovarianceState, b: CovarianceState, aux_p_variance: float) -> CollisionPoint:
    state_i = collision_input(a, b, aux_p_variance)
    state_f = collide(state_i)
    return CollisionPoint(
        aux_p_variance=aux_p_variance,
        swap_fidelity=swap_fidelity(state_f, b),
        momentum_swap_fidelity=momentum_swap_fidelity(state_f, b),
        log_negativity_ab_c=log_negativity(state_f, [2]),
        ppt_physical_ab_c=ppt_physicality(state_f, [2]),
        var_p_a_final=state_f.variance(1),
        var_p_a_expected=b.variance(1) + aux_p_variance,
        min_symplectic_eigenvalue=float(symplectic_eigenvalues(state_f.covariance).min()),
    )
