"""Truncated Fock-space engine for the binary "which side" oscillator measurement.

Units: hbar = m = omega = 1 unless ``FockSpace.frequency`` says otherwise;
the ground-state position variance is ``DELTA0 = 1/2`` so that
q = sqrt(DELTA0) (a + a^dagger).  Energies exclude the zero-point term.

The measurement operators are

    M_pm = (1 +- U) / 2,   U = -i (lambda + i q) (lambda^2 + q^2)^(-1/2),

with U unitary.  Matrix functions of q are evaluated on the eigenbasis of
the truncated q, which keeps U exactly unitary and the POVM exactly
complete inside the truncated space.  The spectrum of the truncated q is
a Gauss-Hermite rule, so features of q finer than its node spacing
(about pi / sqrt(2 N)) are not resolved: at small lambda, energies of
the conditional states keep growing with N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidParameterError, LeakageError, OutcomeIncompatibleError

DELTA0 = 0.5
MIN_DIM = 16
LEAKAGE_LIMIT = 1e-8


@dataclass(frozen=True)
class FockSpace:
    dim: int = 64
    frequency: float = 1.0

    def __post_init__(self):
        if self.dim < MIN_DIM:
            raise InvalidParameterError(f"Fock dimension must be >= {MIN_DIM}, got {self.dim}")
        if not self.frequency > 0:
            raise InvalidParameterError("frequency must be > 0")

    @property
    def guard_levels(self) -> int:
        return math.ceil(self.dim / 8)

    @property
    def max_level(self) -> int:
        """Highest level index that spectral claims are made about."""
        return self.dim - self.guard_levels - 1

    @classmethod
    def for_thermal(cls, nbar: float, min_dim: int = 64, frequency: float = 1.0) -> "FockSpace":
        """Smallest power-of-two space that admits a thermal state of occupation ``nbar``."""
        dim = min_dim
        while True:
            space = cls(dim, frequency)
            if nbar <= dim / 10 and thermal_tail(nbar, dim - space.guard_levels) < LEAKAGE_LIMIT:
                return space
            dim *= 2


class Operators(NamedTuple):
    a: np.ndarray
    adag: np.ndarray
    q: np.ndarray
    p: np.ndarray
    n: np.ndarray
    parity: np.ndarray


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=16)
def build_operators(space: FockSpace) -> Operators:
    """Ladder, quadrature, number and parity operators on the truncated space."""
    levels = np.arange(space.dim)
    a = np.diag(np.sqrt(levels[1:].astype(float)), 1).astype(complex)
    adag = a.conj().T.copy()
    q = math.sqrt(DELTA0) * (a + adag)
    p = 1j * (adag - a) / (2 * math.sqrt(DELTA0))
    n = np.diag(levels.astype(complex))
    parity = np.diag((-1.0) ** levels).astype(complex)
    return Operators(*(_frozen(m) for m in (a, adag, q, p, n, parity)))


@dataclass(frozen=True, eq=False)
class MeasurementPair:
    """Kraus pair M_+, M_- for resolution ``lam`` on ``space``."""

    space: FockSpace
    lam: float
    m_plus: np.ndarray = field(repr=False)
    m_minus: np.ndarray = field(repr=False)
    unitary: np.ndarray = field(repr=False)
    inv_sqrt: np.ndarray = field(repr=False)

    @property
    def mu(self) -> float:
        return self.lam / math.sqrt(DELTA0)

    def kraus(self, result) -> np.ndarray:
        return self.m_plus if _sign(result) > 0 else self.m_minus

    def povm(self, result) -> np.ndarray:
        m = self.kraus(result)
        return m.conj().T @ m

    def completeness_error(self) -> float:
        total = self.povm(+1) + self.povm(-1)
        return float(np.max(np.abs(total - np.eye(self.space.dim))))


def _sign(result) -> int:
    if result in (1, "+", "plus"):
        return 1
    if result in (-1, "-", "minus"):
        return -1
    raise InvalidParameterError(f"measurement result must be +1/-1 or '+'/'-', got {result!r}")


@lru_cache(maxsize=64)
def build_measurement(space: FockSpace, lam: float) -> MeasurementPair:
    if not lam > 0:
        raise InvalidParameterError("lambda must be > 0")
    q = build_operators(space).q
    x, vecs = np.linalg.eigh(q)
    f = 1.0 / np.sqrt(lam**2 + x**2)
    unitary = (vecs * ((x - 1j * lam) * f)) @ vecs.conj().T
    inv_sqrt = (vecs * f) @ vecs.conj().T
    eye = np.eye(space.dim)
    return MeasurementPair(
        space,
        float(lam),
        _frozen((eye + unitary) / 2),
        _frozen((eye - unitary) / 2),
        _frozen(unitary),
        _frozen(inv_sqrt),
    )


# states and checks


def thermal_tail(nbar: float, level: int) -> float:
    """Thermal population at levels >= ``level``."""
    if nbar == 0:
        return 0.0 if level > 0 else 1.0
    return (nbar / (1 + nbar)) ** level


def thermal_populations(space: FockSpace, nbar: float) -> np.ndarray:
    if nbar < 0:
        raise InvalidParameterError("nbar must be >= 0")
    if nbar > space.dim / 10:
        raise InvalidParameterError(f"nbar = {nbar} exceeds dim/10 = {space.dim / 10}")
    levels = np.arange(space.dim)
    if nbar == 0:
        pops = (levels == 0).astype(float)
    else:
        pops = (nbar / (1 + nbar)) ** levels / (1 + nbar)
    return pops / pops.sum()


def thermal_state(space: FockSpace, nbar: float) -> np.ndarray:
    rho = np.diag(thermal_populations(space, nbar)).astype(complex)
    check_density(rho, space, guard=True)
    return rho


def temperature_of(nbar: float, frequency: float = 1.0) -> float:
    """Bath temperature (k_B = hbar = 1) that gives mean occupation ``nbar``."""
    return frequency / math.log1p(1.0 / nbar)


def check_density(rho: np.ndarray, space: FockSpace, guard: bool = False, tol: float = 1e-10) -> None:
    """Raise unless ``rho`` is a trace-one positive Hermitian matrix (and, if asked, inside the guard)."""
    if rho.shape != (space.dim, space.dim):
        raise InvalidParameterError(f"density matrix shape {rho.shape} does not match dim {space.dim}")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidParameterError(f"trace {np.trace(rho).real:.3e} differs from 1")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise InvalidParameterError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidParameterError("density matrix has a negative eigenvalue")
    if guard:
        top = float(np.real(np.trace(rho)[()] - np.trace(rho[: -space.guard_levels, : -space.guard_levels])))
        if top >= LEAKAGE_LIMIT:
            raise LeakageError(f"population {top:.3e} in the top {space.guard_levels} Fock levels")


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log(w)))


def shannon_entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def energy(rho: np.ndarray, space: FockSpace) -> float:
    """hbar omega Tr[n rho], zero-point excluded."""
    return space.frequency * float(np.real(np.einsum("ii,i->", rho, np.arange(space.dim))))


def expectation(op: np.ndarray, rho: np.ndarray) -> float:
    return float(np.real(np.trace(op @ rho)))


# measurement


def measure(rho: np.ndarray, pair: MeasurementPair, result) -> tuple[np.ndarray, float]:
    """Conditional state M rho M^dagger / P and its probability P = Tr[M^dagger M rho]."""
    m = pair.kraus(result)
    prob = expectation(m.conj().T @ m, rho)
    if not prob > 1e-12:
        raise OutcomeIncompatibleError(f"result {result!r} has probability {prob:.3e}")
    out = m @ rho @ m.conj().T / prob
    return (out + out.conj().T) / 2, prob


def unconditional(rho: np.ndarray, pair: MeasurementPair) -> np.ndarray:
    out = sum(m @ rho @ m.conj().T for m in (pair.m_plus, pair.m_minus))
    return (out + out.conj().T) / 2


def _check_level(n: int, space: FockSpace) -> None:
    if not 0 <= n <= space.max_level:
        raise LeakageError(f"level {n} is inside the top {space.guard_levels} guard levels of dim {space.dim}")


def psi_state(n: int, pair: MeasurementPair) -> np.ndarray:
    """|psi_n> = 2 M_+|n> - |n> = U|n>."""
    _check_level(n, pair.space)
    return pair.unitary[:, n].copy()


def phi_state(n: int, pair: MeasurementPair, result=+1) -> np.ndarray:
    """|phi_n^pm> = sqrt(2) M_pm |n>."""
    _check_level(n, pair.space)
    return math.sqrt(2) * pair.kraus(result)[:, n]


def parity_expectation(vec: np.ndarray, space: FockSpace) -> float:
    par = np.real(np.diag(build_operators(space).parity))
    return float(np.sum(par * np.abs(vec) ** 2))


def overlap_g(n: int, pair: MeasurementPair) -> float:
    """g_n = <n| [mu^2 + (a + a^dagger)^2]^(-1/2) |n>, computed spectrally.

    With q = sqrt(DELTA0) (a + a^dagger) this is sqrt(DELTA0) <n|(lambda^2 + q^2)^(-1/2)|n>.
    """
    _check_level(n, pair.space)
    return math.sqrt(DELTA0) * float(np.real(pair.inv_sqrt[n, n]))


def phi_gram(pair: MeasurementPair) -> np.ndarray:
    """Overlaps <phi_m^+|phi_n^+> = <m|1 + q (lambda^2 + q^2)^(-1/2)|n> on the guarded levels."""
    k = pair.space.max_level + 1
    g = 2 * pair.povm(+1)
    return g[:k, :k]


# feedback and bookkeeping


@dataclass(frozen=True)
class QuantumLedger:
    """Energy and entropy record of measure-then-parity-feedback."""

    prob_plus: float
    prob_minus: float
    energy_initial: float
    energy_measured: float
    energy_final: float
    entropy_initial: float
    entropy_conditional_plus: float
    entropy_conditional_minus: float
    entropy_measured: float
    entropy_final: float

    @property
    def energy_added(self) -> float:
        return self.energy_measured - self.energy_initial

    @property
    def information(self) -> float:
        """S(rho') - sum_x P(x) S(rho|x): entropy of not knowing which branch occurred."""
        return self.entropy_measured - (
            self.prob_plus * self.entropy_conditional_plus + self.prob_minus * self.entropy_conditional_minus
        )

    @property
    def feedback_entropy_drop(self) -> float:
        return self.entropy_measured - self.entropy_final

    @property
    def measurement_entropy_gain(self) -> float:
        return self.entropy_measured - self.entropy_initial

    def checks(self) -> dict[str, bool]:
        return {
            "probabilities_sum_to_one": abs(self.prob_plus + self.prob_minus - 1) < 1e-10,
            "feedback_energy_neutral": abs(self.energy_final - self.energy_measured) < 1e-10,
            "entropy_concavity": self.information >= -1e-10,
            "measurement_entropy_gain_in_0_ln2": -1e-10 <= self.measurement_entropy_gain <= math.log(2) + 1e-10,
        }

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out.update(
            energy_added=self.energy_added,
            information=self.information,
            feedback_entropy_drop=self.feedback_entropy_drop,
            measurement_entropy_gain=self.measurement_entropy_gain,
        )
        return out


def parity_feedback(rho: np.ndarray, pair: MeasurementPair) -> tuple[np.ndarray, QuantumLedger]:
    """Do nothing on +, apply the parity operator on -; returns the final state and its ledger."""
    space = pair.space
    check_density(rho, space, guard=True)
    par = build_operators(space).parity
    plus, p_plus = measure(rho, pair, +1)
    minus, p_minus = measure(rho, pair, -1)
    measured = p_plus * plus + p_minus * minus
    final = p_plus * plus + p_minus * (par @ minus @ par.conj().T)
    final = (final + final.conj().T) / 2
    ledger = QuantumLedger(
        prob_plus=p_plus,
        prob_minus=p_minus,
        energy_initial=energy(rho, space),
        energy_measured=energy(measured, space),
        energy_final=energy(final, space),
        entropy_initial=von_neumann_entropy(rho),
        entropy_conditional_plus=von_neumann_entropy(plus),
        entropy_conditional_minus=von_neumann_entropy(minus),
        entropy_measured=von_neumann_entropy(measured),
        entropy_final=von_neumann_entropy(final),
    )
    return final, ledger


def energy_increase(rho_thermal: np.ndarray, pair: MeasurementPair) -> float:
    """Average energy added by the measurement, Tr[n rho'] - Tr[n rho] (times hbar omega)."""
    check_density(rho_thermal, pair.space, guard=True)
    return energy(unconditional(rho_thermal, pair), pair.space) - energy(rho_thermal, pair.space)


def variance_ratios(rho: np.ndarray, pair: MeasurementPair, result=+1) -> tuple[float, float]:
    """Position and momentum variance of the conditional state relative to ``rho``."""
    ops = build_operators(pair.space)
    cond, _ = measure(rho, pair, result)

    def var(op, state):
        m = expectation(op, state)
        return expectation(op @ op, state) - m * m

    return var(ops.q, cond) / var(ops.q, rho), var(ops.p, cond) / var(ops.p, rho)


@dataclass(frozen=True, eq=False)
class ThermalisationResult:
    state: np.ndarray = field(repr=False)
    entropy_change: float
    energy_change: float
    entropy_unchanged: bool
    energy_matches_minus_delta_e: bool | None


def thermalisation_map(
    rho: np.ndarray, pair: MeasurementPair, delta_e: float | None = None, rel_tol: float = 0.05
) -> ThermalisationResult:
    """Apply E(rho) = sum_n sigma_n^dagger rho sigma_n with sigma_n = |n><psi_n|.

    Since sigma_n^dagger rho sigma_n = |psi_n><n|rho|n><psi_n|, the map is
    U diag(rho) U^dagger.  The flags record whether the output has the
    same entropy (to 1e-6 nats) and, when ``delta_e`` is given, whether
    the energy change equals -delta_e to ``rel_tol``.
    """
    space = pair.space
    check_density(rho, space)
    u = pair.unitary
    out = (u * np.real(np.diag(rho))) @ u.conj().T
    out = (out + out.conj().T) / 2
    ds = von_neumann_entropy(out) - von_neumann_entropy(rho)
    de = energy(out, space) - energy(rho, space)
    matches = None
    if delta_e is not None:
        matches = abs(de + delta_e) <= rel_tol * abs(delta_e)
    return ThermalisationResult(out, ds, de, abs(ds) < 1e-6, matches)


# generic measure-and-control


class InterventionOutcome(NamedTuple):
    probabilities: np.ndarray
    conditional_states: list
    unconditional_state: np.ndarray


def _kraus_completeness(ops: Sequence[np.ndarray]) -> float:
    total = sum(k.conj().T @ k for k in ops)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def cptp_intervention(
    rho: np.ndarray,
    measurement: Sequence[np.ndarray],
    channels: Sequence[Sequence[np.ndarray]],
    tol: float = 1e-10,
) -> InterventionOutcome:
    """Measure with Kraus operators, then apply the outcome's CPTP channel.

    ``channels[x]`` is the Kraus list of the control applied after outcome
    ``x``; a conditional unitary is the one-element list ``[U]``.  The
    intervention probability P(x) = Tr[S(x) rho] is returned with the
    normalised post-control states and their unconditional mixture.
    """
    if len(measurement) != len(channels):
        raise InvalidParameterError("need one control channel per measurement outcome")
    err = _kraus_completeness(measurement)
    if err > tol:
        raise InvalidParameterError(f"measurement Kraus operators are incomplete (error {err:.3e})")
    for x, ch in enumerate(channels):
        err = _kraus_completeness(ch)
        if err > tol:
            raise InvalidParameterError(f"control channel {x} is not trace preserving (error {err:.3e})")

    probs, states = [], []
    total = np.zeros_like(rho, dtype=complex)
    for m, ch in zip(measurement, channels):
        measured = m @ rho @ m.conj().T
        controlled = sum(k @ measured @ k.conj().T for k in ch)
        prob = float(np.real(np.trace(controlled)))
        total = total + controlled
        probs.append(prob)
        states.append(controlled / prob if prob > 1e-15 else None)
    return InterventionOutcome(np.array(probs), states, (total + total.conj().T) / 2)


def parity_feedback_channels(pair: MeasurementPair) -> tuple[list, list]:
    """Kraus lists that express parity feedback as a :func:`cptp_intervention`."""
    par = build_operators(pair.space).parity
    return [pair.m_plus, pair.m_minus], [[np.eye(pair.space.dim)], [par]]


# summaries used by the experiment runner


def binary_summary(space: FockSpace, nbar: float, lam: float) -> dict[str, float]:
    """Every scalar reported for one (nbar, lambda, N) oscillator configuration."""
    pair = build_measurement(space, lam)
    rho = thermal_state(space, nbar)
    pops = thermal_populations(space, nbar)
    final, ledger = parity_feedback(rho, pair)
    d_e = ledger.energy_added
    gamma_q, ratio_p = variance_ratios(rho, pair)
    therm = thermalisation_map(final, pair, delta_e=d_e)
    out = {
        "thermal_shannon": shannon_entropy(pops),
        "entropy_gain_over_thermal": ledger.entropy_measured - shannon_entropy(pops),
        "feedback_entropy_drop": ledger.feedback_entropy_drop,
        "which_side_information": ledger.information,
        "energy_added": d_e,
        "feedback_energy_shift": ledger.energy_final - ledger.energy_measured,
        "position_variance_ratio": gamma_q,
        "momentum_variance_ratio": ratio_p,
        "prob_plus": ledger.prob_plus,
        "thermalisation_entropy_change": therm.entropy_change,
        "thermalisation_energy_change": therm.energy_change,
    }
    out.update({f"g_{n}": overlap_g(n, pair) for n in range(4)})
    return out


def density_to_dict(rho: np.ndarray) -> dict:
    return {"real": np.real(rho).tolist(), "imag": np.imag(rho).tolist()}


def density_from_dict(raw: dict) -> np.ndarray:
    return np.array(raw["real"], dtype=float) + 1j * np.array(raw["imag"], dtype=float)
