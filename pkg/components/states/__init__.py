""" SPDX-License-Identifier: MIT-0 """

import numpy as np

from dataclasses import dataclass
from scipy.special import gammaln, iv
from aws_lambda_powertools import Logger

import constants
from components.fock_core import DensityMatrix, HilbertSpace, PureState, State, as_density, check_leakage

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


@dataclass(frozen=True)
class PcsSpec:
    """Pair-coherent state: eigenstate of b1 b2 with eigenvalue zeta and n1 - n2 = q."""

    zeta: complex
    q: int = 0

    def __post_init__(self):
        object.__setattr__(self, "zeta", complex(self.zeta))
        if int(self.q) != self.q or self.q < 0:
            raise ValueError(f"Phonon-number offset q must be a nonnegative integer, got {self.q}")
        object.__setattr__(self, "q", int(self.q))


def _one_mode(space: HilbertSpace, what: str) -> int:
    if space.n_modes != 1:
        raise ValueError(f"{what} needs a one-mode space, got {space.n_modes} modes")
    return space.dims[0]


def _two_mode(space: HilbertSpace, what: str):
    if space.n_modes != 2:
        raise ValueError(f"{what} needs a two-mode space, got {space.n_modes} modes")
    return space.dims


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    if alpha == 0:
        amplitudes = np.zeros(cutoff, dtype=complex)
        amplitudes[0] = 1.0
        return amplitudes
    log_mod = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mod + 1j * n * np.angle(alpha))


def pcs(spec: PcsSpec, space: HilbertSpace) -> PureState:
    n1, n2 = _two_mode(space, "pcs")
    if min(n1, n2) < 4:
        raise ValueError(f"PCS cutoffs must be >= 4, got {space.dims}")
    if spec.q >= n1:
        raise ValueError(f"Offset q={spec.q} does not fit mode cutoff {n1}")
    levels = np.arange(min(n1 - spec.q, n2))
    vector = np.zeros(space.total, dtype=complex)
    if spec.zeta == 0:
        amplitudes = np.zeros(len(levels), dtype=complex)
        amplitudes[0] = 1.0
    else:
        log_mod = levels * np.log(abs(spec.zeta)) - 0.5 * (gammaln(levels + 1) + gammaln(levels + spec.q + 1))
        log_mod -= log_mod.max()
        amplitudes = np.exp(log_mod + 1j * levels * np.angle(spec.zeta))
    amplitudes /= np.linalg.norm(amplitudes)
    vector[(levels + spec.q) * n2 + levels] = amplitudes
    top = abs(amplitudes[-1]) ** 2
    if top > constants.PCS_LEAKAGE_THRESHOLD:
        logger.warning(f"PCS zeta={spec.zeta:.4g} q={spec.q} has top-level weight {top:.3g} at cutoffs {space.dims}")
    return PureState(space, vector)


def pcs_norm_squared(zeta: complex, q: int = 0) -> float:
    """Sum over n of |zeta|^(2n) / (n! (n+q)!), the squared normalization of the series."""
    r = abs(zeta)
    if r == 0:
        return float(np.exp(-gammaln(q + 1)))
    return float(r ** (-q) * iv(q, 2.0 * r))


def pcs_mean_phonons(zeta: complex) -> float:
    r = abs(zeta)
    if r == 0:
        return 0.0
    return float(r * iv(1, 2.0 * r) / iv(0, 2.0 * r))


def coherent(alpha: complex, space: HilbertSpace) -> PureState:
    cutoff = _one_mode(space, "coherent")
    state = PureState.normalized(space, _coherent_amplitudes(complex(alpha), cutoff))
    check_leakage(state, f"coherent({alpha:.3g})")
    return state


def _cat(beta: complex, space: HilbertSpace, parity: int, label: str) -> PureState:
    cutoff = _one_mode(space, label)
    beta = complex(beta)
    if abs(beta) ** 2 >= cutoff / 3:
        logger.warning(f"{label}: |beta|^2={abs(beta) ** 2:.3g} is not below cutoff/3 ({cutoff})")
    plus = _coherent_amplitudes(beta, cutoff)
    minus = _coherent_amplitudes(-beta, cutoff)
    superposition = plus + parity * minus
    if np.linalg.norm(superposition) < 1e-14:
        raise ValueError(f"{label} is undefined for beta={beta}")
    state = PureState.normalized(space, superposition)
    check_leakage(state, f"{label}({beta:.3g})")
    return state


def cat_even(beta: complex, space: HilbertSpace) -> PureState:
    return _cat(beta, space, +1, "cat_even")


def cat_odd(beta: complex, space: HilbertSpace) -> PureState:
    return _cat(beta, space, -1, "cat_odd")


def fock(n: int, space: HilbertSpace) -> PureState:
    cutoff = _one_mode(space, "fock")
    if not 0 <= n < cutoff:
        raise ValueError(f"Fock level {n} outside cutoff {cutoff}")
    vector = np.zeros(cutoff, dtype=complex)
    vector[n] = 1.0
    return PureState(space, vector)


def vacuum(space: HilbertSpace) -> PureState:
    vector = np.zeros(space.total, dtype=complex)
    vector[0] = 1.0
    return PureState(space, vector)


def thermal_dm(nbar: float, space: HilbertSpace) -> DensityMatrix:
    cutoff = _one_mode(space, "thermal_dm")
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0:
        return vacuum(space).projector()
    weights = (nbar / (1.0 + nbar)) ** np.arange(cutoff)
    rho = DensityMatrix(space, np.diag(weights / weights.sum()).astype(complex))
    check_leakage(rho, f"thermal_dm({nbar:.3g})")
    return rho


def squeezed_vacuum(r: float, space: HilbertSpace) -> PureState:
    """exp(r (b^2 - b†^2) / 2)|0>; r > 0 squeezes b + b†."""
    cutoff = _one_mode(space, "squeezed_vacuum")
    vector = np.zeros(cutoff, dtype=complex)
    if r == 0:
        vector[0] = 1.0
    else:
        n = np.arange((cutoff + 1) // 2)
        log_mod = n * np.log(np.tanh(abs(r))) + 0.5 * gammaln(2 * n + 1) - n * np.log(2.0) - gammaln(n + 1)
        vector[2 * n] = (-np.sign(r)) ** n * np.exp(log_mod)
    state = PureState.normalized(space, vector)
    check_leakage(state, f"squeezed_vacuum({r:.3g})")
    return state


def two_mode_squeezed_vacuum(r: float, space: HilbertSpace) -> PureState:
    n1, n2 = _two_mode(space, "two_mode_squeezed_vacuum")
    levels = np.arange(min(n1, n2))
    vector = np.zeros(space.total, dtype=complex)
    vector[levels * n2 + levels] = np.tanh(r) ** levels
    state = PureState.normalized(space, vector)
    check_leakage(state, f"two_mode_squeezed_vacuum({r:.3g})")
    return state


def fidelity_pure(rho: State, psi: PureState) -> float:
    """Overlap <psi|rho|psi> with a pure target state."""
    rho = as_density(rho)
    if rho.space != psi.space:
        raise ValueError(f"State space {rho.space.dims} does not match target space {psi.space.dims}")
    overlap = np.vdot(psi.data, rho.data @ psi.data).real
    return float(min(1.0, max(0.0, overlap)))
