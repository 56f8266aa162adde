""" SPDX-License-Identifier: MIT-0 """

import numpy as np
import scipy.sparse as sp

from dataclasses import dataclass
from typing import Tuple
from aws_lambda_powertools import Logger

import constants
from components.fock_core import (DensityMatrix, HilbertSpace, State, as_density, destroy,
                                  expm_unitary, hermitize, quadrature_basis)
from components.model import TransferParams

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


@dataclass(frozen=True)
class TransferChannel:
    """Beam-splitter readout of b2 into a travelling mode.

    eta is the transmissivity 1 - exp(-2 G tau); sign -1 gives A_out = -B_in in the swap limit."""

    eta: float
    sign: int = -1

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def angle(self) -> float:
        return float(np.arcsin(np.sqrt(self.eta)))


def channel_from_params(tp: TransferParams, sign: int = -1) -> TransferChannel:
    if tp.G <= 0:
        raise ValueError(f"Transfer rate G must be positive, got {tp.G}")
    return TransferChannel(eta=tp.eta, sign=sign)


def _two_mode(rho: DensityMatrix, what: str):
    if rho.space.n_modes != 2:
        raise ValueError(f"{what} needs a two-mode state, got {rho.space.n_modes} modes")
    return rho.space.dims


def homodyne_kernel(space: HilbertSpace, mode: int, theta: float, x: float, scale: float = 1.0) -> sp.csr_matrix:
    """Partial bra <x,theta| on one mode, identity on the others.

    Shape (total / dims[mode], total); for a one-mode space this is the row vector of <x,theta|n>."""
    mode = space.check_mode(mode)
    row = quadrature_basis(space.dims[mode], np.array([x]), theta, scale)
    before = int(np.prod(space.dims[:mode]))
    after = int(np.prod(space.dims[mode + 1:]))
    kernel = sp.kron(sp.identity(before, dtype=complex), sp.csr_matrix(row), format="csr")
    return sp.kron(kernel, sp.identity(after, dtype=complex), format="csr")


def condition_grid(rho: State, mode: int, theta: float, xs, scale: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Unnormalized conditional states of the other mode for every outcome in xs.

    Returns (sigma, densities) with sigma of shape (len(xs), n, n) and densities = trace(sigma)."""
    rho = as_density(rho)
    n1, n2 = _two_mode(rho, "condition_grid")
    mode = rho.space.check_mode(mode)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    tensor_form = rho.data.reshape(n1, n2, n1, n2)
    if mode == 1:
        kernel = quadrature_basis(n2, xs, theta, scale)
        sigma = np.einsum("xk,ikjl,xl->xij", kernel, tensor_form, kernel.conj(), optimize=True)
    else:
        kernel = quadrature_basis(n1, xs, theta, scale)
        sigma = np.einsum("xk,kilj,xl->xij", kernel, tensor_form, kernel.conj(), optimize=True)
    densities = np.einsum("xii->x", sigma).real
    return sigma, densities


def condition(rho: State, mode: int, theta: float, x: float, scale: float = 1.0) -> Tuple[DensityMatrix, float]:
    """Projects one mode onto <x,theta| and returns the normalized state of the other with the outcome density."""
    rho = as_density(rho)
    sigma, densities = condition_grid(rho, mode, theta, [x], scale)
    density = float(densities[0])
    if density < constants.DENSITY_FLOOR:
        raise ValueError(f"outcome in null set: density {density:.3g} at x={x}")
    kept = rho.space.subspace([1 - mode])
    return DensityMatrix(kept, hermitize(sigma[0]) / density), density


def kraus_operators(channel: TransferChannel, cutoff: int) -> np.ndarray:
    """Kraus operators of the readout on a b2 mode with the given cutoff."""
    # Beam splitter on (b2, ancilla) with cos = sqrt(1 - eta); only the vacuum column of the ancilla is used
    space = HilbertSpace((cutoff, cutoff))
    b = destroy(space, 0)
    anc = destroy(space, 1)
    angle = channel.angle if channel.sign == -1 else -channel.angle
    generator = (1j * angle) * (anc @ b.dag() - anc.dag() @ b)
    unitary = expm_unitary(generator, 1.0).dense().reshape(cutoff, cutoff, cutoff, cutoff)
    # kraus[k, m, n] = <k_b2, m_anc| U |n_b2, 0_anc>
    return unitary[:, :, :, 0]


def transfer(rho: State, channel: TransferChannel) -> DensityMatrix:
    """Maps (b1, b2) to (b1, A_out): b2 leaks through the beam splitter into a vacuum ancilla and is traced out."""
    rho = as_density(rho)
    n1, n2 = _two_mode(rho, "transfer")
    kraus = kraus_operators(channel, n2)
    tensor_form = rho.data.reshape(n1, n2, n1, n2)
    out = np.einsum("kmn,injl,kol->imjo", kraus, tensor_form, kraus.conj(), optimize=True)
    return DensityMatrix(rho.space, hermitize(out.reshape(n1 * n2, n1 * n2)))

