""" SPDX-License-Identifier: MIT-0 """

import time
import numpy as np

from dataclasses import dataclass
from typing import Tuple, Union
from scipy.optimize import minimize_scalar
from aws_lambda_powertools import Logger

import constants
from components.fock_core import DensityMatrix, State, as_density
from components.model import TransferParams
from components.states import cat_even, fidelity_pure
from components.metrics import wigner_min
from components.conditioning import TransferChannel, channel_from_params, condition, transfer

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


@dataclass(frozen=True, eq=False)
class CatResult:
    """Conditioned b1 state after reading b2 out and detecting x on the travelling mode."""

    rho_cat: DensityMatrix
    fidelity: float
    nominal_fidelity: float
    beta: complex
    density: float
    wigner_min: float
    wigner_argmin: complex


def cat_axis(zeta: complex) -> complex:
    """Unit direction of the cat amplitude; the conditioned state depends on zeta^2, so beta lies along i zeta."""
    zeta = complex(zeta)
    return 1j if zeta == 0 else 1j * zeta / abs(zeta)


def cat_fidelity(rho: State, zeta: complex, optimize: bool = True) -> Tuple[float, float, complex]:
    """Returns (optimal fidelity, nominal fidelity to cat_even(i sqrt(zeta)), optimal beta)."""
    rho = as_density(rho)
    if rho.space.n_modes != 1:
        raise ValueError(f"cat_fidelity needs a one-mode state, got {rho.space.n_modes} modes")
    nominal_beta = 1j * np.sqrt(complex(zeta))
    nominal = fidelity_pure(rho, cat_even(nominal_beta, rho.space))
    if not optimize:
        return nominal, nominal, complex(nominal_beta)

    axis = cat_axis(zeta)
    upper = np.sqrt(rho.space.dims[0] / 4.0)
    result = minimize_scalar(lambda r: -fidelity_pure(rho, cat_even(r * axis, rho.space)),
                             bounds=(1e-3, upper), method="bounded", options={"xatol": 1e-6})
    best, beta = -float(result.fun), complex(result.x * axis)
    if nominal > best:
        best, beta = nominal, complex(nominal_beta)
    return best, nominal, beta


def prepare_cat(rho: State, readout: Union[TransferParams, TransferChannel], zeta: complex,
                x: float = 0.0) -> CatResult:
    """Transfers b2 to the travelling mode, conditions b1 on outcome x at theta = 0 and scores the cat."""
    start = time.time()
    if isinstance(readout, TransferParams):
        if readout.adiabatic_ratio >= constants.ADIABATIC_THRESHOLD:
            raise ValueError(f"Transfer is not adiabatic: |g~|/gamma_t = {readout.adiabatic_ratio:.3g} "
                             f">= {constants.ADIABATIC_THRESHOLD}")
        if readout.decay >= constants.TRANSFER_DECAY_THRESHOLD:
            raise ValueError(f"Transfer pulse too short: exp(-G tau) = {readout.decay:.3g} "
                             f">= {constants.TRANSFER_DECAY_THRESHOLD}")
        channel = channel_from_params(readout)
    else:
        channel = readout
    logger.info(f"Starting cat preparation (eta={channel.eta:.6f}, zeta={complex(zeta):.4g}, x={x})")

    travelling = transfer(rho, channel)
    rho_cat, density = condition(travelling, 1, 0.0, x)
    fidelity, nominal, beta = cat_fidelity(rho_cat, zeta)
    value, argmin = wigner_min(rho_cat)

    logger.info(f"Cat preparation complete. F_cat={fidelity:.4f} (nominal {nominal:.4f}), "
                f"W_min={value:.4g}. Duration: {time.strftime('%H:%M:%S', time.gmtime(time.time() - start))}")
    return CatResult(rho_cat=rho_cat, fidelity=fidelity, nominal_fidelity=nominal, beta=beta,
                     density=density, wigner_min=value, wigner_argmin=argmin[0])
