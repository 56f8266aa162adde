""" SPDX-License-Identifier: MIT-0 """

import time
import numpy as np

from dataclasses import replace
from typing import Callable, Dict, List, Tuple
from scipy.special import iv
from aws_lambda_powertools import Logger

import constants
from components.fock_core import HilbertSpace, destroy, partial_trace, tensor
from components.model import ModelParams, check_rwa, derive, thermal_occupation
from components.states import PcsSpec, cat_even, fidelity_pure, fock, pcs, thermal_dm, two_mode_squeezed_vacuum, vacuum
from components.dynamics import conserved_difference, effective_spec, steady_state
from components.metrics import entropy, negativity, reid, wigner
from components.conditioning import TransferChannel, condition, transfer

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)

ORACLES: Dict[str, Callable[[], Tuple[bool, str]]] = {}


def oracle(name: str):
    """Registers a fast closed-form check; the function returns (passed, detail)."""
    def register(fn):
        ORACLES[name] = fn
        return fn
    return register


def _close(value: float, expected: float, tol: float) -> Tuple[bool, str]:
    return abs(value - expected) <= tol, f"got {value:.10g}, expected {expected:.10g} +- {tol:.1g}"


@oracle("wigner-vacuum-origin")
def _wigner_vacuum():
    space = HilbertSpace((8,))
    return _close(float(wigner(vacuum(space), 0.0)), 2.0 / np.pi, 1e-9)


@oracle("wigner-fock1-origin")
def _wigner_fock1():
    space = HilbertSpace((8,))
    return _close(float(wigner(fock(1, space), 0.0)), -2.0 / np.pi, 1e-9)


@oracle("pcs-eigenvalue")
def _pcs_eigenvalue():
    space = HilbertSpace((20, 20))
    psi = pcs(PcsSpec(2.0), space)
    pair = destroy(space, 0) @ destroy(space, 1)
    residual = float(np.linalg.norm(pair.data @ psi.data - 2.0 * psi.data))
    return residual < 1e-6, f"|(b1 b2 - zeta)|zeta>| = {residual:.3g}"


@oracle("pcs-vacuum-overlap")
def _pcs_vacuum():
    space = HilbertSpace((14, 14))
    return _close(fidelity_pure(vacuum(space), pcs(PcsSpec(2.0), space)), 1.0 / iv(0, 4.0), 1e-9)


@oracle("thermal-entropy")
def _thermal_entropy():
    return _close(entropy(thermal_dm(1.0, HilbertSpace((60,)))), 2.0 * np.log(2.0), 1e-9)


@oracle("tmsv-negativity")
def _tmsv_negativity():
    state = two_mode_squeezed_vacuum(0.5, HilbertSpace((20, 20)))
    return _close(negativity(state), (np.exp(1.0) - 1.0) / 2.0, 1e-3)


@oracle("reid-vacuum")
def _reid_vacuum():
    return _close(reid(vacuum(HilbertSpace((6, 6))), 1, 1), 1.0, 1e-6)


@oracle("rwa-reference-parameters")
def _rwa():
    params = ModelParams(**constants.REFERENCE_MODEL)
    report = check_rwa(params, derive(params))
    return report.passed, f"max ratio {report.max_ratio:.4g}"


@oracle("thermal-occupation")
def _occupation():
    return _close(thermal_occupation(5.0e9, 2.5), 9.93, 0.01)


@oracle("transfer-swap-limit")
def _swap():
    space = HilbertSpace((10, 10))
    psi = pcs(PcsSpec(1.0), space)
    out = transfer(psi, TransferChannel(eta=1.0, sign=1))
    return _close(fidelity_pure(out, psi), 1.0, 1e-9)


@oracle("conditioned-cat")
def _conditioned_cat():
    space = HilbertSpace((20, 20))
    rho, _ = condition(pcs(PcsSpec(2.0), space), 1, 0.0, 0.0)
    return _close(fidelity_pure(rho, cat_even(1j * np.sqrt(2.0), rho.space)), 0.940, 5e-3)


@oracle("dark-state")
def _dark_state():
    params = replace(ModelParams(**constants.REFERENCE_MODEL), gamma_b1=0.0, gamma_b2=0.0)
    derived = derive(params)
    space = HilbertSpace(constants.EFFECTIVE_CUTOFFS)
    rho = steady_state(effective_spec(params, derived, space), sector=(conserved_difference(space), 0.0))
    target = pcs(PcsSpec(derived.zeta), space.subspace([1, 2]))
    fidelity = fidelity_pure(partial_trace(rho, [1, 2]), target)
    return fidelity >= 0.995, f"fidelity {fidelity:.6f}"


@oracle("tensor-product-trace")
def _tensor_trace():
    one = HilbertSpace((5,))
    rho = tensor(thermal_dm(0.5, one), vacuum(one).projector())
    reduced = partial_trace(rho, [0])
    return _close(float(np.abs(reduced.data - thermal_dm(0.5, one).data).max()), 0.0, 1e-12)


def run_selftest() -> Tuple[int, int, List[str]]:
    """Runs every registered oracle; returns (passed, failed, report lines)."""
    start = time.time()
    logger.info(f"Starting selftest with {len(ORACLES)} oracles ...")
    lines, passed, failed = [], 0, 0
    for name, check in ORACLES.items():
        try:
            ok, detail = check()
        except Exception as e:
            ok, detail = False, f"Exception: {type(e).__name__} Message: {str(e)}"
        if ok:
            passed += 1
            lines.append(f"PASS {name}")
        else:
            failed += 1
            lines.append(f"FAIL {name}: {detail}")
            logger.warning(f"Oracle {name} failed: {detail}")
    lines.append(f"{passed} passed, {failed} failed")
    logger.info(f"Selftest complete. Duration: {time.strftime('%H:%M:%S', time.gmtime(time.time() - start))}")
    return passed, failed, lines
