""" SPDX-License-Identifier: MIT-0 """

import pytest
import numpy as np

from dataclasses import replace

import constants
from components.fock_core import DensityMatrix, HilbertSpace, partial_trace, tensor, trace_distance
from components.model import TransferParams
from components.states import PcsSpec, coherent, fidelity_pure, pcs, thermal_dm, two_mode_squeezed_vacuum, vacuum
from components.conditioning import (TransferChannel, channel_from_params, condition, condition_grid,
                                     homodyne_kernel, kraus_operators, transfer)
from components.conditioning.cat import cat_axis, cat_fidelity, prepare_cat


def test_homodyne_kernel_shape():
    # The partial bra removes one mode from the row dimension
    space = HilbertSpace((3, 4))
    assert homodyne_kernel(space, 1, 0.0, 0.2).shape == (3, 12)
    assert homodyne_kernel(space, 0, 0.0, 0.2).shape == (4, 12)


def test_conditioning_a_product_state():
    # Measuring an uncorrelated mode leaves the other mode unchanged
    one = HilbertSpace((12,))
    rho = tensor(coherent(0.5j, one), thermal_dm(0.4, one))
    conditioned, density = condition(rho, 1, 0.3, 0.7)
    assert trace_distance(conditioned, coherent(0.5j, one).projector()) < 1e-10
    assert density > 0


def test_outcome_densities_integrate_to_one():
    # Summing the outcome densities over a fine grid recovers unit probability
    xs = np.arange(-10.0, 10.0, 0.05)
    _, densities = condition_grid(two_mode_squeezed_vacuum(0.4, HilbertSpace((20, 20))), 0, 1.1, xs)
    assert np.isclose(densities.sum() * 0.05, 1.0, atol=1e-6)


def test_outcome_in_null_set():
    # Outcomes far in the tails carry no probability
    with pytest.raises(ValueError, match="null set"):
        condition(vacuum(HilbertSpace((4, 4))), 1, 0.0, 40.0)


def test_kraus_completeness():
    # The readout is trace preserving on the truncated mode
    ops = kraus_operators(TransferChannel(eta=0.7), 8)
    total = sum(ops[:, m, :].conj().T @ ops[:, m, :] for m in range(8))
    assert np.allclose(total, np.eye(8), atol=1e-10)


def test_transfer_choi_matrix_is_positive():
    # The readout applied to half of a maximally entangled pair gives a valid Choi state
    cutoff = 6
    space = HilbertSpace((cutoff, cutoff))
    phi = np.eye(cutoff).reshape(-1) / np.sqrt(cutoff)
    for channel in (TransferChannel(eta=0.7), channel_from_params(TransferParams(**constants.REFERENCE_TRANSFER))):
        choi = transfer(DensityMatrix(space, np.outer(phi, phi.conj())), channel)
        assert np.linalg.eigvalsh(choi.data).min() > -1e-10
        assert np.allclose(partial_trace(choi, [0]).data, np.eye(cutoff) / cutoff, atol=1e-10)


def test_conditional_states_average_to_reduced_state():
    # Weighting every conditional state by its outcome density recovers the unmeasured reduced state
    dx = 0.05
    xs = np.arange(-10.0, 10.0, dx)
    rho = pcs(PcsSpec(1.0), HilbertSpace((12, 12)))
    sigma, densities = condition_grid(rho, 1, 0.4, xs)
    states = sigma / densities[:, None, None]
    rebuilt = np.einsum("x,xij->ij", densities * dx, states)
    diff = rebuilt - partial_trace(rho, [0]).data
    assert 0.5 * np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum() < 1e-3


def test_transfer_limits():
    # eta = 0 leaves the state alone; eta = 1 swaps b2 out with the chosen sign
    space = HilbertSpace((12, 12))
    psi = pcs(PcsSpec(1.5), space)
    assert trace_distance(transfer(psi, TransferChannel(eta=0.0)), psi.projector()) < 1e-10
    assert fidelity_pure(transfer(psi, TransferChannel(eta=1.0, sign=1)), psi) > 1 - 1e-9
    flipped = transfer(psi, TransferChannel(eta=1.0, sign=-1))
    assert fidelity_pure(flipped, pcs(PcsSpec(-1.5), space)) > 1 - 1e-9


def test_transfer_with_losses():
    # A 98 percent efficient readout keeps most of the pair-coherent state
    space = HilbertSpace((16, 16))
    out = transfer(pcs(PcsSpec(2.0), space), TransferChannel(eta=0.98))
    assert np.isclose(fidelity_pure(out, pcs(PcsSpec(-2.0), space)), 0.9656, atol=5e-3)


def test_transfer_channel_validation():
    # eta lies in [0, 1] and the sign is +-1
    with pytest.raises(ValueError):
        TransferChannel(eta=1.2)
    with pytest.raises(ValueError):
        TransferChannel(eta=0.5, sign=0)
    tp = TransferParams(**constants.REFERENCE_TRANSFER)
    assert channel_from_params(tp).eta == pytest.approx(tp.eta)
    with pytest.raises(ValueError):
        channel_from_params(replace(tp, g_t=0.0))


def test_cat_axis():
    # The cat amplitude lies along i zeta
    assert cat_axis(0.0) == 1j
    assert cat_axis(2.0) == 1j
    assert np.isclose(cat_axis(1j), -1.0)


def test_cat_fidelity_of_conditioned_pcs():
    # Detecting x = 0 on one mode of PCS(2) leaves a near-even cat
    rho, _ = condition(pcs(PcsSpec(2.0), HilbertSpace((20, 20))), 1, 0.0, 0.0)
    best, nominal, beta = cat_fidelity(rho, 2.0)
    assert 0.93 <= nominal <= 0.95
    assert 0.965 <= best <= 0.985
    assert abs(beta.real) < 1e-9
    assert 1.4 < abs(beta) ** 2 < 1.8
    with pytest.raises(ValueError):
        cat_fidelity(pcs(PcsSpec(2.0), HilbertSpace((6, 6))), 2.0)


def test_prepare_cat_with_ideal_readout():
    # Even parity survives and the cat is Wigner-negative
    result = prepare_cat(pcs(PcsSpec(2.0), HilbertSpace((16, 16))), TransferChannel(eta=1.0), 2.0)
    assert result.rho_cat.populations()[1::2].sum() < 1e-3
    assert 0.965 <= result.fidelity <= 0.985
    assert result.wigner_min < 0
    assert result.density > 0


def test_prepare_cat_with_readout_cavity():
    # The shipped readout cavity passes both readout checks
    result = prepare_cat(pcs(PcsSpec(2.0), HilbertSpace((16, 16))), TransferParams(**constants.REFERENCE_TRANSFER), 2.0)
    assert result.fidelity > 0.9


def test_prepare_cat_readout_checks():
    # A strongly coupled or too short readout pulse is rejected
    rho = pcs(PcsSpec(1.0), HilbertSpace((8, 8)))
    tp = TransferParams(**constants.REFERENCE_TRANSFER)
    with pytest.raises(ValueError, match="adiabatic"):
        prepare_cat(rho, replace(tp, gamma_t=0.015), 1.0)
    with pytest.raises(ValueError, match="too short"):
        prepare_cat(rho, replace(tp, tau=100.0), 1.0)
