""" SPDX-License-Identifier: MIT-0 """

import pytest
import numpy as np

from dataclasses import replace

import constants
from components.fock_core import HilbertSpace, create, destroy, displacement, identity
from components.model import (ModelParams, TransferParams, build_h2, build_h_eff, build_h_frame1,
                              build_h_transfer, check_rwa, derive, lock_zeta_phase, thermal_occupation,
                              thermal_temperature, with_zeta)


def reference_params(**changes) -> ModelParams:
    return replace(ModelParams(**constants.REFERENCE_MODEL), **changes)


def test_derived_parameters():
    # Cavity amplitude, polaron shifts, Kerr and downconversion couplings of the shipped parameter set
    derived = derive(reference_params())
    assert np.isclose(abs(derived.alpha), 0.631192, atol=1e-6)
    assert np.isclose(derived.r1, 0.045)
    assert np.isclose(derived.r2, 0.055 / 1.5)
    assert np.isclose(derived.g0, -0.0040417, atol=1e-7)
    assert np.isclose(derived.Delta_tilde, 2.49998, atol=1e-5)
    assert np.isclose(abs(derived.g), 0.0026037, atol=1e-7)
    assert np.isclose(abs(derived.zeta), 2.00407, atol=1e-4)


def test_invalid_parameters():
    # Rates and frequencies are validated on construction
    with pytest.raises(ValueError, match="gamma_a"):
        reference_params(gamma_a=0.0)
    with pytest.raises(ValueError, match="omega_b2"):
        reference_params(omega_b2=1.0)
    with pytest.raises(ValueError, match="nbar_b1"):
        reference_params(nbar_b1=-1.0)
    with pytest.raises(ValueError, match="finite"):
        reference_params(g1=float("nan"))


def test_vanishing_coupling():
    # Without pump or dispersive coupling zeta is undefined
    with pytest.raises(ValueError, match="vanishes"):
        derive(reference_params(eps_p=0.0))


def test_with_zeta_and_phase_lock():
    # eps_d = -zeta g selects the requested zeta; the phase lock keeps |eps_d| and makes zeta real
    assert np.isclose(derive(with_zeta(reference_params(), 1.5)).zeta, 1.5)
    locked = lock_zeta_phase(reference_params())
    zeta = derive(locked).zeta
    assert abs(zeta.imag) < 1e-12 and zeta.real > 0
    assert np.isclose(abs(locked.eps_d), abs(reference_params().eps_d))


def test_rwa_report():
    # Sixteen ratios; the shipped parameters pass and strong couplings fail
    params = reference_params()
    report = check_rwa(params, derive(params))
    assert len(report.ratios) == 16
    assert report.passed
    assert np.isclose(report.max_ratio, 0.0438, atol=1e-3)
    strong = reference_params(g1=0.5, g2=0.5)
    assert not check_rwa(strong, derive(strong)).passed


def test_hamiltonians_are_hermitian():
    # Every builder returns Hermitian operators
    params = reference_params()
    derived = derive(params)
    space = HilbertSpace((3, 4, 4))
    assert build_h_eff(params, derived, space).hermiticity_error() < 1e-12
    assert build_h_frame1(params, space).at(3.7).hermiticity_error() < 1e-12
    assert build_h2(params, space).at(1.1).hermiticity_error() < 1e-12
    transfer = TransferParams(**constants.REFERENCE_TRANSFER)
    assert build_h_transfer(transfer, HilbertSpace((4, 4))).hermiticity_error() < 1e-12


def test_cavity_space_required():
    # Optomechanical builders need the three modes (a, b1, b2)
    with pytest.raises(ValueError):
        build_h2(reference_params(), HilbertSpace((3, 3)))


def test_displaced_frame_identity():
    # D(-alpha) H1 D(alpha) - H2 is linear in the cavity ladder operators plus a constant
    params = reference_params()
    alpha = derive(params).alpha
    space = HilbertSpace((30, 3, 3))
    d = displacement(space, 0, alpha)
    lhs = (d.dag() @ build_h_frame1(params, space).static @ d) - build_h2(params, space).static
    a = destroy(space, 0)
    constant = params.Delta * abs(alpha) ** 2 + 2 * (params.eps_p * alpha.conjugate()).real
    rhs = (params.Delta * (alpha.conjugate() * a + alpha * a.dag()) + params.eps_p * create(space, 0)
           + params.eps_p.conjugate() * a + constant * identity(space))
    kept = np.flatnonzero(np.arange(space.total) // 9 < 8)
    diff = (lhs - rhs).dense()[np.ix_(kept, kept)]
    assert np.abs(diff).max() < 1e-9


def test_drive_term_is_time_dependent():
    # The weak drive oscillates at Delta_p in the rotating frame
    params = reference_params()
    spec = build_h_frame1(params, HilbertSpace((3, 3, 3)))
    assert not spec.is_static
    assert build_h_frame1(reference_params(eps_d=0.0), HilbertSpace((3, 3, 3))).is_static
    period = 2 * np.pi / abs(params.Delta_p)
    assert np.allclose(spec.at(0.3).dense(), spec.at(0.3 + period).dense())


def test_transfer_parameters():
    # Adiabatic ratio and pulse decay of the shipped readout cavity
    tp = TransferParams(**constants.REFERENCE_TRANSFER)
    assert np.isclose(tp.adiabatic_ratio, 0.133, atol=2e-3)
    assert np.isclose(tp.decay, 0.018, atol=2e-3)
    assert np.isclose(tp.eta, 1.0 - tp.decay ** 2)
    with pytest.raises(ValueError):
        TransferParams(g_t=0.01, gamma_t=0.0, eps_p2=1.0, Delta_t=1.0, tau=10.0)


def test_thermal_occupation_round_trip():
    # Bose-Einstein occupation and its inverse
    nbar = thermal_occupation(5.0e9, 2.5)
    assert np.isclose(nbar, 9.93, atol=0.01)
    assert np.isclose(thermal_temperature(5.0e9, nbar), 2.5)
    assert thermal_temperature(5.0e9, 0.0) == 0.0
    with pytest.raises(ValueError):
        thermal_occupation(5.0e9, 0.0)
