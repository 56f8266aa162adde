""" SPDX-License-Identifier: MIT-0 """

import pytest
import numpy as np

from scipy.special import factorial, iv

from components.fock_core import HilbertSpace, destroy, number
from components.states import (PcsSpec, cat_even, cat_odd, coherent, fidelity_pure, fock, pcs, pcs_mean_phonons,
                               pcs_norm_squared, squeezed_vacuum, thermal_dm, two_mode_squeezed_vacuum, vacuum)


def test_pcs_eigenvalue_relation():
    # b1 b2 |zeta> = zeta |zeta> up to truncation
    space = HilbertSpace((20, 20))
    for zeta in (2.0, 1.2 - 0.7j):
        psi = pcs(PcsSpec(zeta), space)
        pair = destroy(space, 0) @ destroy(space, 1)
        assert np.linalg.norm(pair.data @ psi.data - zeta * psi.data) < 1e-6


def test_pcs_equal_phonon_numbers():
    # Support lies on |n + q, n>; q shifts the first mode
    space = HilbertSpace((12, 12))
    for q in (0, 2):
        psi = pcs(PcsSpec(1.0, q), space)
        difference = (number(space, 0) - number(space, 1)).data @ psi.data
        assert np.allclose(difference, q * psi.data)


def test_pcs_vacuum_overlap():
    # |<0,0|zeta=2>|^2 = 1 / I0(4)
    space = HilbertSpace((14, 14))
    assert np.isclose(fidelity_pure(vacuum(space), pcs(PcsSpec(2.0), space)), 1.0 / iv(0, 4.0), atol=1e-9)


def test_pcs_closed_forms():
    # Normalization series and mean phonon number against the truncated state
    space = HilbertSpace((20, 20))
    psi = pcs(PcsSpec(1.5), space)
    mean = float(np.vdot(psi.data, number(space, 0).data @ psi.data).real)
    assert np.isclose(mean, pcs_mean_phonons(1.5), atol=1e-9)
    n = np.arange(40)
    assert np.isclose(pcs_norm_squared(1.5, 1), np.sum(1.5 ** (2 * n) / (factorial(n) * factorial(n + 1))))
    assert pcs_norm_squared(0.0, 0) == 1.0


def test_pcs_zero_is_vacuum():
    # zeta = 0 gives the two-mode vacuum
    space = HilbertSpace((5, 5))
    assert np.isclose(fidelity_pure(vacuum(space), pcs(PcsSpec(0.0), space)), 1.0)


def test_pcs_rejects_bad_inputs():
    # One-mode spaces, tiny cutoffs and negative offsets are refused
    with pytest.raises(ValueError):
        pcs(PcsSpec(1.0), HilbertSpace((10,)))
    with pytest.raises(ValueError):
        pcs(PcsSpec(1.0), HilbertSpace((3, 3)))
    with pytest.raises(ValueError):
        PcsSpec(1.0, -1)


def test_cat_parity():
    # Even cats live on even Fock states, odd cats on odd ones
    space = HilbertSpace((20,))
    beta = 1j * np.sqrt(2.0)
    even = cat_even(beta, space).populations()
    odd = cat_odd(beta, space).populations()
    assert even[1::2].sum() < 1e-14
    assert odd[0::2].sum() < 1e-14


def test_cat_odd_undefined_at_zero():
    # |0> - |0> cannot be normalized
    with pytest.raises(ValueError):
        cat_odd(0.0, HilbertSpace((6,)))


def test_coherent_mean_number():
    # <n> = |alpha|^2
    space = HilbertSpace((30,))
    psi = coherent(1.1 + 0.4j, space)
    assert np.isclose(np.dot(np.arange(30), psi.populations()), abs(1.1 + 0.4j) ** 2, atol=1e-9)


def test_thermal_and_fock():
    # Thermal populations are geometric with mean nbar; Fock levels are checked against the cutoff
    space = HilbertSpace((80,))
    rho = thermal_dm(2.0, space)
    assert np.isclose(np.dot(np.arange(80), rho.populations()), 2.0, atol=1e-9)
    assert np.isclose(rho.populations()[1] / rho.populations()[0], 2.0 / 3.0)
    with pytest.raises(ValueError):
        fock(5, HilbertSpace((5,)))


def test_tmsv_coefficients():
    # Two-mode squeezed vacuum has amplitudes tanh(r)^n / cosh(r) on |n, n>
    space = HilbertSpace((25, 25))
    psi = two_mode_squeezed_vacuum(0.4, space)
    assert np.isclose(abs(psi.data[0]), 1.0 / np.cosh(0.4), atol=1e-9)
    assert np.isclose(abs(psi.data[25 + 1]), np.tanh(0.4) / np.cosh(0.4), atol=1e-9)


def test_squeezed_vacuum_quadratures():
    # r > 0 shrinks the variance of b + b† to e^{-2r} and stretches its conjugate to e^{2r}
    space = HilbertSpace((40,))
    a = destroy(space, 0).dense()
    x = a + a.conj().T
    y = -1j * (a - a.conj().T)
    for r in (0.5, -0.3):
        psi = squeezed_vacuum(r, space)
        assert np.isclose(np.vdot(psi.data, x @ x @ psi.data).real, np.exp(-2 * r), atol=1e-8)
        assert np.isclose(np.vdot(psi.data, y @ y @ psi.data).real, np.exp(2 * r), atol=1e-8)
    assert squeezed_vacuum(0.0, space).populations()[0] == 1.0


def test_fidelity_space_mismatch():
    # Fidelity needs the target on the same space
    with pytest.raises(ValueError):
        fidelity_pure(vacuum(HilbertSpace((3,))), vacuum(HilbertSpace((4,))))
