""" SPDX-License-Identifier: MIT-0 """

import numpy as np

from typing import Optional, Sequence, Tuple
from scipy.special import eval_genlaguerre, gammaln
from aws_lambda_powertools import Logger

import constants
from components.fock_core import DensityMatrix, State, as_density, check_leakage, partial_trace

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


def displacement_elements(alpha, cutoff: int) -> np.ndarray:
    """Exact <m|D(alpha)|n> for m, n < cutoff; alpha may be an array, giving shape alpha.shape + (cutoff, cutoff)."""
    alpha = np.asarray(alpha, dtype=complex)[..., None, None]
    m = np.arange(cutoff)[:, None]
    n = np.arange(cutoff)[None, :]
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    r2 = np.abs(alpha) ** 2
    phase = np.where(m >= n, np.angle(alpha), np.pi - np.angle(alpha))
    prefactor = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) - r2 / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(k == 0, 1.0, np.abs(alpha) ** k)
    return prefactor * power * np.exp(1j * k * phase) * eval_genlaguerre(lo, k, r2)


def _parity_kernel(xi, cutoff: int) -> np.ndarray:
    # D(xi) P D(xi)† = D(2 xi) P, with P = (-1)^n acting from the right
    return displacement_elements(2.0 * np.asarray(xi), cutoff) * (-1.0) ** np.arange(cutoff)


def _select(rho: State, modes: Optional[Sequence[int]]) -> DensityMatrix:
    rho = as_density(rho)
    if modes is not None and tuple(modes) != tuple(range(rho.space.n_modes)):
        rho = partial_trace(rho, modes)
    if rho.space.n_modes > 2:
        raise ValueError(f"Wigner functions are evaluated for one or two modes, got {rho.space.n_modes}")
    return rho


def _wigner_one(rho: DensityMatrix, xi: np.ndarray) -> np.ndarray:
    kernel = _parity_kernel(xi, rho.space.dims[0])
    return (2.0 / np.pi) * np.einsum("nm,...mn->...", rho.data, kernel).real


def _wigner_two(rho: DensityMatrix, xi1: np.ndarray, xi2: np.ndarray) -> np.ndarray:
    n1, n2 = rho.space.dims
    tensor_form = rho.data.reshape(n1, n2, n1, n2)
    k1 = _parity_kernel(xi1, n1)
    k2 = _parity_kernel(xi2, n2)
    partial = np.einsum("abcd,...ca->...bd", tensor_form, k1)
    return (2.0 / np.pi) ** 2 * np.einsum("...bd,...db->...", partial, k2).real


def wigner(rho: State, points, modes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Displaced-parity Wigner function, normalized to one over d^2 xi per mode.

    points holds one complex phase-space amplitude per mode in its last axis
    (or a plain array of amplitudes for a one-mode state)."""
    rho = _select(rho, modes)
    check_leakage(rho, "wigner")
    points = np.asarray(points, dtype=complex)
    if rho.space.n_modes == 1:
        if points.ndim and points.shape[-1:] == (1,):
            points = points[..., 0]
        return _wigner_one(rho, points)
    if points.shape[-1] != 2:
        raise ValueError(f"Two-mode Wigner points need a trailing axis of length 2, got shape {points.shape}")
    return _wigner_two(rho, points[..., 0], points[..., 1])


def wigner_grid(rho: State, xs, ps) -> np.ndarray:
    """One-mode Wigner map W[i, j] at xi = xs[j] + i ps[i]."""
    rho = _select(rho, None)
    if rho.space.n_modes != 1:
        raise ValueError("wigner_grid needs a one-mode state")
    grid = np.asarray(xs)[None, :] + 1j * np.asarray(ps)[:, None]
    return _wigner_one(rho, grid)


def default_box(rho: State) -> Tuple[float, ...]:
    """Half-width per mode covering +-(2 + 2 sqrt(<n>)) in unit-variance quadratures."""
    rho = as_density(rho)
    widths = []
    for mode in range(rho.space.n_modes):
        marginal = partial_trace(rho, [mode]) if rho.space.n_modes > 1 else rho
        mean_n = float(np.dot(np.arange(marginal.space.dims[0]), marginal.populations()))
        widths.append(1.0 + np.sqrt(max(mean_n, 0.0)))
    return tuple(widths)


def wigner_min(rho: State, box: Optional[Sequence[float]] = None,
               points: int = constants.WIGNER_COARSE_POINTS) -> Tuple[float, Tuple[complex, ...]]:
    """Coarse grid over the box followed by a compass pattern search."""
    rho = _select(rho, None)
    n_modes = rho.space.n_modes
    box = tuple(box) if box is not None else default_box(rho)
    if len(box) != n_modes:
        raise ValueError(f"Search box needs one half-width per mode, got {len(box)} for {n_modes} modes")
    axes = [np.linspace(-w, w, points) for w in box]
    if n_modes == 1:
        grid = axes[0][None, :] + 1j * axes[0][:, None]
        values = _wigner_one(rho, grid)
        i, j = np.unravel_index(np.argmin(values), values.shape)
        best = np.array([axes[0][j], axes[0][i]])
    else:
        plane1 = (axes[0][None, :] + 1j * axes[0][:, None]).reshape(-1)
        plane2 = (axes[1][None, :] + 1j * axes[1][:, None]).reshape(-1)
        values = _wigner_two(rho, plane1[:, None], plane2[None, :])
        i, j = np.unravel_index(np.argmin(values), values.shape)
        best = np.array([plane1[i].real, plane1[i].imag, plane2[j].real, plane2[j].imag])

    def evaluate(coords):
        xi = coords[0::2] + 1j * coords[1::2]
        if n_modes == 1:
            return float(_wigner_one(rho, xi[0]))
        return float(_wigner_two(rho, xi[0], xi[1]))

    value = evaluate(best)
    step = max(2.0 * w / (points - 1) for w in box)
    for _ in range(constants.WIGNER_PATTERN_ITERATIONS):
        improved = False
        for axis in range(len(best)):
            for direction in (1.0, -1.0):
                trial = best.copy()
                trial[axis] += direction * step
                trial_value = evaluate(trial)
                if trial_value < value:
                    best, value, improved = trial, trial_value, True
        if not improved:
            step *= constants.WIGNER_SHRINK
    argmin = tuple(complex(x, p) for x, p in zip(best[0::2], best[1::2]))
    return value, argmin


def characteristic_function(rho: State, etas) -> np.ndarray:
    """chi(eta) = Tr[rho D(eta)] for a one-mode state."""
    rho = _select(rho, None)
    if rho.space.n_modes != 1:
        raise ValueError("characteristic_function needs a one-mode state")
    elements = displacement_elements(np.asarray(etas), rho.space.dims[0])
    return np.einsum("nm,...mn->...", rho.data, elements)


def wigner_fourier(rho: State, xi: complex, extent: float = 10.0, step: float = 0.1) -> float:
    """Wigner value from the Fourier transform of the characteristic function on a square eta grid."""
    axis = np.arange(-extent, extent + step / 2, step)
    etas = axis[None, :] + 1j * axis[:, None]
    chi = characteristic_function(rho, etas)
    kernel = np.exp(xi * etas.conj() - np.conj(xi) * etas)
    return float((chi * kernel).sum().real * step ** 2 / np.pi ** 2)
