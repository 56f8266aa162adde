""" SPDX-License-Identifier: MIT-0 """

import numpy as np

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
from scipy.optimize import minimize_scalar
from scipy.special import gammaln
from aws_lambda_powertools import Logger

import constants
from components.fock_core import State, as_density, partial_trace, quadrature_basis
from components.conditioning import condition_grid

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


def default_grid(extent: float = constants.X_EXTENT, step: float = constants.X_STEP) -> np.ndarray:
    return np.arange(-extent, extent + step / 2, step)


def _ladder_power(cutoff: int, k: int) -> np.ndarray:
    """Truncated b^k as a dense matrix."""
    n = np.arange(k, cutoff)
    out = np.zeros((cutoff, cutoff))
    if k < cutoff:
        out[n - k, n] = np.exp(0.5 * (gammaln(n + 1) - gammaln(n - k + 1)))
    return out


def _normal_weights(cutoff: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    # <n| b^m b†^m |n> and <n| b†^m b^m |n>, exact beyond the cutoff
    n = np.arange(cutoff)
    raising = np.exp(gammaln(n + m + 1) - gammaln(n + 1))
    with np.errstate(invalid="ignore"):
        lowering = np.where(n >= m, np.exp(gammaln(n + 1) - gammaln(np.maximum(n - m, 0) + 1)), 0.0)
    return raising, lowering


def _quadrature_moments(sigma: np.ndarray, m: int):
    """Unnormalized first and second moments of X = (b^m + b†^m)/2 and Y = -i(b^m - b†^m)/2.

    sigma has shape (..., N, N); returns (weight, <X>, <Y>, <X^2>, <Y^2>) each of shape sigma.shape[:-2]."""
    cutoff = sigma.shape[-1]
    populations = np.einsum("...ii->...i", sigma).real
    raising, lowering = _normal_weights(cutoff, m)
    diagonal = populations @ (raising + lowering)
    bm = np.einsum("...ij,ji->...", sigma, _ladder_power(cutoff, m))
    b2m = np.einsum("...ij,ji->...", sigma, _ladder_power(cutoff, 2 * m))
    weight = populations.sum(axis=-1)
    return weight, bm.real, bm.imag, (2 * b2m.real + diagonal) / 4, (-2 * b2m.real + diagonal) / 4


def _averaged_variance(weight, first, second, spacing: float = 1.0) -> float:
    keep = weight > constants.DENSITY_FLOOR
    total = weight[keep].sum() * spacing
    spread = (second[keep] - first[keep] ** 2 / weight[keep]).sum() * spacing
    return float(spread / total)


def _check_normalization(total: float, label: str):
    if abs(total - 1.0) > constants.GRID_NORMALIZATION_TOL:
        raise ValueError(f"{label} grid does not resolve the distribution: integral {total:.6f}")


def _eigen_outcomes(rho_tensor: np.ndarray, operator: np.ndarray) -> np.ndarray:
    """Unnormalized conditional states of mode 0 for each distinct eigenvalue of operator on mode 1."""
    values, vectors = np.linalg.eigh(operator)
    blocks = []
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and values[stop] - values[start] < 1e-9:
            stop += 1
        group = vectors[:, start:stop]
        blocks.append(np.einsum("kv,ikjl,lv->ij", group.conj(), rho_tensor, group))
        start = stop
    return np.array(blocks)


def reid(rho: State, m: int = 1, n: int = 1, grid: Optional[Sequence[float]] = None) -> float:
    """Generalized Reid product 2 sqrt(V_X V_Y) / |<[X1, Y1]>|; steering is witnessed below 1.

    Mode 1 is measured in X2^(n) for the X inference and in Y2^(n) for the Y inference; order-1
    measurements are continuous homodyne on grid, higher orders use the eigenbasis of the
    truncated operator."""
    rho = as_density(rho)
    if rho.space.n_modes != 2:
        raise ValueError(f"reid needs a two-mode state, got {rho.space.n_modes} modes")
    if m not in (1, 2, 3) or n not in (1, 2, 3):
        raise ValueError(f"Reid orders must lie in {{1, 2, 3}}, got m={m}, n={n}")
    n1, n2 = rho.space.dims

    raising, lowering = _normal_weights(n1, m)
    populations = partial_trace(rho, [0]).populations()
    denominator = 0.5 * abs(float(populations @ (raising - lowering)))
    if denominator < 1e-10:
        raise ValueError("commutator expectation vanishes")

    if n == 1:
        xs = default_grid() if grid is None else np.asarray(grid, dtype=float)
        dx = float(xs[1] - xs[0])
        variances = []
        for theta, pick in ((0.0, 1), (np.pi / 2, 2)):
            sigma, densities = condition_grid(rho, 1, theta, xs)
            _check_normalization(densities.sum() * dx, "Reid homodyne")
            moments = _quadrature_moments(sigma, m)
            variances.append(_averaged_variance(moments[0], moments[pick], moments[pick + 2], dx))
    else:
        tensor_form = rho.data.reshape(n1, n2, n1, n2)
        power = _ladder_power(n2, n)
        x_op = (power + power.T) / 2
        y_op = -1j * (power - power.T) / 2
        variances = []
        for operator, pick in ((x_op, 1), (y_op, 2)):
            sigma = _eigen_outcomes(tensor_form, operator)
            moments = _quadrature_moments(sigma, m)
            variances.append(_averaged_variance(moments[0], moments[pick], moments[pick + 2]))

    value = 2.0 * np.sqrt(variances[0] * variances[1]) / denominator
    logger.debug(f"Reid E_r({m},{n}) = {value:.6g} (V_X={variances[0]:.6g}, V_Y={variances[1]:.6g})")
    return float(value)


def classical_fisher_information(p, dx: float, axis: int = 0) -> np.ndarray:
    """CFI of the shift family P(x - xi) sampled on a uniform grid: integral of (dP/dx)^2 / P."""
    p = np.asarray(p, dtype=float)
    slope = np.gradient(p, dx, axis=axis)
    keep = p > constants.DENSITY_FLOOR
    ratio = np.where(keep, slope ** 2 / np.where(keep, p, 1.0), 0.0)
    return ratio.sum(axis=axis) * dx


@dataclass(frozen=True)
class FisherScan:
    thetas: np.ndarray
    F_profile: np.ndarray
    V_profile: np.ndarray
    theta_f: float
    F_hom: float
    theta_v: float
    V_hom: float

    @property
    def E_f(self) -> float:
        return max(0.0, self.F_hom - 4.0 * self.V_hom)


def _homodyne_fisher(rho, theta: float, x2s: np.ndarray, kernel1: np.ndarray, dx1: float) -> float:
    sigma, densities = condition_grid(rho, 1, theta, x2s)
    dx2 = float(x2s[1] - x2s[0])
    joint = np.einsum("yi,xij,yj->xy", kernel1, sigma, kernel1.conj(), optimize=True).real
    _check_normalization(joint.sum() * dx1 * dx2, "Fisher homodyne")
    return float(classical_fisher_information(joint, dx1, axis=1).sum() * dx2)


def _homodyne_variance(rho, theta: float, x2s: np.ndarray) -> float:
    # Y1 = -i(b1 - b1†)/2 generates the shift of b1 + b1† outcomes
    sigma, densities = condition_grid(rho, 1, theta, x2s)
    weight, _, mean_y, _, second_y = _quadrature_moments(sigma, 1)
    return _averaged_variance(weight, mean_y, second_y, float(x2s[1] - x2s[0]))


def _refine(profile_fn, thetas: np.ndarray, values: np.ndarray, best: int, sign: float) -> Tuple[float, float]:
    spacing = thetas[1] - thetas[0]
    center = thetas[best]
    result = minimize_scalar(lambda t: sign * profile_fn(t), bounds=(center - spacing, center + spacing),
                             method="bounded", options={"xatol": constants.THETA_XATOL})
    if result.fun > sign * values[best]:
        return float(center), float(values[best])
    return float(result.x % np.pi), float(sign * result.fun)


def fisher_scan(rho: State, thetas: Optional[Sequence[float]] = None,
                x1s: Optional[Sequence[float]] = None, x2s: Optional[Sequence[float]] = None) -> FisherScan:
    """Outcome-averaged CFI and conditional variance of b1 quadratures across homodyne angles on b2.

    The CFI is that of the shift family of b1 + b1† outcomes and the variance is that of its
    generator -i(b1 - b1†)/2, so F_hom <= 4 V_hom for every state without b1-b2 correlations."""
    rho = as_density(rho)
    if rho.space.n_modes != 2:
        raise ValueError(f"fisher_scan needs a two-mode state, got {rho.space.n_modes} modes")
    thetas = (np.linspace(0.0, np.pi, constants.THETA_POINTS, endpoint=False)
              if thetas is None else np.asarray(thetas, dtype=float))
    x1s = default_grid() if x1s is None else np.asarray(x1s, dtype=float)
    x2s = default_grid() if x2s is None else np.asarray(x2s, dtype=float)
    dx1 = float(x1s[1] - x1s[0])
    kernel1 = quadrature_basis(rho.space.dims[0], x1s)

    def fisher_at(theta):
        return _homodyne_fisher(rho, theta, x2s, kernel1, dx1)

    def variance_at(theta):
        return _homodyne_variance(rho, theta, x2s)

    f_profile = np.array([fisher_at(t) for t in thetas])
    v_profile = np.array([variance_at(t) for t in thetas])
    if len(thetas) > 1:
        theta_f, f_hom = _refine(fisher_at, thetas, f_profile, int(np.argmax(f_profile)), -1.0)
        theta_v, v_hom = _refine(variance_at, thetas, v_profile, int(np.argmin(v_profile)), 1.0)
    else:
        theta_f, f_hom = float(thetas[0]), float(f_profile[0])
        theta_v, v_hom = float(thetas[0]), float(v_profile[0])
    return FisherScan(thetas=thetas, F_profile=f_profile, V_profile=v_profile,
                      theta_f=theta_f, F_hom=f_hom, theta_v=theta_v, V_hom=v_hom)


def fisher_steering(rho: State, thetas: Optional[Sequence[float]] = None,
                    x1s: Optional[Sequence[float]] = None, x2s: Optional[Sequence[float]] = None) -> float:
    scan = fisher_scan(rho, thetas, x1s, x2s)
    logger.debug(f"Fisher steering: F_hom={scan.F_hom:.6g} at {scan.theta_f:.4f}, "
                 f"V_hom={scan.V_hom:.6g} at {scan.theta_v:.4f}")
    return scan.E_f
