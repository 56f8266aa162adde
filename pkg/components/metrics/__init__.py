""" SPDX-License-Identifier: MIT-0 """

import math
import numpy as np

from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple
from scipy.special import entr, xlogy
from aws_lambda_powertools import Logger

import constants
from components.fock_core import State, as_density, destroy, number, partial_transpose

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)

ENTROPY_FLOOR = 1e-14


def entropy(rho: State) -> float:
    """Von Neumann entropy in nats."""
    values = np.clip(np.linalg.eigvalsh(as_density(rho).data), ENTROPY_FLOOR, 1.0)
    return float(entr(values).sum())


def _symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceData:
    """First and second moments of R = (x1, p1, x2, p2) with x = b + b†, p = -i(b - b†); vacuum V = I."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape[0] % 2 or cov.shape != (cov.shape[0], cov.shape[0]):
            raise ValueError(f"Covariance matrix must be 2M x 2M, got {cov.shape}")
        uncertainty = cov + 1j * _symplectic_form(cov.shape[0] // 2)
        lowest = np.linalg.eigvalsh(uncertainty).min()
        if lowest < -1e-8:
            raise ValueError(f"Covariance violates the uncertainty relation (eigenvalue {lowest:.3g})")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))


# Coefficients of (b, b†) in x and p
_QUADRATURES = ((1.0, 1.0), (-1j, 1j))


def covariance(rho: State) -> CovarianceData:
    """Moments from exact ladder-operator expectations; b b† is taken as b†b + 1 to avoid the cutoff artifact."""
    rho = as_density(rho)
    space = rho.space
    n_modes = space.n_modes
    ladders = []
    for mode in range(n_modes):
        b = destroy(space, mode)
        ladders.append((b, b.dag()))

    def moment(mode_i, s_i, mode_j, s_j):
        if mode_i == mode_j:
            n = rho.expect(number(space, mode_i)).real
            if (s_i, s_j) == (0, 1):
                return n + 1.0
            if (s_i, s_j) == (1, 0):
                return n
        return rho.expect(ladders[mode_i][s_i] @ ladders[mode_j][s_j])

    first = [[rho.expect(ladders[m][s]) for s in (0, 1)] for m in range(n_modes)]
    labels = [(m, q) for m in range(n_modes) for q in range(2)]
    mean = np.array([sum(_QUADRATURES[q][s] * first[m][s] for s in (0, 1)).real for m, q in labels])
    cov = np.zeros((2 * n_modes, 2 * n_modes))
    for i, (mi, qi) in enumerate(labels):
        for j, (mj, qj) in enumerate(labels):
            if j < i:
                continue
            product = 0.0
            for si in (0, 1):
                for sj in (0, 1):
                    coeff = _QUADRATURES[qi][si] * _QUADRATURES[qj][sj]
                    product += coeff * 0.5 * (moment(mi, si, mj, sj) + moment(mj, sj, mi, si))
            cov[i, j] = cov[j, i] = product.real - mean[i] * mean[j]
    return CovarianceData(mean=mean, cov=cov)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    values = np.abs(np.linalg.eigvals(1j * _symplectic_form(cov.shape[0] // 2) @ cov))
    return np.sort(values)[::2]


def _gaussian_entropy(nu: float) -> float:
    plus, minus = (nu + 1.0) / 2.0, (nu - 1.0) / 2.0
    return float(xlogy(plus, plus) - xlogy(minus, minus))


def nongaussianity(rho: State) -> float:
    """Relative-entropy non-Gaussianity S(rho_G) - S(rho) against the Gaussian state with the same moments."""
    rho = as_density(rho)
    nus = symplectic_eigenvalues(covariance(rho).cov)
    if nus.min() < 1.0 - 1e-6:
        raise ValueError(f"Unphysical covariance: symplectic eigenvalue {nus.min():.8g} < 1")
    s_gauss = sum(_gaussian_entropy(max(nu, 1.0)) for nu in nus)
    return float(s_gauss - entropy(rho))


def negativity(rho: State) -> float:
    """(||rho^PT||_1 - 1) / 2 for a two-mode state."""
    rho = as_density(rho)
    values = np.linalg.eigvalsh(partial_transpose(rho, 1))
    return float(max(0.0, (np.abs(values).sum() - 1.0) / 2.0))


METRIC_COLUMNS = ("F", "R_r", "W_min", "N", "E_r_11", "E_r_22", "E_r_33", "E_f",
                  "F_cat", "F_cat_nominal", "W_min_cat", "leakage", "leakage_warning")


@dataclass
class MetricsRecord:
    """One result row; metrics that were not evaluated stay NaN."""

    parameters: Dict[str, float]
    F: float = math.nan
    R_r: float = math.nan
    W_min: float = math.nan
    N: float = math.nan
    E_r: Dict[Tuple[int, int], float] = field(default_factory=dict)
    E_f: float = math.nan
    F_cat: float = math.nan
    F_cat_nominal: float = math.nan
    W_min_cat: float = math.nan
    leakage: float = 0.0

    def __post_init__(self):
        for name in ("F", "F_cat", "F_cat_nominal"):
            value = getattr(self, name)
            if not math.isnan(value) and not -1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        for name in ("N", "E_f"):
            value = getattr(self, name)
            if not math.isnan(value) and value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    @property
    def leakage_warning(self) -> bool:
        return self.leakage > constants.LEAKAGE_THRESHOLD

    def to_row(self, columns: Sequence[str] = METRIC_COLUMNS) -> Dict[str, float]:
        row = dict(self.parameters)
        for column in columns:
            if column.startswith("E_r_"):
                key = (int(column[-2]), int(column[-1]))
                row[column] = self.E_r.get(key, math.nan)
            elif column == "leakage_warning":
                row[column] = int(self.leakage_warning)
            else:
                row[column] = getattr(self, column)
        return row


from components.metrics.wigner import (characteristic_function, displacement_elements,  # noqa: E402
                                       wigner, wigner_fourier, wigner_grid, wigner_min)
from components.metrics.steering import (FisherScan, classical_fisher_information,  # noqa: E402
                                         fisher_scan, fisher_steering, reid)
