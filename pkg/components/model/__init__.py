""" SPDX-License-Identifier: MIT-0 """

import numpy as np

from dataclasses import dataclass, replace, field
from typing import Dict, Tuple
from scipy.constants import h, k as k_B
from aws_lambda_powertools import Logger

import constants
from components.fock_core import HilbertSpace, Operator, create, destroy, identity, number

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the two-membrane optomechanical cavity.

    Frequencies and rates are in units of omega_b1; eps_p and eps_d may be complex."""

    omega_b2: float
    g1: float
    g2: float
    eps_p: complex
    eps_d: complex
    Delta: float
    Delta_p: float
    gamma_a: float
    gamma_b1: float
    gamma_b2: float
    omega_b1: float = 1.0
    nbar_b1: float = 0.0
    nbar_b2: float = 0.0

    def __post_init__(self):
        for name in ("omega_b1", "omega_b2", "g1", "g2", "Delta", "Delta_p",
                     "gamma_a", "gamma_b1", "gamma_b2", "nbar_b1", "nbar_b2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        for name in ("eps_p", "eps_d"):
            value = complex(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.omega_b1 <= 0 or self.omega_b2 <= 0:
            raise ValueError(f"omega_b1 and omega_b2 must be positive, got {self.omega_b1}, {self.omega_b2}")
        if self.omega_b1 == self.omega_b2:
            raise ValueError("omega_b2 must differ from omega_b1 (nondegenerate mechanics)")
        if self.gamma_a <= 0:
            raise ValueError(f"gamma_a must be positive, got {self.gamma_a}")
        for name in ("gamma_b1", "gamma_b2", "nbar_b1", "nbar_b2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    def omega(self, j: int) -> float:
        return self.omega_b1 if j == 1 else self.omega_b2

    def coupling(self, j: int) -> float:
        return self.g1 if j == 1 else self.g2

    def damping(self, j: int) -> float:
        return self.gamma_b1 if j == 1 else self.gamma_b2

    def nbar(self, j: int) -> float:
        return self.nbar_b1 if j == 1 else self.nbar_b2


@dataclass(frozen=True)
class DerivedParams:
    alpha: complex
    r1: float
    r2: float
    g0: float
    g: complex
    Delta_tilde: float
    zeta: complex

    @property
    def n_cavity(self) -> float:
        return abs(self.alpha) ** 2


def derive_alpha(params: ModelParams) -> complex:
    return complex(params.eps_p / (1j * params.gamma_a - params.Delta))


def derive(params: ModelParams) -> DerivedParams:
    alpha = derive_alpha(params)
    r1 = params.g1 / params.omega_b1
    r2 = params.g2 / params.omega_b2
    g0 = -(r1 * params.g1 + r2 * params.g2)
    g = -alpha * (r1 * params.g2 + r2 * params.g1)
    if g == 0:
        raise ValueError("Downconversion coupling g vanishes (eps_p = 0 or g1 = g2 = 0); zeta is undefined")
    delta_tilde = params.Delta + 2.0 * abs(alpha) ** 2 * g0
    zeta = -params.eps_d / g
    offset = delta_tilde - (params.omega_b1 + params.omega_b2)
    if abs(offset) > 1e-2 * params.omega_b1:
        logger.debug(f"Shifted detuning {delta_tilde:.6g} is off the two-phonon resonance by {offset:.3g}")
    return DerivedParams(alpha=complex(alpha), r1=r1, r2=r2, g0=g0, g=complex(g),
                         Delta_tilde=delta_tilde, zeta=complex(zeta))


def with_zeta(params: ModelParams, zeta: complex) -> ModelParams:
    derived = derive(params)
    return replace(params, eps_d=complex(-zeta * derived.g))


def lock_zeta_phase(params: ModelParams) -> ModelParams:
    derived = derive(params)
    return replace(params, eps_d=complex(-abs(params.eps_d) * derived.g / abs(derived.g)))


@dataclass(frozen=True)
class TransferParams:
    """Readout cavity used to read mechanical mode b2 out into a travelling field."""

    g_t: float
    gamma_t: float
    eps_p2: complex
    Delta_t: float
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "eps_p2", complex(self.eps_p2))
        if self.gamma_t <= 0:
            raise ValueError(f"gamma_t must be positive, got {self.gamma_t}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.g_t < 0:
            raise ValueError(f"g_t must be >= 0, got {self.g_t}")

    @property
    def alpha_t(self) -> complex:
        return self.eps_p2 / (1j * self.gamma_t - self.Delta_t)

    @property
    def g_tilde(self) -> complex:
        return -1j * self.g_t * self.alpha_t.conjugate()

    @property
    def G(self) -> float:
        # kappa in G = |g~|^2 / kappa is the readout cavity linewidth gamma_t
        return abs(self.g_tilde) ** 2 / self.gamma_t

    @property
    def decay(self) -> float:
        return float(np.exp(-self.G * self.tau))

    @property
    def eta(self) -> float:
        return float(-np.expm1(-2.0 * self.G * self.tau))

    @property
    def adiabatic_ratio(self) -> float:
        return abs(self.g_tilde) / self.gamma_t


@dataclass(frozen=True)
class HarmonicTerm:
    """amplitude * operator * exp(i frequency t) plus its Hermitian conjugate."""

    operator: Operator
    amplitude: complex
    frequency: float

    def at(self, t: float) -> Operator:
        term = self.operator * (self.amplitude * np.exp(1j * self.frequency * t))
        return term + term.dag()


@dataclass(frozen=True)
class HamiltonianSpec:
    static: Operator
    terms: Tuple[HarmonicTerm, ...] = field(default_factory=tuple)

    @property
    def space(self) -> HilbertSpace:
        return self.static.space

    @property
    def is_static(self) -> bool:
        return not self.terms

    def at(self, t: float) -> Operator:
        total = self.static
        for term in self.terms:
            total = total + term.at(t)
        return total


@dataclass(frozen=True)
class ConditionReport:
    ratios: Dict[str, float]
    threshold: float
    max_ratio: float
    passed: bool


def _check_cavity_space(space: HilbertSpace):
    if space.n_modes != 3:
        raise ValueError(f"Optomechanical Hamiltonians need modes (a, b1, b2), got {space.n_modes} modes")


def _drive_terms(params: ModelParams, space: HilbertSpace) -> Tuple[HarmonicTerm, ...]:
    if params.eps_d == 0:
        return ()
    return (HarmonicTerm(create(space, 0), params.eps_d, params.Delta_p),)


def build_h_frame1(params: ModelParams, space: HilbertSpace) -> HamiltonianSpec:
    """Hamiltonian in the frame rotating at the pump frequency."""
    _check_cavity_space(space)
    a = destroy(space, 0)
    n_a = number(space, 0)
    static = params.Delta * n_a
    for j in (1, 2):
        b = destroy(space, j)
        static = static + params.omega(j) * number(space, j)
        static = static + params.coupling(j) * (n_a @ (b + b.dag()))
    static = static + params.eps_p * a.dag() + params.eps_p.conjugate() * a
    return HamiltonianSpec(static, _drive_terms(params, space))


def build_h2(params: ModelParams, space: HilbertSpace) -> HamiltonianSpec:
    """Hamiltonian after displacing the cavity by its steady amplitude alpha.

    The pump term cancels against the displaced cavity dissipator, leaving only
    the dispersive coupling and its linearized part around alpha."""
    _check_cavity_space(space)
    alpha = derive_alpha(params)
    a = destroy(space, 0)
    n_a = number(space, 0)
    shifted = n_a + alpha.conjugate() * a + alpha * a.dag() + abs(alpha) ** 2 * identity(space)
    static = params.Delta * n_a
    for j in (1, 2):
        b = destroy(space, j)
        static = static + params.omega(j) * number(space, j)
        static = static + params.coupling(j) * (shifted @ (b + b.dag()))
    return HamiltonianSpec(static, _drive_terms(params, space))


def build_h_eff(params: ModelParams, derived: DerivedParams, space: HilbertSpace) -> Operator:
    _check_cavity_space(space)
    if not np.isfinite(derived.zeta):
        raise ValueError(f"zeta must be finite, got {derived.zeta}")
    a = destroy(space, 0)
    n_a = number(space, 0)
    pair = destroy(space, 1) @ destroy(space, 2)
    h_eff = derived.g0 * (n_a @ n_a)
    h_eff = h_eff + derived.g * (a.dag() @ pair) + derived.g.conjugate() * (a @ pair.dag())
    return h_eff + params.eps_d * a.dag() + params.eps_d.conjugate() * a


def build_h_transfer(tp: TransferParams, space: HilbertSpace) -> Operator:
    """Linearized readout coupling on the (b2, a_t) space."""
    if space.n_modes != 2:
        raise ValueError(f"Transfer Hamiltonian needs modes (b2, a_t), got {space.n_modes} modes")
    b = destroy(space, 0)
    a_t = destroy(space, 1)
    term = (1j * tp.g_tilde) * (b.dag() @ a_t)
    return term + term.dag()


def check_rwa(params: ModelParams, derived: DerivedParams, threshold: float = constants.RWA_THRESHOLD) -> ConditionReport:
    """Compares the slow couplings against the frequency separations they are averaged over."""
    abs_alpha = abs(derived.alpha)
    omegas = (params.omega_b1, params.omega_b2)
    scales = {
        "omega_bj": min(omegas),
        "|omega_b1-omega_b2|": abs(params.omega_b1 - params.omega_b2),
        "Delta_tilde": abs(derived.Delta_tilde),
        "|Delta_tilde-omega_bj|": min(abs(derived.Delta_tilde - w) for w in omegas),
    }
    rates = {
        "r_j*eps_d": max(derived.r1, derived.r2) * abs(params.eps_d),
        "g_j*|alpha|^2": max(abs(params.g1), abs(params.g2)) * abs_alpha ** 2,
        "|alpha|(r1*g2+r2*g1)": abs_alpha * abs(derived.r1 * params.g2 + derived.r2 * params.g1),
        "|alpha|(r1*g1+r2*g2)": abs_alpha * abs(derived.r1 * params.g1 + derived.r2 * params.g2),
    }
    ratios = {}
    for rate_name, rate in rates.items():
        for scale_name, scale in scales.items():
            ratios[f"{rate_name} / {scale_name}"] = float(rate / scale) if scale > 0 else float("inf")
    max_ratio = max(ratios.values())
    return ConditionReport(ratios=ratios, threshold=threshold, max_ratio=max_ratio, passed=max_ratio < threshold)


def thermal_occupation(frequency_hz: float, temperature: float) -> float:
    """Bose-Einstein occupation of a mode with frequency omega/2pi at temperature T."""
    if temperature <= 0:
        raise ValueError(f"Temperature must be positive, got {temperature}")
    if frequency_hz <= 0:
        raise ValueError(f"Frequency must be positive, got {frequency_hz}")
    x = h * frequency_hz / (k_B * temperature)
    if x > 700.0:
        return 0.0
    return float(1.0 / np.expm1(x))


def thermal_temperature(frequency_hz: float, nbar: float) -> float:
    if frequency_hz <= 0:
        raise ValueError(f"Frequency must be positive, got {frequency_hz}")
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0:
        return 0.0
    return float(h * frequency_hz / (k_B * np.log1p(1.0 / nbar)))
