""" SPDX-License-Identifier: MIT-0 """

import numpy as np
import scipy.sparse as sp

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union
from aws_lambda_powertools import Logger

import constants

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated tensor-product Fock space; mode 0 is the leftmost factor."""

    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("HilbertSpace needs at least one mode")
        if any(d < 2 for d in dims):
            raise ValueError(f"Every mode cutoff must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def index(self, levels: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(levels), self.dims))

    def check_mode(self, mode: int) -> int:
        if not 0 <= mode < self.n_modes:
            raise ValueError(f"mode {mode} out of range for {self.n_modes} modes")
        return int(mode)

    def subspace(self, modes: Iterable[int]) -> "HilbertSpace":
        return HilbertSpace(tuple(self.dims[self.check_mode(k)] for k in modes))


@dataclass(frozen=True, eq=False)
class Operator:
    space: HilbertSpace
    data: sp.csr_matrix

    # numpy scalars on the left defer to __rmul__
    __array_ufunc__ = None

    def __post_init__(self):
        data = sp.csr_matrix(self.data, dtype=complex)
        if data.shape != (self.space.total, self.space.total):
            raise ValueError(f"Operator shape {data.shape} does not match dimension {self.space.total}")
        object.__setattr__(self, "data", data)

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T.tocsr())

    def dense(self) -> np.ndarray:
        return self.data.toarray()

    def hermiticity_error(self) -> float:
        diff = (self.data - self.data.conj().T).tocsr()
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    def is_diagonal(self) -> bool:
        off = self.data - sp.diags(self.data.diagonal())
        off = sp.csr_matrix(off)
        off.eliminate_zeros()
        return off.nnz == 0

    def commutator(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    def _other(self, other: "Operator") -> sp.csr_matrix:
        if not isinstance(other, Operator):
            return NotImplemented
        if other.space != self.space:
            raise ValueError(f"Operator spaces differ: {self.space.dims} vs {other.space.dims}")
        return other.data

    def __add__(self, other):
        data = self._other(other)
        if data is NotImplemented:
            return NotImplemented
        return Operator(self.space, self.data + data)

    def __sub__(self, other):
        data = self._other(other)
        if data is NotImplemented:
            return NotImplemented
        return Operator(self.space, self.data - data)

    def __neg__(self):
        return Operator(self.space, -self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.space, self.data * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        data = self._other(other)
        if data is NotImplemented:
            return NotImplemented
        return Operator(self.space, self.data @ data)


@dataclass(frozen=True, eq=False)
class PureState:
    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex).reshape(-1)
        if data.shape != (self.space.total,):
            raise ValueError(f"State vector length {data.shape[0]} does not match dimension {self.space.total}")
        norm = np.linalg.norm(data)
        if abs(norm - 1.0) > constants.NORM_TOL:
            raise ValueError(f"State vector norm {norm:.15g} differs from 1")
        object.__setattr__(self, "data", data)

    @classmethod
    def normalized(cls, space: HilbertSpace, vector: np.ndarray) -> "PureState":
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero vector")
        return cls(space, vector / norm)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.data, self.data.conj()))

    def populations(self) -> np.ndarray:
        return np.abs(self.data) ** 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense density matrix. Hermiticity and trace are checked on construction;
    the eigenvalue floor is checked by from_matrix for externally supplied data."""

    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        d = self.space.total
        if data.shape != (d, d):
            raise ValueError(f"Density matrix shape {data.shape} does not match dimension {d}")
        asym = np.abs(data - data.conj().T).max()
        if asym > constants.HERMITIAN_TOL:
            raise ValueError(f"Density matrix is not Hermitian (deviation {asym:.3g})")
        trace = np.trace(data).real
        if abs(trace - 1.0) > constants.TRACE_TOL:
            raise ValueError(f"Density matrix trace {trace:.15g} differs from 1")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_matrix(cls, space: HilbertSpace, data: np.ndarray, renormalize: bool = False) -> "DensityMatrix":
        data = np.asarray(data, dtype=complex)
        if renormalize:
            data = hermitize(data)
            data = data / np.trace(data).real
        rho = cls(space, data)
        lowest = np.linalg.eigvalsh(rho.data).min()
        if lowest < -constants.POSITIVITY_TOL:
            raise ValueError(f"Density matrix has negative eigenvalue {lowest:.3g}")
        return rho

    def populations(self) -> np.ndarray:
        return np.diagonal(self.data).real.copy()

    def purity(self) -> float:
        return float(np.vdot(self.data, self.data).real)

    def expect(self, op: Operator) -> complex:
        if op.space != self.space:
            raise ValueError(f"Operator space {op.space.dims} does not match state space {self.space.dims}")
        return complex(np.sum(op.data.multiply(self.data.T)))


State = Union[PureState, DensityMatrix]


def hermitize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def as_density(state: State) -> DensityMatrix:
    return state.projector() if isinstance(state, PureState) else state


def _single_destroy(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff)), 1, shape=(cutoff, cutoff), format="csr", dtype=complex)


def embed(space: HilbertSpace, mode: int, matrix) -> Operator:
    """Lifts a single-mode matrix to I ⊗ … ⊗ matrix ⊗ … ⊗ I."""
    mode = space.check_mode(mode)
    matrix = sp.csr_matrix(matrix, dtype=complex)
    if matrix.shape != (space.dims[mode], space.dims[mode]):
        raise ValueError(f"Matrix shape {matrix.shape} does not match cutoff {space.dims[mode]} of mode {mode}")
    before = int(np.prod(space.dims[:mode]))
    after = int(np.prod(space.dims[mode + 1:]))
    lifted = sp.kron(sp.identity(before, dtype=complex), matrix, format="csr")
    lifted = sp.kron(lifted, sp.identity(after, dtype=complex), format="csr")
    return Operator(space, lifted)


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, sp.identity(space.total, dtype=complex, format="csr"))


def destroy(space: HilbertSpace, mode: int) -> Operator:
    mode = space.check_mode(mode)
    return embed(space, mode, _single_destroy(space.dims[mode]))


def create(space: HilbertSpace, mode: int) -> Operator:
    return destroy(space, mode).dag()


def number(space: HilbertSpace, mode: int) -> Operator:
    mode = space.check_mode(mode)
    return embed(space, mode, sp.diags(np.arange(space.dims[mode], dtype=complex), format="csr"))


def tensor(*items):
    """Kronecker product of states or operators, concatenating their spaces."""
    if not items:
        raise ValueError("tensor needs at least one factor")
    space = HilbertSpace(tuple(d for item in items for d in item.space.dims))
    if all(isinstance(item, Operator) for item in items):
        data = items[0].data
        for item in items[1:]:
            data = sp.kron(data, item.data, format="csr")
        return Operator(space, data)
    if all(isinstance(item, PureState) for item in items):
        data = items[0].data
        for item in items[1:]:
            data = np.kron(data, item.data)
        return PureState(space, data)
    data = as_density(items[0]).data
    for item in items[1:]:
        data = np.kron(data, as_density(item).data)
    return DensityMatrix(space, data)


def expm_unitary(generator: Operator, scale: float) -> Operator:
    """Returns exp(-i * scale * generator) for a Hermitian generator."""
    error = generator.hermiticity_error()
    if error > constants.GENERATOR_HERMITIAN_TOL:
        raise ValueError(f"Generator is not Hermitian (deviation {error:.3g})")
    if generator.is_diagonal():
        phases = np.exp(-1j * scale * generator.data.diagonal().real)
        return Operator(generator.space, sp.diags(phases, format="csr"))
    values, vectors = np.linalg.eigh(hermitize(generator.dense()))
    unitary = (vectors * np.exp(-1j * scale * values)) @ vectors.conj().T
    return Operator(generator.space, unitary)


def displacement(space: HilbertSpace, mode: int, amp: complex) -> Operator:
    mode = space.check_mode(mode)
    cutoff = space.dims[mode]
    amp = complex(amp)
    if abs(amp) ** 2 > cutoff / 4:
        logger.warning(f"Displacement |amp|^2={abs(amp) ** 2:.3g} exceeds cutoff/4 for mode {mode} (cutoff {cutoff})")
    local = HilbertSpace((cutoff,))
    a = _single_destroy(cutoff)
    # exp(amp a† - amp* a) = exp(-i * 1 * G) with G = i(amp a† - amp* a)
    generator = Operator(local, 1j * (amp * a.conj().T - amp.conjugate() * a))
    return embed(space, mode, expm_unitary(generator, 1.0).data)


def partial_trace(rho: State, keep: Iterable[int]) -> DensityMatrix:
    rho = as_density(rho)
    space = rho.space
    keep = sorted({space.check_mode(k) for k in keep})
    if not keep:
        raise ValueError("partial_trace needs a nonempty set of kept modes")
    dims = space.dims
    tensor_form = rho.data.reshape(dims + dims)
    n_open = len(dims)
    for mode in sorted(set(range(len(dims))) - set(keep), reverse=True):
        tensor_form = np.trace(tensor_form, axis1=mode, axis2=mode + n_open)
        n_open -= 1
    kept = space.subspace(keep)
    reduced = tensor_form.reshape(kept.total, kept.total)
    return DensityMatrix(kept, hermitize(reduced))


def partial_transpose(rho: State, mode: int) -> np.ndarray:
    rho = as_density(rho)
    if rho.space.n_modes != 2:
        raise ValueError(f"partial_transpose needs a two-mode state, got {rho.space.n_modes} modes")
    mode = rho.space.check_mode(mode)
    n1, n2 = rho.space.dims
    tensor_form = rho.data.reshape(n1, n2, n1, n2)
    swapped = tensor_form.transpose(2, 1, 0, 3) if mode == 0 else tensor_form.transpose(0, 3, 2, 1)
    return swapped.reshape(n1 * n2, n1 * n2)


def quadrature_basis(cutoff: int, x, theta: float = 0.0, scale: float = 1.0) -> np.ndarray:
    """Matrix of <x,theta|n> for n < cutoff, shape x.shape + (cutoff,).

    Eigenfunctions of scale*(b e^{-i theta} + b† e^{i theta}); scale=1 gives
    unit vacuum variance, scale=0.5 the half convention."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    u = np.asarray(x, dtype=float) / scale
    phi = np.zeros(u.shape + (cutoff,))
    phi[..., 0] = (2.0 * np.pi) ** -0.25 * np.exp(-u ** 2 / 4.0)
    if cutoff > 1:
        phi[..., 1] = u * phi[..., 0]
    for n in range(1, cutoff - 1):
        phi[..., n + 1] = (u * phi[..., n] - np.sqrt(n) * phi[..., n - 1]) / np.sqrt(n + 1)
    phases = np.exp(-1j * theta * np.arange(cutoff))
    return phi * phases / np.sqrt(scale)


def quadrature_wavefunction(n: int, x, theta: float = 0.0, scale: float = 1.0):
    if n < 0:
        raise ValueError(f"Fock level must be >= 0, got {n}")
    return quadrature_basis(n + 1, x, theta, scale)[..., n]


def truncation_leakage(state: State) -> Tuple[float, ...]:
    """Per-mode maximum population on the top two Fock levels."""
    grid = state.populations().reshape(state.space.dims)
    leakage = []
    for mode in range(state.space.n_modes):
        others = tuple(k for k in range(state.space.n_modes) if k != mode)
        marginal = grid.sum(axis=others) if others else grid
        leakage.append(float(max(marginal[-1], marginal[-2])))
    return tuple(leakage)


def check_leakage(state: State, label: str, threshold: float = constants.LEAKAGE_THRESHOLD) -> float:
    worst = max(truncation_leakage(state))
    if worst > threshold:
        logger.warning(f"Truncation leakage {worst:.3g} in {label} exceeds {threshold:.1g}; raise the cutoffs")
    return worst


def trace_distance(rho: State, sigma: State) -> float:
    diff = as_density(rho).data - as_density(sigma).data
    return float(0.5 * np.abs(np.linalg.eigvalsh(hermitize(diff))).sum())
