""" SPDX-License-Identifier: MIT-0 """

import time
import numpy as np
import scipy.sparse as sp

from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple
from scipy.integrate import RK45
from scipy.sparse.linalg import splu
from aws_lambda_powertools import Logger

import constants
from components.fock_core import (DensityMatrix, HilbertSpace, Operator, State, as_density, destroy,
                                  displacement, expm_unitary, hermitize, identity, number, truncation_leakage)
from components.model import (DerivedParams, HamiltonianSpec, ModelParams, build_h2, build_h_eff,
                              build_h_frame1)

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)


class SolverAbort(RuntimeError):
    """Raised when the integrator cannot make progress; carries the last good state."""

    def __init__(self, message: str, time: float, state: DensityMatrix, trajectory: "Trajectory"):
        super().__init__(message)
        self.time = time
        self.state = state
        self.trajectory = trajectory


class DegenerateSteadyState(RuntimeError):
    def __init__(self, dimension: int, capped: bool = False):
        bound = "at least " if capped else ""
        super().__init__(f"Liouvillian null space is degenerate: dimension {bound}{dimension}")
        self.dimension = dimension


@dataclass(frozen=True)
class LindbladSpec:
    """Master equation -i[H(t), rho] + sum_k rate_k (2 c rho c† - c†c rho - rho c†c)."""

    hamiltonian: HamiltonianSpec
    collapse: Tuple[Tuple[Operator, float], ...] = ()

    def __post_init__(self):
        collapse = tuple((op, float(rate)) for op, rate in self.collapse)
        for op, rate in collapse:
            if op.space != self.space:
                raise ValueError(f"Collapse operator space {op.space.dims} does not match {self.space.dims}")
            if rate < 0:
                raise ValueError(f"Collapse rate must be >= 0, got {rate}")
        object.__setattr__(self, "collapse", collapse)

    @property
    def space(self) -> HilbertSpace:
        return self.hamiltonian.space


@dataclass(frozen=True)
class TrajectoryDiagnostics:
    leakage: Tuple[float, ...]
    trace_drift: Tuple[float, ...]
    accepted_steps: int


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[DensityMatrix] = field(default_factory=list)
    observations: List[Any] = field(default_factory=list)
    final_state: Optional[DensityMatrix] = None
    diagnostics: Optional[TrajectoryDiagnostics] = None


def _mechanical_collapse(params: ModelParams, space: HilbertSpace):
    collapse = [(destroy(space, 0), params.gamma_a)]
    for j in (1, 2):
        b = destroy(space, j)
        collapse.append((b, params.damping(j) * (params.nbar(j) + 1.0)))
        collapse.append((b.dag(), params.damping(j) * params.nbar(j)))
    return tuple((op, rate) for op, rate in collapse if rate > 0)


def effective_spec(params: ModelParams, derived: DerivedParams, space: HilbertSpace) -> LindbladSpec:
    """Reduced master equation with the Kerr and downconversion Hamiltonian."""
    hamiltonian = HamiltonianSpec(build_h_eff(params, derived, space))
    return LindbladSpec(hamiltonian, _mechanical_collapse(params, space))


def full_spec(params: ModelParams, space: HilbertSpace, frame: str = "displaced") -> LindbladSpec:
    if frame == "displaced":
        hamiltonian = build_h2(params, space)
    elif frame == "rotating":
        hamiltonian = build_h_frame1(params, space)
    else:
        raise ValueError(f"Unknown frame {frame!r}, expected 'displaced' or 'rotating'")
    return LindbladSpec(hamiltonian, _mechanical_collapse(params, space))


def conserved_difference(space: HilbertSpace) -> Operator:
    return number(space, 1) - number(space, 2)


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, (DensityMatrix,)):
        return rho.data
    return np.asarray(rho, dtype=complex)


def _right(rho: np.ndarray, op: sp.csr_matrix) -> np.ndarray:
    """rho @ op with a sparse right factor."""
    return (op.T @ rho.T).T


def dissipator_apply(c: Operator, rho) -> np.ndarray:
    matrix = _as_matrix(rho)
    if matrix.shape != (c.space.total, c.space.total):
        raise ValueError(f"State shape {matrix.shape} does not match operator dimension {c.space.total}")
    cdc = (c.dag() @ c).data
    jump = c.data @ _right(matrix, c.data.conj().T.tocsr())
    return 2.0 * jump - cdc @ matrix - _right(matrix, cdc)


def _liouvillian_matrix(h: sp.spmatrix, collapse: Sequence[Tuple[sp.spmatrix, float]]) -> sp.csc_matrix:
    d = h.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    superop = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for c, rate in collapse:
        if rate == 0:
            continue
        cdc = (c.conj().T @ c).tocsr()
        superop = superop + rate * (2.0 * sp.kron(c.conj(), c) - sp.kron(eye, cdc) - sp.kron(cdc.T, eye))
    return sp.csc_matrix(superop)


def _charge_shift(op: sp.spmatrix, charges: np.ndarray) -> int:
    coo = sp.coo_matrix(op)
    nonzero = coo.data != 0
    shifts = np.unique(np.round(charges[coo.row[nonzero]] - charges[coo.col[nonzero]]).astype(int))
    if len(shifts) > 1:
        raise ValueError("An operator of the master equation has no definite charge under the symmetry")
    return int(shifts[0]) if len(shifts) else 0


def _block_liouvillian(h: sp.spmatrix, collapse: Sequence[Tuple[sp.spmatrix, float]],
                       charges: np.ndarray) -> Tuple[sp.csc_matrix, List[np.ndarray]]:
    """Liouvillian restricted to coherences between equal charges.

    Each block (s, s) is column-stacked and the blocks follow sorted charge order."""
    values = np.unique(np.round(charges).astype(int))
    groups = [np.flatnonzero(np.round(charges).astype(int) == s) for s in values]
    position = {int(s): k for k, s in enumerate(values)}
    eye = sp.identity(h.shape[0], dtype=complex, format="csr")
    # coeff * A rho B
    terms = [(h.tocsr(), eye, -1j), (eye, h.tocsr(), 1j)]
    for c, rate in collapse:
        if rate == 0:
            continue
        c = c.tocsr()
        cdc = (c.conj().T @ c).tocsr()
        terms += [(c, c.conj().T.tocsr(), 2.0 * rate), (cdc, eye, -rate), (eye, cdc, -rate)]
    blocks = [[None] * len(groups) for _ in groups]
    for a_op, b_op, coeff in terms:
        shift = _charge_shift(a_op, charges)
        if _charge_shift(b_op, charges) != -shift:
            raise ValueError("Master equation term does not preserve equal-charge coherences")
        for source, s in enumerate(values):
            target = position.get(int(s) + shift)
            if target is None:
                continue
            rows, cols = groups[target], groups[source]
            piece = coeff * sp.kron(b_op[cols][:, rows].T, a_op[rows][:, cols])
            blocks[target][source] = piece if blocks[target][source] is None else blocks[target][source] + piece
    for k, group in enumerate(groups):
        if blocks[k][k] is None:
            blocks[k][k] = sp.csr_matrix((len(group) ** 2, len(group) ** 2), dtype=complex)
    return sp.bmat(blocks, format="csc"), groups


def liouvillian(spec: LindbladSpec, t: float = 0.0) -> sp.csc_matrix:
    """Column-stacking superoperator: L @ rho.flatten(order="F") is the vectorized rate of change."""
    h = spec.hamiltonian.at(t).data
    return _liouvillian_matrix(h, [(op.data, rate) for op, rate in spec.collapse])


class _MasterEquation:
    """Right-hand side in matrix form, flattened in C order for the integrator."""

    def __init__(self, spec: LindbladSpec):
        self.dim = spec.space.total
        self.spec = spec
        gamma = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        self.jumps = []
        for op, rate in spec.collapse:
            if rate == 0:
                continue
            gamma = gamma + rate * (op.dag() @ op).data
            self.jumps.append((op.data, op.data.conj().T.tocsr(), 2.0 * rate))
        self.gamma = gamma.tocsr()
        self.static = (spec.hamiltonian.static.data - 1j * self.gamma).tocsr()

    def generator(self, t: float) -> sp.csr_matrix:
        if self.spec.hamiltonian.is_static:
            return self.static
        return (self.spec.hamiltonian.at(t).data - 1j * self.gamma).tocsr()

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        rho = y.reshape(self.dim, self.dim)
        k = self.generator(t)
        drho = -1j * (k @ rho) + 1j * _right(rho, k.conj().T.tocsr())
        for c, c_dag, weight in self.jumps:
            drho += weight * (c @ _right(rho, c_dag))
        return drho.reshape(-1)


def _normalize(matrix: np.ndarray) -> np.ndarray:
    matrix = hermitize(matrix)
    return matrix / np.trace(matrix).real


def evolve(spec: LindbladSpec, rho0: State, t_grid: Sequence[float], tol: float = constants.EVOLVE_RTOL,
           observer: Optional[Callable[[float, DensityMatrix], Any]] = None,
           store_states: bool = True) -> Trajectory:
    """Integrates the master equation with an adaptive 4(5) Runge-Kutta pair.

    Hermiticity and unit trace are re-imposed after every accepted step, together
    with the derivative the next step starts from; the states at the requested
    times come from the step interpolant."""
    rho0 = as_density(rho0)
    if rho0.space != spec.space:
        raise ValueError(f"Initial state space {rho0.space.dims} does not match {spec.space.dims}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a nonempty one-dimensional sequence")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")

    start = time.time()
    logger.info(f"Starting evolution over [{t_grid[0]:.6g}, {t_grid[-1]:.6g}] on {spec.space.dims} ...")
    trajectory = Trajectory()
    leakage, drift = [], []
    max_drift = 0.0

    def record(t, matrix):
        rho = DensityMatrix(spec.space, _normalize(matrix))
        trajectory.times.append(float(t))
        if store_states:
            trajectory.states.append(rho)
        if observer is not None:
            trajectory.observations.append(observer(float(t), rho))
        leakage.append(max(truncation_leakage(rho)))
        drift.append(max_drift)
        trajectory.final_state = rho

    def finish(steps):
        trajectory.diagnostics = TrajectoryDiagnostics(tuple(leakage), tuple(drift), steps)

    record(t_grid[0], rho0.data)
    if len(t_grid) == 1:
        finish(0)
        return trajectory

    rhs = _MasterEquation(spec)
    solver = RK45(rhs, t_grid[0], rho0.data.reshape(-1).copy(), t_grid[-1],
                  rtol=tol, atol=tol * constants.EVOLVE_ATOL_RATIO)
    steps = 0
    next_index = 1
    try:
        while next_index < len(t_grid):
            message = solver.step()
            if solver.status == "failed":
                raise SolverAbort(f"Integrator aborted at t={solver.t:.6g}: {message}",
                                  trajectory.times[-1], trajectory.final_state, trajectory)
            steps += 1
            interpolant = solver.dense_output()
            matrix = solver.y.reshape(rhs.dim, rhs.dim)
            step_drift = abs(np.trace(matrix).real - 1.0)
            max_drift = max(max_drift, step_drift)
            if step_drift > 1e-7:
                logger.warning(f"Trace drift {step_drift:.3g} in one step at t={solver.t:.6g}")
            solver.y[:] = _normalize(matrix).reshape(-1)
            # first-same-as-last: the next step reuses f, which must match the renormalized y
            solver.f = rhs(solver.t, solver.y)
            while next_index < len(t_grid) and t_grid[next_index] <= solver.t:
                t_out = t_grid[next_index]
                values = solver.y if t_out == solver.t else interpolant(t_out)
                record(t_out, values.reshape(rhs.dim, rhs.dim))
                max_drift = 0.0
                next_index += 1
    except SolverAbort as e:
        finish(steps)
        logger.error(f"{e}. Last good state at t={e.time:.6g}")
        raise e

    finish(steps)
    worst = max(leakage)
    if worst > constants.LEAKAGE_THRESHOLD:
        logger.warning(f"Truncation leakage reached {worst:.3g} during evolution on {spec.space.dims}")
    logger.info(f"Evolution complete after {steps} steps. Duration: {time.strftime('%H:%M:%S', time.gmtime(time.time() - start))}")
    return trajectory


@dataclass(frozen=True)
class SteadyStateInfo:
    residual: float
    iterations: int
    null_dimension: int
    sector_size: int
    unknowns: int


def _sector_indices(space: HilbertSpace, sector, operators: Sequence[Operator]) -> np.ndarray:
    conserved, value = sector
    if not conserved.is_diagonal():
        raise ValueError("Sector operator must be diagonal in the Fock basis")
    diagonal = conserved.data.diagonal().real
    indices = np.flatnonzero(np.abs(diagonal - value) < 1e-9)
    if len(indices) == 0:
        raise ValueError(f"Sector value {value} is not an eigenvalue of the conserved operator")
    outside = np.setdiff1d(np.arange(space.total), indices)
    for op in operators:
        leak = op.data[outside][:, indices]
        if leak.nnz and np.abs(leak.data).max() > 0:
            raise ValueError("An operator of the master equation does not preserve the requested sector")
    return indices


def _inverse_iteration(lu, matrix: sp.spmatrix, start: np.ndarray, scale: float,
                       basis: Sequence[np.ndarray] = (),
                       maxiter: int = constants.STEADY_MAXITER) -> Tuple[np.ndarray, float, int]:
    v = start
    residual = np.inf
    for iteration in range(1, maxiter + 1):
        v = lu.solve(v)
        for u in basis:
            v = v - np.vdot(u, v) * u
        v = v / np.abs(v).max()
        residual = np.abs(matrix @ v).max() / scale
        if residual < constants.STEADY_RESIDUAL_TOL:
            break
    return v, residual, iteration


def steady_state(spec: LindbladSpec, sector: Optional[Tuple[Operator, float]] = None,
                 symmetry: Optional[Operator] = None, return_info: bool = False):
    """Null vector of the Liouvillian by shifted inverse iteration on a sparse LU factorization.

    With a sector (diagonal conserved operator, eigenvalue) the solve is restricted
    to states supported on that eigenspace. With a symmetry (diagonal operator that every
    term shifts by a fixed charge) only coherences between equal charges are solved for."""
    if not spec.hamiltonian.is_static:
        raise ValueError("steady_state needs a time-independent Hamiltonian")
    if sector is not None and symmetry is not None:
        raise ValueError("Pass either a sector or a symmetry, not both")
    space = spec.space
    start = time.time()
    h = spec.hamiltonian.static.data
    collapse = [(op.data, rate) for op, rate in spec.collapse if rate > 0]
    indices = np.arange(space.total)
    if sector is not None:
        indices = _sector_indices(space, sector, [spec.hamiltonian.static] + [op for op, _ in spec.collapse])
        h = h[indices][:, indices]
        collapse = [(op[indices][:, indices], rate) for op, rate in collapse]
    m = len(indices)
    if symmetry is not None:
        if not symmetry.is_diagonal():
            raise ValueError("Symmetry operator must be diagonal in the Fock basis")
        matrix, groups = _block_liouvillian(h, collapse, symmetry.data.diagonal().real)
    else:
        matrix, groups = _liouvillian_matrix(h, collapse), [np.arange(m)]
    unknowns = matrix.shape[0]
    logger.info(f"Starting steady-state solve on {space.dims} ({unknowns} unknowns) ...")

    scale = np.abs(matrix.data).max()
    shifted = (matrix - constants.STEADY_SHIFT * sp.identity(unknowns, dtype=complex, format="csc")).tocsc()
    try:
        lu = splu(shifted, permc_spec="COLAMD")
    except RuntimeError as e:
        logger.warning(f"Sparse factorization failed ({e}); retrying with a larger shift")
        shifted = (matrix - 1e-10 * scale * sp.identity(unknowns, dtype=complex, format="csc")).tocsc()
        lu = splu(shifted, permc_spec="COLAMD")

    v, residual, iterations = _inverse_iteration(lu, matrix, np.ones(unknowns, dtype=complex), scale)
    if residual > constants.STEADY_RESIDUAL_TOL:
        logger.warning(f"Steady-state residual {residual:.3g} above {constants.STEADY_RESIDUAL_TOL:.1g}")

    # Second null vector: deflate the first and iterate from a fixed pseudo-random start
    rng = np.random.default_rng(0)
    basis = [v / np.linalg.norm(v)]
    capped = False
    while len(basis) < constants.DEGENERACY_MAX_DIM:
        trial = rng.standard_normal(unknowns) + 1j * rng.standard_normal(unknowns)
        w, w_residual, _ = _inverse_iteration(lu, matrix, trial, scale, basis,
                                             maxiter=constants.DEGENERACY_ITERATIONS)
        if w_residual >= constants.DEGENERACY_TOL:
            break
        basis.append(w / np.linalg.norm(w))
    else:
        capped = True
    if len(basis) > 1:
        logger.error(f"Degenerate steady state: null-space dimension {len(basis)}")
        raise DegenerateSteadyState(len(basis), capped)

    full = np.zeros((space.total, space.total), dtype=complex)
    offset = 0
    for group in groups:
        size = len(group)
        target = indices[group]
        full[np.ix_(target, target)] = v[offset:offset + size * size].reshape(size, size, order="F")
        offset += size * size
    rho = DensityMatrix.from_matrix(space, full, renormalize=True)
    logger.info(f"Steady state found in {iterations} iterations, residual {residual:.3g}. "
                f"Duration: {time.strftime('%H:%M:%S', time.gmtime(time.time() - start))}")
    if return_info:
        return rho, SteadyStateInfo(residual=float(residual), iterations=iterations,
                                    null_dimension=len(basis), sector_size=m, unknowns=unknowns)
    return rho


def lindblad_residual(spec: LindbladSpec, rho: State) -> float:
    """Max-norm of L vec(rho) relative to the largest Liouvillian entry."""
    rho = as_density(rho)
    matrix = liouvillian(spec, 0.0)
    return float(np.abs(matrix @ rho.data.reshape(-1, order="F")).max() / np.abs(matrix.data).max())


class FrameTransform:
    """Maps states of the optomechanical master equation into the frame of the reduced model.

    Factors, applied right to left: the pump rotation exp(i omega_p n_a t), the
    displacement exp(alpha* a - alpha a†), two polaron factors
    exp(r_j n_a (b_j† - b_j)) and exp(i H0~ t). The first two are skipped when
    the state already lives in the corresponding frame."""

    def __init__(self, params: ModelParams, derived: DerivedParams, space: HilbertSpace,
                 displaced: bool = False, omega_p: Optional[float] = None):
        if space.n_modes != 3:
            raise ValueError(f"frame_transform needs modes (a, b1, b2), got {space.n_modes} modes")
        self.space = space
        self.omega_p = omega_p
        n_a = number(space, 0)
        static = identity(space)
        if not displaced:
            static = displacement(space, 0, -derived.alpha) @ static
        for j, r in ((1, derived.r1), (2, derived.r2)):
            b = destroy(space, j)
            polaron = (1j * r) * (n_a @ (b.dag() - b))
            static = expm_unitary(polaron, 1.0) @ static
        self.static = static.dense()
        h0 = derived.Delta_tilde * n_a + params.omega_b1 * number(space, 1) + params.omega_b2 * number(space, 2)
        self.h0 = h0.data.diagonal().real
        self.n_a = n_a.data.diagonal().real

    def unitary(self, t: float) -> np.ndarray:
        """Matrix of U† at time t."""
        u = np.exp(1j * self.h0 * t)[:, None] * self.static
        if self.omega_p is not None:
            u = u * np.exp(1j * self.omega_p * self.n_a * t)[None, :]
        return u

    def apply(self, rho: State, t: float) -> DensityMatrix:
        rho = as_density(rho)
        if rho.space != self.space:
            raise ValueError(f"State space {rho.space.dims} does not match {self.space.dims}")
        u = self.unitary(t)
        return DensityMatrix(self.space, hermitize(u @ rho.data @ u.conj().T))


def frame_transform(rho: State, t: float, params: ModelParams, derived: DerivedParams, *,
                    displaced: bool = False, omega_p: Optional[float] = None) -> DensityMatrix:
    rho = as_density(rho)
    return FrameTransform(params, derived, rho.space, displaced, omega_p).apply(rho, t)
