""" SPDX-License-Identifier: MIT-0 """

import math
import time
import logging
import numpy as np
import pandas as pd

from dataclasses import asdict, dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
from multiprocess import Pool
from tqdm import tqdm
from aws_lambda_powertools import Logger

import constants
from components.fock_core import DensityMatrix, HilbertSpace, partial_trace, truncation_leakage
from components.model import (ModelParams, TransferParams, derive, lock_zeta_phase, thermal_temperature,
                              with_zeta)
from components.states import PcsSpec, fidelity_pure, pcs, vacuum
from components.dynamics import (FrameTransform, Trajectory, conserved_difference, effective_spec, evolve,
                                 full_spec, steady_state)
from components.metrics import (MetricsRecord, fisher_steering, negativity, nongaussianity, reid, wigner_grid,
                                wigner_min)
from components.conditioning import TransferChannel
from components.conditioning.cat import prepare_cat

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)

SWEEP_AXES = ("zeta", "nbar")
ENGINES = ("effective", "full", "pure", "steady", "both")
STEADY_ENGINES = ("effective", "full")

STEADY_COLUMNS = ("F", "R_r", "W_min", "N", "leakage", "leakage_warning")
ZETA_COLUMNS = ("F", "R_r", "W_min", "N", "E_r_11", "E_r_22", "E_f", "leakage", "leakage_warning")
CAT_COLUMNS = ("F_cat", "F_cat_nominal", "W_min_cat", "leakage", "leakage_warning")
THERMAL_COLUMNS = ("F", "R_r", "W_min", "N", "E_f", "F_cat", "F_cat_nominal", "W_min_cat",
                   "leakage", "leakage_warning")
TRACE_COLUMNS = ("t", "F", "leakage", "trace_drift")
WIGNER_COLUMNS = ("engine", "zeta", "x", "p", "W")

UNITS = {
    "model.omega_b1": "omega_b1", "model.omega_b2": "omega_b1", "model.g1": "omega_b1", "model.g2": "omega_b1",
    "model.eps_p": "omega_b1", "model.eps_d": "omega_b1", "model.Delta": "omega_b1",
    "model.Delta_p": "omega_b1", "model.gamma_a": "omega_b1", "model.gamma_b1": "omega_b1",
    "model.gamma_b2": "omega_b1", "model.nbar_b1": "phonons", "model.nbar_b2": "phonons",
    "transfer.g_t": "omega_b1", "transfer.gamma_t": "omega_b1", "transfer.eps_p2": "omega_b1",
    "transfer.Delta_t": "omega_b1", "transfer.tau": "1/omega_b1",
    "sweep.frequency_hz": "Hz", "solver.t_max": "1/omega_b1", "solver.t_ss": "1/omega_b1",
    "grid.extent": "amplitude", "grid.x_outcome": "quadrature (unit vacuum variance)",
}


def _complex_to_json(value: complex):
    return [value.real, value.imag]


def _complex_from_json(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


@dataclass(frozen=True)
class Scenario:
    """One run of the simulator: model, optional readout, sweep and numerics."""

    name: str
    model: ModelParams
    transfer: Optional[TransferParams] = None
    sweep_axis: str = "zeta"
    sweep_values: Tuple[float, ...] = constants.ZETA_VALUES
    frequency_hz: Optional[float] = None
    cutoffs: Tuple[int, int, int] = constants.EFFECTIVE_CUTOFFS
    engine: str = "effective"
    steady_engine: str = "effective"
    t_max: float = constants.T_MAX
    t_ss: Optional[float] = None
    n_times: int = constants.N_TIMES
    rtol: float = constants.EVOLVE_RTOL
    lock_zeta_phase: bool = True
    grid_extent: float = constants.CAT_GRID_EXTENT
    grid_points: int = constants.CAT_GRID_POINTS
    x_outcome: float = 0.0
    output: str = "."

    def __post_init__(self):
        if not self.name:
            raise ValueError("Scenario name must be nonempty")
        values = tuple(float(v) for v in self.sweep_values)
        if not values or not all(math.isfinite(v) for v in values):
            raise ValueError(f"sweep values must be finite and nonempty, got {self.sweep_values}")
        object.__setattr__(self, "sweep_values", values)
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.steady_engine not in STEADY_ENGINES:
            raise ValueError(f"steady_engine must be one of {STEADY_ENGINES}, got {self.steady_engine!r}")
        cutoffs = tuple(int(c) for c in self.cutoffs)
        if len(cutoffs) != 3 or min(cutoffs) < 2:
            raise ValueError(f"cutoffs must be three integers >= 2 for (a, b1, b2), got {self.cutoffs}")
        object.__setattr__(self, "cutoffs", cutoffs)
        if self.t_max <= 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.t_ss is not None and not self.t_ss > 0:
            raise ValueError(f"t_ss must be positive, got {self.t_ss}")
        if self.n_times < 2:
            raise ValueError(f"n_times must be >= 2, got {self.n_times}")
        if not 0 < self.rtol < 1:
            raise ValueError(f"rtol must lie in (0, 1), got {self.rtol}")
        if self.grid_points < 2 or self.grid_extent <= 0:
            raise ValueError(f"Wigner grid needs extent > 0 and >= 2 points, got {self.grid_extent}, {self.grid_points}")
        if self.frequency_hz is not None and self.frequency_hz <= 0:
            raise ValueError(f"frequency_hz must be positive, got {self.frequency_hz}")

    def to_dict(self) -> Dict[str, Any]:
        """Sectioned echo of the scenario, the same layout the INI files use."""
        model = asdict(self.model)
        for key in ("eps_p", "eps_d"):
            model[key] = _complex_to_json(model[key])
        echo = {
            "scenario": {"name": self.name, "engine": self.engine, "steady_engine": self.steady_engine,
                         "lock_zeta_phase": self.lock_zeta_phase, "output": self.output},
            "model": model,
            "sweep": {"axis": self.sweep_axis, "values": list(self.sweep_values)},
            "solver": {"cutoffs": list(self.cutoffs), "t_max": self.t_max, "n_times": self.n_times,
                       "rtol": self.rtol},
            "grid": {"extent": self.grid_extent, "points": self.grid_points, "x_outcome": self.x_outcome},
        }
        if self.frequency_hz is not None:
            echo["sweep"]["frequency_hz"] = self.frequency_hz
        if self.t_ss is not None:
            echo["solver"]["t_ss"] = self.t_ss
        if self.transfer is not None:
            transfer = asdict(self.transfer)
            transfer["eps_p2"] = _complex_to_json(transfer["eps_p2"])
            echo["transfer"] = transfer
        echo["units"] = {key: unit for key, unit in UNITS.items()
                         if key.split(".")[0] in echo and key.split(".")[1] in echo[key.split(".")[0]]}
        return echo

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        model = dict(data["model"])
        for key in ("eps_p", "eps_d"):
            model[key] = _complex_from_json(model[key])
        transfer = None
        if data.get("transfer"):
            transfer = dict(data["transfer"])
            transfer["eps_p2"] = _complex_from_json(transfer["eps_p2"])
            transfer = TransferParams(**transfer)
        scenario = data.get("scenario", {})
        sweep = data.get("sweep", {})
        solver = data.get("solver", {})
        grid = data.get("grid", {})
        kwargs = {
            "name": scenario.get("name"),
            "engine": scenario.get("engine"),
            "steady_engine": scenario.get("steady_engine"),
            "lock_zeta_phase": scenario.get("lock_zeta_phase"),
            "output": scenario.get("output"),
            "sweep_axis": sweep.get("axis"),
            "sweep_values": sweep.get("values"),
            "frequency_hz": sweep.get("frequency_hz"),
            "cutoffs": solver.get("cutoffs"),
            "t_max": solver.get("t_max"),
            "t_ss": solver.get("t_ss"),
            "n_times": solver.get("n_times"),
            "rtol": solver.get("rtol"),
            "grid_extent": grid.get("extent"),
            "grid_points": grid.get("points"),
            "x_outcome": grid.get("x_outcome"),
        }
        kwargs = {key: value for key, value in kwargs.items() if value is not None}
        if "sweep_values" in kwargs:
            kwargs["sweep_values"] = tuple(kwargs["sweep_values"])
        if "cutoffs" in kwargs:
            kwargs["cutoffs"] = tuple(kwargs["cutoffs"])
        return cls(model=ModelParams(**model), transfer=transfer, **kwargs)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.cutoffs)

    @property
    def base_params(self) -> ModelParams:
        return lock_zeta_phase(self.model) if self.lock_zeta_phase else self.model

    @property
    def steady_time(self) -> float:
        """Time at which the steady engines take the state: t_ss, or STEADY_TIME_GAMMA_A / gamma_a."""
        if self.t_ss is not None:
            return self.t_ss
        return constants.STEADY_TIME_GAMMA_A / self.model.gamma_a


def _elapsed(start: float) -> str:
    return time.strftime('%H:%M:%S', time.gmtime(time.time() - start))


def _map(fn: Callable, values: Sequence, workers: int, desc: str) -> List:
    """Applies fn over values, in a worker pool when workers > 1; results keep the input order."""
    disable = logger.log_level > logging.DEBUG
    if workers > 1 and len(values) > 1:
        with Pool(min(workers, len(values))) as pool:
            return list(tqdm(pool.imap(fn, values), total=len(values), desc=desc, disable=disable))
    return [fn(v) for v in tqdm(values, desc=desc, disable=disable)]


def _run_guarded(scenario: Scenario, label: str, body: Callable):
    logger.append_keys(scenario=scenario.name)
    start = time.time()
    logger.info(f"Starting {label} ...")
    try:
        result = body()
    except Exception as e:
        logger.error(f"{label} failed. Exception: {type(e).__name__} Message: {str(e)}")
        raise
    logger.info(f"{label} complete. Duration: {_elapsed(start)}")
    return result


def pcs_target(zeta: complex, cutoffs: Sequence[int]):
    return pcs(PcsSpec(zeta), HilbertSpace(tuple(cutoffs)))


def solve_steady(scenario: Scenario, params: ModelParams) -> Tuple[DensityMatrix, float]:
    """Mechanical state (b1, b2) on the long-lived plateau and the worst truncation leakage of the solve.

    Without mechanical damping the plateau is the exact dark state of the n1 - n2 = 0 sector the
    vacuum starts in. With damping, phonon jumps slowly move population into the other sectors and
    the t -> infinity state is spread over all of them, so the state is taken at scenario.steady_time."""
    space = scenario.space
    derived = derive(params)
    t_ss = scenario.steady_time
    if scenario.steady_engine == "effective":
        spec = effective_spec(params, derived, space)
        if params.gamma_b1 == 0 and params.gamma_b2 == 0:
            rho = steady_state(spec, sector=(conserved_difference(space), 0.0))
        else:
            rho = evolve(spec, vacuum(space), [0.0, t_ss], tol=scenario.rtol, store_states=False).final_state
    else:
        spec = full_spec(params, space, frame="displaced")
        trajectory = evolve(spec, vacuum(space), [0.0, t_ss], tol=scenario.rtol, store_states=False)
        frame = FrameTransform(params, derived, space, displaced=True)
        rho = frame.apply(trajectory.final_state, t_ss)
    return partial_trace(rho, [1, 2]), max(truncation_leakage(rho))


def evaluate_metrics(rho_b: DensityMatrix, zeta: complex, parameters: Dict[str, Any], leakage: float,
                     columns: Sequence[str]) -> MetricsRecord:
    values = {}
    if "F" in columns:
        values["F"] = fidelity_pure(rho_b, pcs_target(zeta, rho_b.space.dims))
    if "R_r" in columns:
        values["R_r"] = nongaussianity(rho_b)
    if "W_min" in columns:
        values["W_min"] = wigner_min(rho_b)[0]
    if "N" in columns:
        values["N"] = negativity(rho_b)
    orders = [(int(c[-2]), int(c[-1])) for c in columns if c.startswith("E_r_")]
    if orders:
        values["E_r"] = {order: reid(rho_b, *order) for order in orders}
    if "E_f" in columns:
        values["E_f"] = fisher_steering(rho_b)
    return MetricsRecord(parameters=parameters, leakage=leakage, **values)


def _readout(scenario: Scenario):
    if scenario.transfer is None:
        logger.info("No transfer parameters given; using the ideal swap channel")
        return TransferChannel(eta=1.0)
    return scenario.transfer


def run_steady(scenario: Scenario) -> MetricsRecord:
    """Single steady-state solve at the scenario's own zeta."""
    def body():
        params = scenario.base_params
        zeta = derive(params).zeta
        rho_b, leakage = solve_steady(scenario, params)
        return evaluate_metrics(rho_b, zeta, {"zeta": abs(zeta)}, leakage, STEADY_COLUMNS)
    return _run_guarded(scenario, "steady-state run", body)


def run_fidelity_trace(scenario: Scenario) -> Tuple[Trajectory, pd.DataFrame]:
    """Fidelity of the mechanical state to the PCS along a trajectory started from vacuum."""
    if scenario.engine not in ("effective", "full"):
        raise ValueError(f"Fidelity traces need engine 'effective' or 'full', got {scenario.engine!r}")

    def body():
        params = scenario.base_params
        derived = derive(params)
        space = scenario.space
        target = pcs_target(derived.zeta, space.dims[1:])
        if scenario.engine == "effective":
            spec = effective_spec(params, derived, space)

            def observer(t, rho):
                return fidelity_pure(partial_trace(rho, [1, 2]), target)
        else:
            spec = full_spec(params, space, frame="displaced")
            frame = FrameTransform(params, derived, space, displaced=True)

            def observer(t, rho):
                return fidelity_pure(partial_trace(frame.apply(rho, t), [1, 2]), target)

        t_grid = np.linspace(0.0, scenario.t_max, scenario.n_times)
        trajectory = evolve(spec, vacuum(space), t_grid, tol=scenario.rtol, observer=observer,
                            store_states=False)
        frame_rows = pd.DataFrame({
            "t": trajectory.times,
            "F": trajectory.observations,
            "leakage": trajectory.diagnostics.leakage,
            "trace_drift": trajectory.diagnostics.trace_drift,
        }, columns=list(TRACE_COLUMNS))
        return trajectory, frame_rows
    return _run_guarded(scenario, f"{scenario.engine} fidelity trace", body)


def _pure_state(zeta: float, cutoffs: Sequence[int]) -> Tuple[DensityMatrix, float]:
    psi = pcs_target(zeta, cutoffs)
    return psi.projector(), max(truncation_leakage(psi))


def run_zeta_sweep(scenario: Scenario, workers: int = 1) -> List[MetricsRecord]:
    """Nonclassicality metrics as functions of zeta for the pure PCS or the damped steady state."""
    if scenario.engine not in ("pure", "steady"):
        raise ValueError(f"zeta sweeps need engine 'pure' or 'steady', got {scenario.engine!r}")
    if scenario.sweep_axis != "zeta":
        raise ValueError(f"zeta sweeps need sweep axis 'zeta', got {scenario.sweep_axis!r}")

    def point(zeta):
        if scenario.engine == "pure":
            rho_b, leakage = _pure_state(zeta, scenario.cutoffs[1:])
        else:
            rho_b, leakage = solve_steady(scenario, with_zeta(scenario.base_params, zeta))
        return evaluate_metrics(rho_b, zeta, {"zeta": zeta}, leakage, ZETA_COLUMNS)

    return _run_guarded(scenario, f"{scenario.engine} zeta sweep",
                        lambda: _map(point, list(scenario.sweep_values), workers, "zeta"))


def _wigner_rows(engine: str, zeta: float, rho_cat: DensityMatrix, extent: float, points: int) -> pd.DataFrame:
    axis = np.linspace(-extent, extent, points)
    values = wigner_grid(rho_cat, axis, axis)
    xs, ps = np.meshgrid(axis, axis)
    return pd.DataFrame({"engine": engine, "zeta": zeta, "x": xs.ravel(), "p": ps.ravel(),
                         "W": values.ravel()}, columns=list(WIGNER_COLUMNS))


def run_cat_maps(scenario: Scenario, workers: int = 1) -> Tuple[List[MetricsRecord], pd.DataFrame]:
    """Remote cat states for each zeta: fidelity table plus single-mode Wigner maps."""
    if scenario.engine not in ("pure", "steady", "both"):
        raise ValueError(f"Cat maps need engine 'pure', 'steady' or 'both', got {scenario.engine!r}")
    engines = ("pure", "steady") if scenario.engine == "both" else (scenario.engine,)
    jobs = [(engine, zeta) for engine in engines for zeta in scenario.sweep_values]
    readout = _readout(scenario)

    def point(job):
        engine, zeta = job
        if engine == "pure":
            rho_b, leakage = _pure_state(zeta, scenario.cutoffs[1:])
        else:
            rho_b, leakage = solve_steady(scenario, with_zeta(scenario.base_params, zeta))
        cat = prepare_cat(rho_b, readout, zeta, scenario.x_outcome)
        record = MetricsRecord(parameters={"engine": engine, "zeta": zeta}, F_cat=cat.fidelity,
                               F_cat_nominal=cat.nominal_fidelity, W_min_cat=cat.wigner_min, leakage=leakage)
        grid = _wigner_rows(engine, zeta, cat.rho_cat, scenario.grid_extent, scenario.grid_points)
        return record, grid

    def body():
        results = _map(point, jobs, workers, "cat")
        records = [record for record, _ in results]
        grids = pd.concat([grid for _, grid in results], ignore_index=True)
        return records, grids
    return _run_guarded(scenario, "cat maps", body)


def run_thermal_sweep(scenario: Scenario, workers: int = 1) -> List[MetricsRecord]:
    """Steady-state metrics and remote cats against the thermal phonon occupation of both membranes."""
    if scenario.sweep_axis != "nbar":
        raise ValueError(f"Thermal sweeps need sweep axis 'nbar', got {scenario.sweep_axis!r}")
    base = scenario.base_params
    zeta = derive(base).zeta
    readout = _readout(scenario)
    nonthermal = tuple(c for c in THERMAL_COLUMNS if not c.startswith(("F_cat", "W_min_cat")))

    def point(nbar):
        params = replace(base, nbar_b1=nbar, nbar_b2=nbar)
        rho_b, leakage = solve_steady(scenario, params)
        parameters = {"nbar": nbar}
        if scenario.frequency_hz is not None:
            parameters["T_K"] = thermal_temperature(scenario.frequency_hz, nbar)
        record = evaluate_metrics(rho_b, zeta, parameters, leakage, nonthermal)
        cat = prepare_cat(rho_b, readout, zeta, scenario.x_outcome)
        return replace(record, F_cat=cat.fidelity, F_cat_nominal=cat.nominal_fidelity, W_min_cat=cat.wigner_min)

    return _run_guarded(scenario, "thermal sweep",
                        lambda: _map(point, list(scenario.sweep_values), workers, "nbar"))


def records_frame(records: Sequence[MetricsRecord], columns: Sequence[str]) -> pd.DataFrame:
    rows = [record.to_row(columns) for record in records]
    leading = [key for key in rows[0] if key not in columns] if rows else []
    return pd.DataFrame(rows, columns=leading + list(columns))


def write_csv(frame: pd.DataFrame, path: str):
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Results saved to {path}")
