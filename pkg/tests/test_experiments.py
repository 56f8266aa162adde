""" SPDX-License-Identifier: MIT-0 """

import json
import math
import pytest
import numpy as np
import pandas as pd

from dataclasses import replace

import constants
from components.fock_core import HilbertSpace
from components.model import ModelParams, TransferParams, derive
from components.states import PcsSpec, fidelity_pure, pcs, vacuum
from components.experiments import (CAT_COLUMNS, THERMAL_COLUMNS, TRACE_COLUMNS, WIGNER_COLUMNS, ZETA_COLUMNS,
                                    Scenario, records_frame, run_cat_maps, run_fidelity_trace, run_steady,
                                    run_thermal_sweep, run_zeta_sweep, write_csv)


def make_scenario(**changes) -> Scenario:
    base = Scenario(name="unit", model=ModelParams(**constants.REFERENCE_MODEL), cutoffs=(3, 8, 8),
                    sweep_values=(0.0, 0.5))
    return replace(base, **changes)


def test_scenario_validation():
    # Unknown engines, axes and short cutoff lists are rejected
    with pytest.raises(ValueError, match="engine"):
        make_scenario(engine="exact")
    with pytest.raises(ValueError, match="sweep axis"):
        make_scenario(sweep_axis="temperature")
    with pytest.raises(ValueError, match="cutoffs"):
        make_scenario(cutoffs=(4, 14))
    with pytest.raises(ValueError, match="sweep values"):
        make_scenario(sweep_values=(float("nan"),))
    with pytest.raises(ValueError):
        make_scenario(name="")


def test_scenario_echo_round_trip():
    # The JSON echo reproduces the scenario and carries units
    scenario = make_scenario(transfer=TransferParams(**constants.REFERENCE_TRANSFER), frequency_hz=5.0e9,
                             t_ss=1.0e4)
    echo = json.loads(json.dumps(scenario.to_dict()))
    assert Scenario.from_dict(echo) == scenario
    assert echo["units"]["model.gamma_a"] == "omega_b1"
    assert echo["units"]["sweep.frequency_hz"] == "Hz"
    assert echo["units"]["solver.t_ss"] == "1/omega_b1"
    assert echo["model"]["eps_d"] == [constants.REFERENCE_MODEL["eps_d"], 0.0]


def test_base_params_phase_lock():
    # Locked scenarios use a real positive zeta
    zeta = derive(make_scenario().base_params).zeta
    assert abs(zeta.imag) < 1e-12 and zeta.real > 0
    assert make_scenario(lock_zeta_phase=False).base_params == ModelParams(**constants.REFERENCE_MODEL)


def test_steady_time():
    # Steady engines default to the plateau at STEADY_TIME_GAMMA_A / gamma_a; t_ss overrides it
    scenario = make_scenario()
    assert scenario.steady_time == pytest.approx(constants.STEADY_TIME_GAMMA_A / constants.REFERENCE_MODEL["gamma_a"])
    assert make_scenario(t_ss=400.0).steady_time == 400.0
    with pytest.raises(ValueError, match="t_ss"):
        make_scenario(t_ss=0.0)
    with pytest.raises(ValueError, match="t_ss"):
        make_scenario(t_ss=-1.0)


def test_damped_steady_state_is_not_the_dark_state():
    # Mechanical damping at the plateau time leaves the state short of the exact dark state
    model = replace(ModelParams(**constants.REFERENCE_MODEL), gamma_b1=0.0, gamma_b2=0.0)
    dark = run_steady(make_scenario(model=model))
    damped = run_steady(make_scenario())
    assert dark.F > damped.F
    assert damped.F > 0.5


def test_pure_zeta_sweep():
    # zeta = 0 is the vacuum: no entanglement, no non-Gaussianity, no steering
    records = run_zeta_sweep(make_scenario(engine="pure"))
    vacuum_row, pcs_row = records
    assert vacuum_row.parameters == {"zeta": 0.0}
    assert vacuum_row.F == pytest.approx(1.0)
    assert vacuum_row.N < 1e-9
    assert abs(vacuum_row.R_r) < 1e-6
    assert vacuum_row.E_f == pytest.approx(0.0, abs=1e-3)
    assert vacuum_row.W_min >= 0
    assert vacuum_row.E_r[(1, 1)] == pytest.approx(1.0, abs=1e-6)
    assert pcs_row.N > 0 and pcs_row.R_r > 0
    assert pcs_row.E_r[(1, 1)] < 1.0
    assert not pcs_row.leakage_warning


def test_zeta_sweep_is_deterministic_across_workers():
    # Reruns and worker pools give identical rows in input order
    scenario = make_scenario(engine="pure")
    serial = records_frame(run_zeta_sweep(scenario), ZETA_COLUMNS)
    again = records_frame(run_zeta_sweep(scenario), ZETA_COLUMNS)
    pooled = records_frame(run_zeta_sweep(scenario, workers=2), ZETA_COLUMNS)
    pd.testing.assert_frame_equal(serial, again)
    pd.testing.assert_frame_equal(serial, pooled)
    assert list(serial.columns) == ["zeta"] + list(ZETA_COLUMNS)


def test_sweep_engine_checks():
    # Each run accepts only the engines and axes it can serve
    with pytest.raises(ValueError):
        run_zeta_sweep(make_scenario(engine="effective"))
    with pytest.raises(ValueError):
        run_fidelity_trace(make_scenario(engine="pure"))
    with pytest.raises(ValueError):
        run_thermal_sweep(make_scenario())
    with pytest.raises(ValueError):
        run_cat_maps(make_scenario(engine="full"))


def test_effective_trace_starts_at_vacuum_overlap():
    # The first sample is the overlap of the vacuum with the target state
    scenario = make_scenario(engine="effective", t_max=10.0, n_times=3)
    trajectory, frame = run_fidelity_trace(scenario)
    zeta = derive(scenario.base_params).zeta
    expected = fidelity_pure(vacuum(HilbertSpace((8, 8))), pcs(PcsSpec(zeta), HilbertSpace((8, 8))))
    assert list(frame.columns) == list(TRACE_COLUMNS)
    assert len(frame) == 3
    assert frame["F"].iloc[0] == pytest.approx(expected, abs=1e-9)
    assert frame["F"].iloc[-1] > frame["F"].iloc[0]
    assert trajectory.final_state is not None


def test_run_steady_record():
    # A damped steady state gives a valid record with the solved zeta as key
    record = run_steady(make_scenario(cutoffs=(3, 8, 8)))
    assert 0.0 < record.F <= 1.0
    assert record.N >= 0
    assert record.parameters["zeta"] == pytest.approx(abs(derive(make_scenario().base_params).zeta))


def test_cat_maps_pure_engine(tmp_path):
    # One fidelity row per zeta and a square Wigner map with fringes across the real axis
    scenario = make_scenario(engine="pure", cutoffs=(3, 16, 16), sweep_values=(2.0,), grid_points=41)
    records, grids = run_cat_maps(scenario)
    assert 0.965 <= records[0].F_cat <= 0.985
    assert records[0].W_min_cat < 0
    assert list(grids.columns) == list(WIGNER_COLUMNS)
    assert len(grids) == 41 * 41
    axis = grids[np.isclose(grids["p"], 0.0)].sort_values("x")["W"].to_numpy()
    assert np.count_nonzero(np.diff(np.sign(axis[np.abs(axis) > 1e-6]))) >= 2
    path = tmp_path / "cat.csv"
    write_csv(records_frame(records, CAT_COLUMNS), str(path))
    loaded = pd.read_csv(path)
    assert list(loaded.columns) == ["engine", "zeta"] + list(CAT_COLUMNS)
    assert loaded["F_cat"].iloc[0] == records[0].F_cat


def test_records_frame_keeps_missing_metrics():
    # Columns that were not evaluated stay NaN in the frame
    records = run_zeta_sweep(make_scenario(engine="pure", sweep_values=(0.5,)))
    frame = records_frame(records, THERMAL_COLUMNS)
    assert math.isnan(frame["F_cat"].iloc[0])


@pytest.mark.long
def test_dark_state_steady_run():
    # Without mechanical damping the steady run reports F above 0.995
    model = replace(ModelParams(**constants.REFERENCE_MODEL), gamma_b1=0.0, gamma_b2=0.0)
    record = run_steady(make_scenario(model=model, cutoffs=constants.EFFECTIVE_CUTOFFS))
    assert record.F > 0.995


@pytest.mark.long
def test_thermal_sweep_suppresses_steering():
    # Fisher steering vanishes once the membranes carry a couple of thermal phonons
    scenario = make_scenario(sweep_axis="nbar", sweep_values=(0.0, 2.0), cutoffs=(4, 16, 16),
                             transfer=TransferParams(**constants.REFERENCE_TRANSFER), frequency_hz=5.0e9)
    records = run_thermal_sweep(scenario, workers=2)
    assert records[1].E_f == pytest.approx(0.0, abs=1e-3)
    assert records[0].F > records[1].F
    assert "T_K" in records[1].parameters


@pytest.mark.long
def test_damped_steady_plateau_values():
    # At zeta = 2 the damped plateau keeps F near 0.85 and R_r near 1.63
    record = run_steady(make_scenario(cutoffs=constants.EFFECTIVE_CUTOFFS))
    assert record.parameters["zeta"] == pytest.approx(2.0, abs=1e-2)
    assert 0.80 <= record.F <= 0.90
    assert record.R_r == pytest.approx(1.63, abs=0.10)


@pytest.mark.long
def test_full_and_effective_traces_agree():
    # Over the first 5/gamma_a the full and effective fidelity curves stay within 0.05
    horizon = 5.0 / constants.REFERENCE_MODEL["gamma_a"]
    scenario = make_scenario(cutoffs=(4, 10, 10), t_max=horizon, n_times=11)
    _, effective = run_fidelity_trace(replace(scenario, engine="effective"))
    _, full = run_fidelity_trace(replace(scenario, engine="full"))
    np.testing.assert_allclose(full["t"], effective["t"])
    assert np.max(np.abs(full["F"].to_numpy() - effective["F"].to_numpy())) < 0.05


@pytest.mark.long
def test_steady_remote_cat_fidelity():
    # The damped steady state read out through the lossy transfer gives F_cat near 0.82
    scenario = make_scenario(engine="steady", cutoffs=constants.EFFECTIVE_CUTOFFS, sweep_values=(2.0,),
                             transfer=TransferParams(**constants.REFERENCE_TRANSFER), grid_points=21)
    records, _ = run_cat_maps(scenario)
    assert records[0].F_cat == pytest.approx(0.82, abs=0.05)
    assert records[0].W_min_cat < 0


@pytest.mark.long
def test_thermal_robustness_at_ten_phonons():
    # At nbar = 10 the two-mode Wigner function is nonnegative while entanglement and a negative cat remain
    scenario = make_scenario(sweep_axis="nbar", sweep_values=(10.0,), cutoffs=(4, 22, 22),
                             transfer=TransferParams(**constants.REFERENCE_TRANSFER), frequency_hz=5.0e9)
    record = run_thermal_sweep(scenario)[0]
    assert record.W_min >= -1e-3
    assert record.N > 0 and record.R_r > 0
    assert record.F_cat == pytest.approx(0.61, abs=0.07)
    assert record.W_min_cat < 0
    assert record.parameters["T_K"] == pytest.approx(2.5, abs=0.1)


def test_pure_first_order_reid_has_interior_minimum():
    # E_r(1,1) of the pure state dips below its endpoint values inside the zeta range
    zetas = tuple(round(0.2 * k, 10) for k in range(1, 11))
    records = run_zeta_sweep(make_scenario(engine="pure", cutoffs=(3, 16, 16), sweep_values=zetas))
    values = [record.E_r[(1, 1)] for record in records]
    best = int(np.argmin(values))
    assert 0 < best < len(values) - 1


def test_pure_second_order_reid_threshold():
    # E_r(2,2) of the pure state drops below one only past zeta = 0.7
    below = (0.2, 0.4, 0.6)
    above = (0.8, 1.2, 1.6, 2.0)
    records = run_zeta_sweep(make_scenario(engine="pure", cutoffs=(3, 16, 16), sweep_values=below + above))
    values = [record.E_r[(2, 2)] for record in records]
    assert all(v >= 1.0 for v in values[:len(below)])
    assert all(v < 1.0 for v in values[len(below):])


@pytest.mark.long
def test_steady_fisher_steering_threshold():
    # The damped steady state steers in the Fisher sense only above zeta = 0.8
    scenario = make_scenario(engine="steady", cutoffs=constants.EFFECTIVE_CUTOFFS, sweep_values=(0.4, 0.6, 1.2, 2.0))
    values = [record.E_f for record in run_zeta_sweep(scenario, workers=2)]
    assert values[0] == pytest.approx(0.0, abs=1e-3)
    assert values[1] == pytest.approx(0.0, abs=1e-3)
    assert values[2] > 0 and values[3] > 0
