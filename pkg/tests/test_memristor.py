import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pqmsim import hysteresis, memristor, qstate
from pqmsim.memristor import (DriveSignal, MemristorState, estimate_n_in, output_coherence_closed_form,
                              output_density_closed_form, pqm_unitary, reflectivity_closed_form,
                              run_single_trace, single_excitation_block, step_single,
                              theta_from_reflectivity)

S2 = 1 / math.sqrt(2)


# --- oracles -----------------------------------------------------------------

def reflectivity_by_quadrature(t, T_int, T_osc):
    """Window average of sin^2(pi s / T_osc) by adaptive quadrature."""
    val, _ = quad(lambda s: math.sin(math.pi * s / T_osc) ** 2 - 0.5, t - T_int, t, limit=200)
    return 0.5 + val / T_int


# --- drive and closed form ---------------------------------------------------------

def test_amplitudes():
    d = DriveSignal(1.0)
    assert d.amplitudes_at(0) == pytest.approx((1, 0))
    assert d.amplitudes_at(0.5) == pytest.approx((0, 1), abs=1e-15)
    assert d.amplitudes_at(0.25) == pytest.approx((S2, S2))
    assert memristor.amplitudes_at(d, 0.25) == d.amplitudes_at(0.25)


def test_closed_form_examples():
    assert reflectivity_closed_form(0.37, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert reflectivity_closed_form(0.25, 0.5, 1.0) == pytest.approx(0.5 - 1 / math.pi, abs=1e-12)
    # window [-0.5, 0] averages sin^2 over exactly half a period
    assert reflectivity_closed_form(0.0, 0.5, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert reflectivity_closed_form(0.75, 0.5, 1.0) == pytest.approx(0.5 + 1 / math.pi, abs=1e-12)
    for t in (0.0, 0.25, 0.75):
        assert reflectivity_closed_form(t, 0.5, 1.0) == pytest.approx(reflectivity_by_quadrature(t, 0.5, 1.0), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3), st.floats(0.02, 2.0), st.floats(0.5, 2.0))
def test_closed_form_matches_quadrature(t, T_int, T_osc):
    assert abs(reflectivity_closed_form(t, T_int, T_osc) - reflectivity_by_quadrature(t, T_int, T_osc)) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 3), st.floats(0.01, 1.0))
def test_closed_form_bounded(t, T_int):
    r = reflectivity_closed_form(t, T_int, 1.0)
    assert 0 <= r <= 1


# --- window update -----------------------------------------------------------------

def test_constant_half_gives_half():
    mem = MemristorState(0.1, 0.01)
    for k in range(30):
        memristor.reflectivity_update(mem, k * 0.01, 0.5)
    assert mem.R == pytest.approx(0.5, abs=1e-15)


def test_constant_one_saturates():
    mem = MemristorState(0.1, 0.01)
    for k in range(30):
        mem.push(k * 0.01, 1.0)
    assert mem.R == pytest.approx(1.0, abs=1e-12)
    assert mem.clamp_events == 0


def test_update_rejects_bad_sample_and_time():
    mem = MemristorState(0.1, 0.01)
    with pytest.raises(ValueError):
        memristor.reflectivity_update(mem, 0.0, 1.5)
    mem.push(0.0, 0.2)
    with pytest.raises(ValueError):
        mem.push(0.0, 0.2)


@pytest.mark.parametrize("T_int", [0.1, 0.25, 0.5, 1.0, 1 / 3])
def test_window_matches_closed_form(T_int):
    dt = 1e-4
    drive = DriveSignal(1.0)
    mem = MemristorState.prefilled(T_int, dt, drive.n_in)
    t = np.arange(30001) * dt
    R = np.array([mem.push(tk, drive.n_in(tk)) for tk in t])
    assert np.max(np.abs(R - reflectivity_closed_form(t, T_int, 1.0))) <= 1e-6
    assert mem.clamp_events == 0


def test_coarse_window_error():
    dt = 1e-2
    drive = DriveSignal(1.0)
    mem = MemristorState.prefilled(0.25, dt, drive.n_in)
    t = np.arange(301) * dt
    R = np.array([mem.push(tk, drive.n_in(tk)) for tk in t])
    assert np.max(np.abs(R - reflectivity_closed_form(t, 0.25, 1.0))) <= 1e-3


def test_cold_start_normalises_by_elapsed_span():
    mem = MemristorState(1.0, 0.1)
    assert mem.push(0.0, 0.9) == 0.5
    # trapezoid of (0.9, 0.7) over 0.1, divided by 0.1
    assert mem.push(0.1, 0.7) == pytest.approx(0.8)


def test_clamp_counter():
    mem = MemristorState(0.1, 0.01)
    mem.window.append((0.0, 0.5))
    mem._sum = 1.0          # force an out-of-range integral
    mem.push(0.05, 1.0)
    assert mem.R == 1.0 and mem.clamp_events == 1


# --- beamsplitter ---------------------------------------------------------------------

def test_unitary_examples():
    assert np.allclose(pqm_unitary(0), np.eye(4))
    u1 = pqm_unitary(1)
    assert np.allclose(u1[1:3, 1:3], [[0, 1j], [1j, 0]])
    u = pqm_unitary(0.5)
    assert u[1, 1] == pytest.approx(math.sqrt(0.5)) and u[1, 2] == pytest.approx(1j * math.sqrt(0.5))
    with pytest.raises(ValueError):
        pqm_unitary(1.1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1))
def test_unitary_is_unitary(R):
    u = pqm_unitary(R)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_theta_and_matrix_exponential_oracle():
    assert theta_from_reflectivity(0) == 0
    assert theta_from_reflectivity(1) == pytest.approx(math.pi / 2)
    assert theta_from_reflectivity(0.5) == pytest.approx(math.pi / 4)
    for R in (0.0, 0.2, 0.5, 0.9, 1.0):
        block = single_excitation_block(theta_from_reflectivity(R))
        assert np.allclose(block, pqm_unitary(R)[1:3, 1:3], atol=1e-12)


def test_step_examples():
    out = step_single(1.0, 0.0, 0.3)
    assert np.allclose(out.rho_out_C, [[1, 0], [0, 0]]) and out.p_meas_D == pytest.approx(0)
    out = step_single(0.0, 1.0, 1.0)
    assert np.allclose(out.rho_out_C, [[1, 0], [0, 0]]) and out.p_meas_D == pytest.approx(1)
    out = step_single(S2, S2, 0.5)
    c = 0.5 * math.sqrt(0.5)
    assert np.allclose(out.rho_out_C, [[0.75, c], [c, 0.25]], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 1))
def test_step_matches_closed_forms(angle, R):
    a, b = math.cos(angle), math.sin(angle)
    out = step_single(a, b, R)
    rho = output_density_closed_form(a, b, R)
    assert np.max(np.abs(out.rho_out_C - rho)) <= 1e-12
    assert abs(out.n_out + out.p_meas_D - b * b) <= 1e-12
    assert abs(out.p_meas_D - R * b * b) <= 1e-12
    assert abs(qstate.l1_coherence(out.rho_out_C) - output_coherence_closed_form(a, b, R)) <= 1e-12
    assert abs(qstate.purity(out.rho_out_C) - qstate.purity(rho)) <= 1e-12
    assert np.allclose(out.rho_out_C, out.rho_out_C.conj().T)


def test_coherence_closed_form_examples():
    assert output_coherence_closed_form(1.0, 0.0, 0.4) == 0
    assert output_coherence_closed_form(S2, S2, 0.0) == pytest.approx(1)
    val = output_coherence_closed_form(S2, S2, 0.5)
    assert val == pytest.approx(0.70711, abs=1e-5)
    assert val == pytest.approx(qstate.l1_coherence(step_single(S2, S2, 0.5).rho_out_C), abs=1e-12)


def test_estimator():
    assert estimate_n_in(0.25, 0.5) == (0.5, False)
    assert estimate_n_in(0.0, 0.3) == (0.0, False)
    assert estimate_n_in(0.3, 0.005, previous=0.42) == (0.42, True)


# --- traces -----------------------------------------------------------------------------

def test_fifty_fifty_trace():
    tr = run_single_trace(1.0, dt=1e-3)
    assert np.max(np.abs(tr.column("R") - 0.5)) <= 1e-9
    assert np.max(np.abs(tr.column("n_out") - 0.5 * tr.column("n_in"))) <= 1e-9
    assert hysteresis.form_factor(hysteresis.loop_from_trace(tr, "n_in", "n_out")).form_factor <= 1e-3


def test_half_period_trace_is_pinched_loop():
    tr = run_single_trace(0.5, dt=1e-3)
    loop = hysteresis.loop_from_trace(tr, "n_in", "n_out")
    assert np.hypot(*(loop.points[0] - loop.points[-1])) <= 1e-9
    rep = hysteresis.form_factor(loop)
    assert rep.form_factor > 0.1
    assert len(rep.pinch_points) == 1
    assert np.allclose(rep.pinch_points[0], (0, 0), atol=1e-9)


def test_trace_columns_and_coherence():
    tr = run_single_trace(0.3, dt=1e-3)
    assert tr.columns() == ("t", "n_in", "n_out", "R", "c_l1_in", "c_l1_out")
    drive = DriveSignal(1.0)
    for rec in tr:
        a, b = drive.amplitudes_at(rec.t)
        assert abs(rec.c_l1_out - output_coherence_closed_form(a, b, rec.R)) <= 1e-12
        assert abs(rec.c_l1_in - 2 * abs(a * b)) <= 1e-12
    assert tr.info["clamp_events"] == 0


def test_trace_rejects_dt_not_below_window():
    with pytest.raises(ValueError):
        run_single_trace(0.01, dt=0.02)


def test_cold_trace_converges_after_one_window():
    cold = run_single_trace(0.25, dt=1e-3, n_periods=2, cold=True)
    warm = run_single_trace(0.25, dt=1e-3, n_periods=2)
    late = cold.column("t") > 0.3
    assert np.max(np.abs(cold.column("R")[late] - warm.column("R")[late])) <= 1e-12
