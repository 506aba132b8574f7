import math

import numpy as np
import pytest

from pqmsim import hysteresis
from pqmsim.digital import (DigitalConfig, ancilla_probability, build_step_circuit, circuit_statevector,
                            ry, ry_angle_for_input, run_digital, sample_counts, step_rng)
from pqmsim.experiments import digital_loop
from pqmsim.memristor import pqm_unitary, reflectivity_closed_form, run_single_trace

S2 = 1 / math.sqrt(2)


def test_ry_angle_examples():
    assert ry_angle_for_input(0, 1) == 0
    assert ry_angle_for_input(0.25, 1) == pytest.approx(math.pi / 2)
    assert ry_angle_for_input(0.5, 1) == pytest.approx(math.pi)
    assert np.allclose(ry(0) @ [1, 0], [1, 0])
    assert np.allclose(ry(math.pi / 2) @ [1, 0], [S2, S2])
    assert np.allclose(ry(math.pi) @ [1, 0], [0, 1])


def test_prepared_state_follows_drive():
    for t in np.linspace(0, 1, 17):
        psi = ry(ry_angle_for_input(t, 1.0)) @ np.array([1, 0])
        assert np.allclose(np.abs(psi), np.abs([math.cos(math.pi * t), math.sin(math.pi * t)]))


def test_circuit_examples():
    c = build_step_circuit(0, 0.5, 1.0)
    assert c.prep_angle == 0 and np.allclose(c.unitary, pqm_unitary(0.5))
    assert ancilla_probability(build_step_circuit(0.25, 0.0, 1.0)) == pytest.approx(0, abs=1e-15)
    assert ancilla_probability(build_step_circuit(0.5, 1.0, 1.0)) == pytest.approx(1)
    assert ancilla_probability(build_step_circuit(0.5, 0.5, 1.0)) == pytest.approx(0.5)
    assert ancilla_probability(build_step_circuit(0.0, 0.7, 1.0)) == pytest.approx(0, abs=1e-15)
    assert ancilla_probability(build_step_circuit(0.25, 1.0, 1.0)) == pytest.approx(0.5)
    assert np.linalg.norm(circuit_statevector(build_step_circuit(0.3, 0.4, 1.0))) == pytest.approx(1)


def test_sample_counts_edges():
    rng = step_rng(0, 0)
    assert sample_counts(0.0, 4092, rng).ones == 0
    assert sample_counts(1.0, 4092, rng).ones == 4092
    assert sample_counts(1.0, 10, rng, readout_flip=1.0).ones == 0


def test_binomial_spread_oracle():
    p_hat = np.array([sample_counts(0.5, 4092, step_rng(11, k)).p_hat for k in range(1000)])
    expected = math.sqrt(0.25 / 4092)
    assert expected == pytest.approx(0.0078, abs=1e-4)
    assert abs(p_hat.std(ddof=1) / expected - 1) <= 0.2
    assert abs(p_hat.mean() - 0.5) <= 5 * expected / math.sqrt(1000)


def test_streams_are_distinct_and_reproducible():
    a = step_rng(3, 5).integers(0, 2**32, 4)
    assert np.array_equal(a, step_rng(3, 5).integers(0, 2**32, 4))
    assert not np.array_equal(a, step_rng(3, 6).integers(0, 2**32, 4))
    assert not np.array_equal(a, step_rng(4, 5).integers(0, 2**32, 4))


def test_config_validation_and_budget():
    cfg = DigitalConfig()
    assert cfg.qubit_budget == 28 and cfg.shots == 4092 and cfg.feedback_mode == "sampled"
    with pytest.raises(ValueError):
        DigitalConfig(feedback_mode="psychic")
    with pytest.raises(ValueError):
        DigitalConfig(shots=0)
    with pytest.raises(ValueError):
        run_digital(DigitalConfig(n_steps=2, T_int=0.25))


def test_exact_mode_equals_analytic_trace():
    n = 10000
    dig = run_digital(DigitalConfig(n_steps=n, feedback_mode="exact_probability"))
    ana = run_single_trace(0.5, dt=1.0 / n)
    for name in ("n_in", "n_out", "R"):
        assert np.max(np.abs(dig.column(name) - ana.column(name)[:n])) <= 1e-9
    assert np.max(np.abs(dig.column("R") - reflectivity_closed_form(dig.column("t"), 0.5, 1.0))) <= 1e-3
    assert dig.info["qubit_budget"] == 2 * n


def test_sampled_mode_is_deterministic():
    cfg = DigitalConfig(seed=42)
    a, b = run_digital(cfg), run_digital(cfg)
    assert [r for r in a] == [r for r in b]
    assert a.info["shots"] == b.info["shots"]
    assert [r for r in run_digital(DigitalConfig(seed=43))] != [r for r in a]


def test_sampled_mode_converges_with_shots():
    exact = run_digital(DigitalConfig(feedback_mode="exact_probability"))
    big = run_digital(DigitalConfig(shots=10**6, seed=1))
    assert np.max(np.abs(big.column("R") - exact.column("R"))) < 1e-2


def test_trace_columns_and_estimator_guard():
    tr = run_digital(DigitalConfig(seed=0))
    assert tr.columns() == ("t", "n_in", "n_out", "R", "p_meas")
    assert len(tr) == 14
    assert tr.info["degenerate_steps"] == 0


def test_sampled_loop_is_pinched_for_most_seeds():
    pinched = 0
    for seed in range(100):
        rep = hysteresis.form_factor(digital_loop(run_digital(DigitalConfig(seed=seed)), smooth=True))
        pinched += len(rep.pinch_points) >= 1
    assert pinched >= 95
