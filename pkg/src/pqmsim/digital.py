"""Gate-level, time-stepped emulation of one memristor with shot noise.

Each step is a fresh two-qubit circuit: Ry on the input qubit, the
beamsplitter unitary at the current reflectivity, and a measurement of the
ancilla.  The click frequency is inverted to an input estimate that feeds
the reflectivity window for the following steps.

Shots are drawn as one binomial sample per step from the exact ancilla
probability, which has the same statistics as repeating the circuit.
Random streams are Philox (counter-based) keyed by ``(seed, step)`` so a
run is reproducible and steps never share a stream.
"""
from dataclasses import asdict, dataclass
import math

import numpy as np

from . import qstate
from .memristor import EPS_R, DriveSignal, MemristorState, estimate_n_in, pqm_unitary
from .trace import Trace, TraceRecord

DEFAULT_SHOTS = 4092
FEEDBACK_MODES = ("exact_probability", "sampled")


@dataclass(frozen=True)
class StepCircuit:
    prep_angle: float
    unitary: np.ndarray
    measured_qubit: int = 1


@dataclass(frozen=True)
class ShotResult:
    shots: int
    ones: int

    @property
    def p_hat(self):
        return self.ones / self.shots


@dataclass(frozen=True)
class DigitalConfig:
    n_steps: int = 14
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    feedback_mode: str = "sampled"
    T_int: float = 0.5
    T_osc: float = 1.0
    n_periods: int = 1
    readout_flip: float = 0.0
    eps_R: float = EPS_R

    def __post_init__(self):
        if self.n_steps < 1 or self.shots < 1:
            raise ValueError("n_steps and shots must be positive")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ValueError(f"feedback_mode must be one of {FEEDBACK_MODES}")
        if not 0.0 <= self.readout_flip <= 1.0:
            raise ValueError("readout_flip must be a probability")

    @property
    def dt(self):
        return self.n_periods * self.T_osc / self.n_steps

    @property
    def qubit_budget(self):
        return 2 * self.n_steps

    def as_dict(self):
        return asdict(self)


def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def ry_angle_for_input(t, T_osc):
    """Rotation angle with Ry(theta)|0> = cos(pi t/T)|0> + sin(pi t/T)|1>."""
    if T_osc <= 0:
        raise ValueError("T_osc must be positive")
    return (2 * math.pi * t / T_osc) % (2 * math.pi)


def build_step_circuit(t, R, T_osc):
    return StepCircuit(prep_angle=ry_angle_for_input(t, T_osc), unitary=pqm_unitary(R))


def circuit_statevector(circuit):
    psi = qstate.tensor(ry(circuit.prep_angle) @ qstate.basis_state("0"), qstate.basis_state("0"))
    return circuit.unitary @ psi


def ancilla_probability(circuit):
    """Exact probability of reading 1 on the ancilla."""
    return qstate.mean_photon_number(circuit_statevector(circuit), circuit.measured_qubit)


def step_rng(seed, step):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, step])))


def sample_counts(p, shots, rng, readout_flip=0.0):
    """Binomial shot count for an outcome of probability ``p``."""
    p = min(max(float(p), 0.0), 1.0)
    if readout_flip:
        p = p * (1 - readout_flip) + (1 - p) * readout_flip
    return ShotResult(shots=int(shots), ones=int(rng.binomial(shots, p)))


def run_digital(config):
    """Run ``config.n_steps`` circuits with measurement feedback.

    Step k runs at t = k*dt with the reflectivity left by step k-1, turns
    the ancilla click rate into an estimate of <n_in>, and pushes it into
    the window.  Recorded R is the refreshed value at t and
    ``n_out = (1 - R) * n_in``; ``p_meas`` is the click rate the circuit
    produced.  ``info['qubit_budget']`` is 2 * n_steps (no qubit reuse).
    """
    cfg = config
    dt = cfg.dt
    if dt >= cfg.T_int:
        raise ValueError(f"n_steps={cfg.n_steps} gives dt={dt} >= T_int={cfg.T_int}")
    drive = DriveSignal(cfg.T_osc)
    mem = MemristorState.prefilled(cfg.T_int, dt, drive.n_in)
    sampled = cfg.feedback_mode == "sampled"
    estimate = mem.window[-1][1] + 0.5
    R_initial = mem.R
    degenerate = 0
    records, shot_log = [], []
    for k in range(cfg.n_steps):
        t = k * dt
        R_applied = mem.R
        p = ancilla_probability(build_step_circuit(t, R_applied, cfg.T_osc))
        if sampled:
            shot = sample_counts(p, cfg.shots, step_rng(cfg.seed, k), cfg.readout_flip)
            shot_log.append(shot)
            p = shot.p_hat
        estimate, flagged = estimate_n_in(p, R_applied, previous=estimate, eps_R=cfg.eps_R)
        degenerate += flagged
        R = mem.push(t, estimate)
        records.append(TraceRecord(t=t, n_in=estimate, n_out=(1 - R) * estimate, R=R, p_meas=p))
    info = {"config": cfg.as_dict(), "dt": dt, "R_initial": R_initial, "qubit_budget": cfg.qubit_budget,
            "degenerate_steps": degenerate, "clamp_events": mem.clamp_events,
            "shots": shot_log}
    return Trace(records, info)
