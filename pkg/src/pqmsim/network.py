"""Two independent memristors fed by a time-dependent Bell pair.

Joint qubit order is (A, B, A', B'): photon A enters the first device with
vacuum ancilla B, photon A' the second with ancilla B'.  After the
beamsplitters the same qubits carry (C, D, C', D'); D and D' are measured
and traced out.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import qstate
from .memristor import MemristorState, estimate_n_in, pqm_unitary
from .trace import Trace, TraceRecord

FLAVORS = ("psi+", "psi-", "phi+", "phi-")
_ALIASES = {"Ψ+": "psi+", "Ψ-": "psi-", "Ψ−": "psi-",
            "Φ+": "phi+", "Φ-": "phi-", "Φ−": "phi-"}


def normalize_flavor(flavor):
    f = _ALIASES.get(flavor, str(flavor).lower())
    if f not in FLAVORS:
        raise ValueError(f"unknown Bell flavor {flavor!r}; expected one of {FLAVORS}")
    return f


@dataclass(frozen=True)
class BellDrive:
    """alpha = sin(pi t/T_osc), beta = cos(pi t/T_osc) on one Bell flavor."""

    flavor: str
    T_osc: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "flavor", normalize_flavor(self.flavor))
        if self.T_osc <= 0:
            raise ValueError("T_osc must be positive")

    def amplitudes_at(self, t):
        x = math.pi * t / self.T_osc
        return math.sin(x), math.cos(x)

    def state_at(self, t):
        return bell_state_at(self, t)


def bell_state_at(drive, t):
    alpha, beta = drive.amplitudes_at(t)
    sign = 1.0 if drive.flavor.endswith("+") else -1.0
    psi = np.zeros(4, dtype=complex)
    if drive.flavor.startswith("psi"):
        psi[0b01], psi[0b10] = alpha, sign * beta
    else:
        psi[0b00], psi[0b11] = alpha, sign * beta
    return psi


def local_mean_photon(psi):
    return (qstate.mean_photon_number(psi, 0), qstate.mean_photon_number(psi, 1))


# Embedding |a a'> -> |a 0 a' 0> in the (A, B, A', B') register.
_EMBED = np.zeros((16, 4))
for _a in (0, 1):
    for _b in (0, 1):
        _EMBED[8 * _a + 2 * _b, 2 * _a + _b] = 1.0


def joint_unitary(R, R_prime, order="UU'"):
    """U(R) on (A, B) and U(R') on (A', B').  Both orders are the same map."""
    eye = np.eye(4)
    u1 = np.kron(pqm_unitary(R), eye)
    u2 = np.kron(eye, pqm_unitary(R_prime))
    return u1 @ u2 if order == "UU'" else u2 @ u1


def step_pair(psi_in, R, R_prime):
    """Output density matrix on (C, C') for a two-photon input on (A, A')."""
    psi16 = _EMBED @ np.asarray(psi_in, dtype=complex)
    out = joint_unitary(R, R_prime) @ psi16
    return qstate.partial_trace(qstate.to_density(out), [0, 2])


def step_pair_factor(psi_in, R, R_prime):
    """Matrix V with rho_CC' = V V^dag: column (d, d') is the unnormalised
    state of (C, C') given the ancillas read (d, d')."""
    psi16 = _EMBED @ np.asarray(psi_in, dtype=complex)
    out = (joint_unitary(R, R_prime) @ psi16).reshape(2, 2, 2, 2)
    return out.transpose(0, 2, 1, 3).reshape(4, 4)


def concurrence_out_closed_form(alpha, beta, R, R_prime, flavor):
    """Output concurrence for real amplitudes, clamped at zero."""
    flavor = normalize_flavor(flavor)
    a, b = abs(alpha), abs(beta)
    damp = math.sqrt(1 - R) * math.sqrt(1 - R_prime)
    if flavor.startswith("psi"):
        return 2 * a * b * damp
    return max(0.0, 2 * b * damp * (a - b * math.sqrt(R) * math.sqrt(R_prime)))


def coherence_out_closed_form(alpha, beta, R, R_prime):
    return 2 * abs(alpha * beta) * math.sqrt(1 - R) * math.sqrt(1 - R_prime)


def _local_feedback(n, R):
    # click probability on this device's own D mode, inverted back to <n>
    if R <= 0.0:
        return n
    return estimate_n_in(R * n, R, eps_R=0.0)[0]


class PairState:
    """Two memristors with no shared state, plus the last output."""

    def __init__(self, mem1, mem2):
        if mem1 is mem2:
            raise ValueError("the two devices must not share state")
        self.mem1, self.mem2 = mem1, mem2
        self.rho_out = None


def run_pair_trace(flavor, T_int, T_osc=1.0, dt=None, n_periods=1):
    """Simulate both devices over ``n_periods`` drive periods.

    Each device inverts its own click probability (p = R * n) to get the
    local <n>; nothing is communicated between them.  The numeric output
    concurrence and coherence are compared with the closed forms at every
    step; the worst deviations land in ``info``.
    """
    drive = BellDrive(flavor, T_osc)
    if dt is None:
        dt = T_osc / 1e4
    if dt >= T_int:
        raise ValueError("dt must be smaller than T_int")
    pair = PairState(
        MemristorState.prefilled(T_int, dt, lambda t: local_mean_photon(drive.state_at(t))[0]),
        MemristorState.prefilled(T_int, dt, lambda t: local_mean_photon(drive.state_at(t))[1]))
    n_steps = int(round(n_periods * T_osc / dt))
    records = []
    dev_conc = dev_coh = 0.0
    R, Rp = pair.mem1.R, pair.mem2.R
    for k in range(n_steps + 1):
        t = k * dt
        psi = drive.state_at(t)
        n1, n2 = local_mean_photon(psi)
        R = pair.mem1.push(t, _local_feedback(n1, R))
        Rp = pair.mem2.push(t, _local_feedback(n2, Rp))
        rho = step_pair(psi, R, Rp)
        pair.rho_out = rho
        rho_in = qstate.to_density(psi)
        # the purification keeps amplitudes that rho only holds squared
        conc_out = qstate.concurrence_from_factor(step_pair_factor(psi, R, Rp))
        coh_out = qstate.l1_coherence(rho)
        alpha, beta = drive.amplitudes_at(t)
        dev_conc = max(dev_conc, abs(conc_out - concurrence_out_closed_form(alpha, beta, R, Rp, flavor)))
        dev_coh = max(dev_coh, abs(coh_out - coherence_out_closed_form(alpha, beta, R, Rp)))
        records.append(TraceRecord(
            t=t, n_in=n1, n_out=qstate.mean_photon_number(rho, 0), R=R, R_prime=Rp,
            c_l1_in=qstate.l1_coherence(rho_in), c_l1_out=coh_out,
            conc_in=qstate.concurrence_pure(psi), conc_out=conc_out))
    info = {"flavor": drive.flavor, "T_int": T_int, "T_osc": T_osc, "dt": dt,
            "n_periods": n_periods,
            "clamp_events": pair.mem1.clamp_events + pair.mem2.clamp_events,
            "max_conc_deviation": dev_conc, "max_coh_deviation": dev_coh}
    return Trace(records, info)
