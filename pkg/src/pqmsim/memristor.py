"""Single photonic quantum memristor: a beamsplitter whose reflectivity is
the moving-window average of its own input photon number.

Mode/qubit order is (A, B) at the input and (C, D) at the output; C is the
transmitted output, D the feedback branch that gets measured.
"""
from collections import deque
from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import expm

from . import qstate
from .trace import Trace, TraceRecord

N_MAX = 1.0          # <n_max> for single-photon inputs
EPS_R = 0.01         # estimator guard: below this R the p/R inversion is held
_CLOSED_FORM_DENOMINATOR = 4 * math.pi   # fault-injection hook for selftest


class DriveSignal:
    """Single-mode drive: alpha = cos(pi t / T_osc), beta = sin(pi t / T_osc)."""

    kind = "single_cos_sin"

    def __init__(self, T_osc=1.0):
        if T_osc <= 0:
            raise ValueError("T_osc must be positive")
        self.T_osc = float(T_osc)

    def amplitudes_at(self, t):
        x = math.pi * t / self.T_osc
        return math.cos(x), math.sin(x)

    def n_in(self, t):
        return self.amplitudes_at(t)[1] ** 2

    def __repr__(self):
        return f"DriveSignal(T_osc={self.T_osc})"


def amplitudes_at(drive, t):
    return drive.amplitudes_at(t)


def reflectivity_closed_form(t, T_int, T_osc):
    """Reflectivity of the window law for the cos/sin drive, evaluated exactly."""
    if T_int <= 0 or T_osc <= 0:
        raise ValueError("T_int and T_osc must be positive")
    w = 2 * np.pi / T_osc
    r = (T_osc / T_int) * (np.sin(w * (np.asarray(t) - T_int)) - np.sin(w * np.asarray(t)))
    r = r / _CLOSED_FORM_DENOMINATOR + 0.5
    if T_int <= T_osc:
        assert np.all((r >= -1e-12) & (r <= 1 + 1e-12)), "closed-form R left [0, 1]"
    return r


class MemristorState:
    """Reflectivity plus the memory window of past <n_in> samples.

    ``R = 0.5 + (1/T_int) * integral_{t-T_int}^{t} (n - 0.5) dt'`` with the
    trapezoidal rule over the buffered samples.  The buffer keeps one sample
    at or before ``t - T_int`` so the window edge can be interpolated when
    ``T_int`` is not a multiple of ``dt``.

    With a window that is not yet full (cold start) the integral is
    normalized by the elapsed span instead of ``T_int``.
    """

    _RESUM_EVERY = 4096

    def __init__(self, T_int, dt, R0=0.5):
        if T_int <= 0 or dt <= 0:
            raise ValueError("T_int and dt must be positive")
        if dt >= T_int:
            raise ValueError("dt must be smaller than T_int")
        self.T_int = float(T_int)
        self.dt = float(dt)
        self.R = float(R0)
        self.window = deque()     # (t, n - 0.5)
        self.clamp_events = 0
        self._sum = 0.0           # trapezoid integral over the whole buffer
        self._pushes = 0
        self._eps = 1e-9 * self.dt

    @classmethod
    def prefilled(cls, T_int, dt, n_of_t):
        """Window filled from ``n_of_t`` on the grid t = -m*dt ... -dt."""
        state = cls(T_int, dt)
        m = math.ceil(T_int / dt - 1e-9)
        for j in range(m, 0, -1):
            state.push(-j * dt, n_of_t(-j * dt))
        return state

    def push(self, t, n):
        """Add the sample ``n`` taken at time ``t`` and return the new R."""
        t = float(t)
        y = float(n) - 0.5 * N_MAX
        win = self.window
        if win:
            t_last, y_last = win[-1]
            if t <= t_last + self._eps:
                raise ValueError(f"time must increase (got {t} after {t_last})")
            self._sum += 0.5 * (t - t_last) * (y + y_last)
        win.append((t, y))
        self._pushes += 1

        lower = t - self.T_int
        while len(win) >= 2 and win[1][0] <= lower + self._eps:
            (t0, y0), (t1, y1) = win[0], win[1]
            self._sum -= 0.5 * (t1 - t0) * (y0 + y1)
            win.popleft()
        if self._pushes % self._RESUM_EVERY == 0:
            self._resum()

        t0, y0 = win[0]
        if len(win) == 1:
            R = 0.5
        elif t0 > lower + self._eps:
            R = 0.5 + self._sum / (t - t0)
        else:
            t1, y1 = win[1]
            cut = lower - t0
            if cut > self._eps:
                y_cut = y0 + (y1 - y0) * cut / (t1 - t0)
                integral = self._sum - 0.5 * cut * (y0 + y_cut)
            else:
                integral = self._sum
            R = 0.5 + integral / self.T_int
        if R < -1e-12 or R > 1.0 + 1e-12:
            self.clamp_events += 1    # round-off excursions are not counted
        R = min(max(R, 0.0), 1.0)
        self.R = R
        return R

    def _resum(self):
        ts = np.fromiter((s[0] for s in self.window), float)
        ys = np.fromiter((s[1] for s in self.window), float)
        self._sum = float(np.sum(0.5 * np.diff(ts) * (ys[1:] + ys[:-1])))


def reflectivity_update(state, t, n_in_sample):
    if not -1e-12 <= n_in_sample <= N_MAX + 1e-12:
        raise ValueError("n_in sample outside [0, 1]")
    state.push(t, n_in_sample)
    return state


def pqm_unitary(R):
    """4x4 beamsplitter acting on the <=1-photon sector of modes (A, B)."""
    if R < -1e-12 or R > 1 + 1e-12:
        raise ValueError(f"reflectivity {R} outside [0, 1]")
    R = min(max(R, 0.0), 1.0)
    c, s = math.sqrt(1 - R), 1j * math.sqrt(R)
    return np.array([[1, 0, 0, 0],
                     [0, c, s, 0],
                     [0, s, c, 0],
                     [0, 0, 0, 1]], dtype=complex)


def theta_from_reflectivity(R):
    if R < 0 or R > 1:
        raise ValueError(f"reflectivity {R} outside [0, 1]")
    return math.asin(math.sqrt(R))


def single_excitation_block(theta):
    """exp(i theta (b^dag a + b a^dag)) restricted to span{|01>, |10>}."""
    return expm(1j * theta * np.array([[0, 1], [1, 0]], dtype=complex))


@dataclass(frozen=True)
class StepOutput:
    rho_out_C: np.ndarray
    p_meas_D: float
    n_out: float


def step_single(alpha, beta, R):
    """Send alpha|0> + beta|1> through the device at reflectivity R."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-12:
        raise ValueError("input amplitudes are not normalized")
    psi_in = qstate.tensor(np.array([alpha, beta], dtype=complex), qstate.basis_state("0"))
    psi_out = pqm_unitary(R) @ psi_in
    rho = qstate.to_density(psi_out)
    rho_c = qstate.partial_trace(rho, [0])
    return StepOutput(rho_out_C=rho_c,
                      p_meas_D=qstate.mean_photon_number(rho, 1),
                      n_out=float(rho_c[1, 1].real))


def output_density_closed_form(alpha, beta, R):
    """Traced output of mode C written out entry by entry."""
    a, b = complex(alpha), complex(beta)
    c = math.sqrt(1 - R)
    return np.array([[abs(a) ** 2 + abs(b) ** 2 * R, a * b.conjugate() * c],
                     [a.conjugate() * b * c, abs(b) ** 2 * (1 - R)]], dtype=complex)


def output_coherence_closed_form(alpha, beta, R):
    return 2 * abs(alpha * beta) * math.sqrt(1 - R)


def estimate_n_in(p_meas, R, previous=0.0, eps_R=EPS_R):
    """Invert p = R * n_in.  Returns ``(n_in, degenerate)``.

    Below ``eps_R`` the division is unreliable; the previous estimate is
    returned and ``degenerate`` is True.
    """
    if R < eps_R:
        return previous, True
    return min(max(p_meas / R, 0.0), N_MAX), False


def run_single_trace(T_int, T_osc=1.0, dt=None, n_periods=1, cold=False):
    """Drive one device with the cos/sin input and record every step.

    Records run from t = 0 to t = n_periods * T_osc inclusive.  The device
    estimates <n_in> by inverting the click probability on mode D exactly
    (infinite statistics), so the window receives the true photon number.
    """
    drive = DriveSignal(T_osc)
    if dt is None:
        dt = T_osc / 1e4
    if dt >= T_int:
        raise ValueError("dt must be smaller than T_int")
    if cold:
        mem = MemristorState(T_int, dt)
    else:
        mem = MemristorState.prefilled(T_int, dt, drive.n_in)
    n_steps = int(round(n_periods * T_osc / dt))
    records = []
    for k in range(n_steps + 1):
        t = k * dt
        alpha, beta = drive.amplitudes_at(t)
        n_in = beta * beta
        R = mem.push(t, n_in)
        out = step_single(alpha, beta, R)
        records.append(TraceRecord(
            t=t, n_in=n_in, n_out=out.n_out, R=R,
            c_l1_in=qstate.l1_coherence(qstate.to_density([alpha, beta])),
            c_l1_out=qstate.l1_coherence(out.rho_out_C)))
    info = {"T_int": T_int, "T_osc": T_osc, "dt": dt, "n_periods": n_periods,
            "cold": cold, "clamp_events": mem.clamp_events}
    return Trace(records, info)
