"""End-to-end acceptance checks.

Each ``criterion_N(fast)`` returns a Result; ``fast=True`` lowers the
resolution where the check allows it (used by ``pqmsim selftest``).  The
tolerances never change with ``fast``.
"""
import io
import math
import os
import sys
import tempfile
from typing import NamedTuple

import numpy as np

from . import hysteresis, memristor, qstate
from .digital import DigitalConfig, run_digital
from .experiments import digital_loop, loop_generator, trace_loop
from .network import FLAVORS, run_pair_trace


class Result(NamedTuple):
    id: int
    name: str
    passed: bool
    detail: str


def _result(i, name, passed, detail):
    return Result(i, name, bool(passed), detail)


def criterion_1(fast=False):
    """Window integration against the closed-form reflectivity."""
    T_osc, dt = 1.0, 1e-4
    drive = memristor.DriveSignal(T_osc)
    worst = 0.0
    for T_int in (0.1, 0.25, 0.5, 1.0):
        mem = memristor.MemristorState.prefilled(T_int, dt, drive.n_in)
        t = np.arange(int(round(3 * T_osc / dt)) + 1) * dt
        R = np.array([mem.push(tk, drive.n_in(tk)) for tk in t])
        worst = max(worst, float(np.max(np.abs(R - memristor.reflectivity_closed_form(t, T_int, T_osc)))))
    return _result(1, "closed-form reflectivity", worst <= 1e-6, f"max |R - R_cf| = {worst:.2e}")


def criterion_2(fast=False):
    """T_int = T_osc: constant reflectivity and a collapsed loop."""
    t = np.linspace(0, 3, 30001)
    analytic = float(np.max(np.abs(memristor.reflectivity_closed_form(t, 1.0, 1.0) - 0.5)))
    loop = trace_loop(1.0, "single", "photon", dt=1e-3 if fast else 1e-4)
    rep = hysteresis.form_factor(loop)
    pts = loop.points
    line = float(np.max(np.abs(pts[:, 1] - 0.5 * pts[:, 0])))
    ok = analytic <= 1e-9 and rep.form_factor <= 1e-3 and line <= 1e-9
    return _result(2, "50/50 limit", ok,
                   f"max |R - 0.5| = {analytic:.1e}, F = {rep.form_factor:.1e}, "
                   f"max |n_out - n_in/2| = {line:.1e}")


def criterion_3(fast=False):
    """l1 coherence of the traced output against 2|ab| sqrt(1-R)."""
    trace = memristor.run_single_trace(0.3, dt=1e-4 if not fast else 1e-3)
    drive = memristor.DriveSignal(1.0)
    worst = 0.0
    for rec in trace:
        a, b = drive.amplitudes_at(rec.t)
        worst = max(worst, abs(rec.c_l1_out - memristor.output_coherence_closed_form(a, b, rec.R)))
    return _result(3, "coherence relation", worst <= 1e-12,
                   f"{len(trace)} steps, max deviation {worst:.1e}")


def criterion_4(fast=False):
    """Two-device concurrence and coherence against the closed forms."""
    T_ints = np.linspace(0.05, 2.0, 10)
    worst_c = worst_l = 0.0
    points = 0
    for flavor in FLAVORS:
        for T_int in T_ints:
            trace = run_pair_trace(flavor, float(T_int), dt=0.01)
            worst_c = max(worst_c, trace.info["max_conc_deviation"])
            worst_l = max(worst_l, trace.info["max_coh_deviation"])
            points += len(trace)
    ok = worst_c <= 1e-9 and worst_l <= 1e-9
    return _result(4, "two-device closed forms", ok,
                   f"{points} points, concurrence dev {worst_c:.1e}, coherence dev {worst_l:.1e}")


def random_density_matrix(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def werner_state(p):
    singlet = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    return p * qstate.to_density(singlet) + (1 - p) * np.eye(4) / 4


def criterion_5(fast=False):
    """The two concurrence formulas agree; Werner states match (3p-1)/2."""
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(1000):
        rho = random_density_matrix(rng)
        lam = qstate.wootters_lambdas(rho)
        c1 = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
        worst = max(worst, abs(qstate.concurrence_max_form(rho) - c1))
    werner = max(abs(qstate.concurrence_mixed(werner_state(p)) - max(0.0, (3 * p - 1) / 2))
                 for p in np.linspace(0, 1, 6))
    ok = worst <= 1e-8 and werner <= 1e-8
    return _result(5, "concurrence formulas", ok,
                   f"random max diff {worst:.1e}, Werner max diff {werner:.1e}")


def _circle(n, cx=0.0, cy=0.0, r=1.0):
    th = np.linspace(0, 2 * np.pi, n + 1)
    return np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])


def figure_eight(n):
    """Two unit circles traced in sequence through their common point (0, 0)."""
    th = np.linspace(0, 2 * np.pi, n // 2, endpoint=False)
    right = np.column_stack([1 - np.cos(th), np.sin(th)])
    left = np.column_stack([np.cos(th) - 1, np.sin(th)])
    return np.vstack([right, left, right[:1]])


def criterion_6(fast=False):
    circle = hysteresis.form_factor(hysteresis.close_loop(_circle(10000)))
    x = np.linspace(0, 1, 200)
    seg = np.vstack([np.column_stack([x, 0.5 * x]), np.column_stack([x[::-1], 0.5 * x[::-1]])[1:]])
    segment = hysteresis.form_factor(hysteresis.close_loop(seg))
    eight = hysteresis.form_factor(hysteresis.close_loop(figure_eight(10000)))
    ok = (abs(circle.form_factor - 1) <= 1e-3 and segment.form_factor <= 1e-9
          and abs(eight.form_factor - 0.5) <= 1e-3 and len(eight.lobes) == 2
          and len(eight.pinch_points) == 1)
    return _result(6, "form-factor calibration", ok,
                   f"circle {circle.form_factor:.6f}, segment {segment.form_factor:.1e}, "
                   f"eight {eight.form_factor:.6f} ({len(eight.lobes)} lobes, "
                   f"{len(eight.pinch_points)} pinch)")


GRID = [round(0.05 * k, 10) for k in range(1, 21)]


def criterion_7(fast=False):
    """Psi concurrence sweep peaks at T_int = 0.25 T_osc (one grid step)."""
    gen = loop_generator("pair", "concurrence", "psi+", dt=2e-3 if fast else 1e-3)
    sweep = hysteresis.sweep_form_factor(gen, GRID)
    best = max(sweep, key=lambda p: p[1])[0]
    ok = abs(best - 0.25) <= 0.05 + 1e-9
    top = ", ".join(f"{g:.2f}:{f:.4f}" for g, f in sweep[2:7])
    return _result(7, "Psi sweep maximum", ok, f"argmax T_int = {best:.2f} ({top})")


def criterion_8(fast=False):
    """Phi concurrence loop: two lobes that overlap in the 50/50 and
    low-period regimes and separate in between."""
    dt = 1e-3 if fast else 5e-4
    low = [0.05, 0.02, 0.01]
    high = [1.0, 2.0]
    middle = [0.25, 0.5]
    reports = {}
    for T_int in low + middle + high:
        reports[T_int] = hysteresis.form_factor(trace_loop(T_int, "pair", "concurrence", "phi+", dt=dt))
    ratio = {k: rep.lobe_area_ratio for k, rep in reports.items()}
    two = all(len(rep.lobes) == 2 for rep in reports.values())
    high_ok = all(ratio[k] >= 0.99 for k in high)
    low_ok = ratio[0.05] < ratio[0.02] < ratio[0.01] and ratio[0.01] >= 0.95
    mid_ok = all(ratio[k] <= 0.8 for k in middle)
    detail = ", ".join(f"{k:g}:{len(reports[k].lobes)}/{ratio[k]:.3f}" for k in sorted(ratio))
    return _result(8, "Phi lobe structure", two and high_ok and low_ok and mid_ok,
                   f"T_int:lobes/area ratio {detail}")


def criterion_9(fast=False):
    """Digital run with exact probabilities reproduces the analytic trace."""
    n = 2000 if fast else 10000
    dig = run_digital(DigitalConfig(n_steps=n, feedback_mode="exact_probability", T_int=0.5))
    ana = memristor.run_single_trace(0.5, dt=1.0 / n)
    worst = 0.0
    for name in ("n_in", "n_out", "R"):
        worst = max(worst, float(np.max(np.abs(dig.column(name) - ana.column(name)[:n]))))
    return _result(9, "digital exact = analytic", worst <= 1e-9,
                   f"{n} steps, max deviation {worst:.1e}")


def window_bound(trace, T_int, shots, drive, k_sigma=5.0):
    """Per-step bound on |R_sampled - R_exact|: k_sigma standard deviations
    of the trapezoid window sum of the shot noise on each estimate.

    Samples before t = 0 come from the pre-filled window and carry no noise.
    """
    dt = trace.info["dt"]
    t = trace.column("t")
    R_applied = np.concatenate([[trace.info["R_initial"]], trace.column("R")[:-1]])
    n_true = np.array([drive.n_in(tk) for tk in t])
    p = np.clip(R_applied * n_true, 0.0, 1.0)
    var_n = np.concatenate([[0.0], p * (1 - p) / shots / np.maximum(R_applied, memristor.EPS_R) ** 2])
    grid = np.concatenate([[t[0] - dt], t])
    bounds = []
    for k in range(len(t)):
        lo = t[k] - T_int
        w = np.zeros(k + 2)
        for j in range(k + 1):
            a, b = max(grid[j], lo), grid[j + 1]
            if b <= a:
                continue
            f = (a - grid[j]) / dt     # window edge inside this segment
            w[j] += 0.5 * (b - a) * (1 - f)
            w[j + 1] += 0.5 * (b - a) * (1 + f)
        bounds.append(k_sigma * math.sqrt(float(np.sum((w / T_int) ** 2 * var_n[:k + 2]))))
    return np.array(bounds)


def criterion_10(fast=False):
    """Shot-noise regime: 14 steps, 4092 shots, T_int = 0.5 T_osc, 100 seeds."""
    base = dict(n_steps=14, shots=4092, T_int=0.5)
    exact = run_digital(DigitalConfig(feedback_mode="exact_probability", **base))
    R_exact = exact.column("R")
    drive = memristor.DriveSignal(1.0)
    within = pinched = 0
    worst = 0.0
    for seed in range(100):
        trace = run_digital(DigitalConfig(seed=seed, **base))
        bound = window_bound(trace, 0.5, 4092, drive)
        dev = np.abs(trace.column("R") - R_exact)
        worst = max(worst, float(np.max(dev / np.where(bound > 0, bound, np.inf))))
        within += bool(np.all(dev <= bound + 1e-15))
        rep = hysteresis.form_factor(digital_loop(trace, smooth=True))
        pinched += len(rep.pinch_points) >= 1
    ok = within == 100 and pinched >= 95
    return _result(10, "sampled digital mode", ok,
                   f"seeds within bound {within}/100 (worst {worst:.2f} of bound), "
                   f"pinched {pinched}/100")


def criterion_11(fast=False):
    """The sign of the Bell superposition does not change any trace."""
    worst = 0.0
    dt = 2e-3 if fast else 1e-3
    for a, b in (("psi+", "psi-"), ("phi+", "phi-")):
        for T_int in (0.1, 0.25, 0.5, 1.0):
            ta, tb = run_pair_trace(a, T_int, dt=dt), run_pair_trace(b, T_int, dt=dt)
            for name in ta.columns():
                worst = max(worst, float(np.max(np.abs(ta.column(name) - tb.column(name)))))
    return _result(11, "sign-flavor invariance", worst <= 1e-12, f"max trace difference {worst:.1e}")


def criterion_12(fast=False):
    """Two CLI digital runs with the same config and seed give identical CSV bytes."""
    from .cli import main
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for name in ("a", "b"):
            path = os.path.join(tmp, "run.csv")
            code = main(["digital", "--seed", "2024", "--csv", path], stdout=io.StringIO())
            with open(path, "rb") as fh:
                blobs.append((code, fh.read()))
            os.remove(path)
    ok = blobs[0][0] == 0 and blobs[1][0] == 0 and blobs[0][1] == blobs[1][1]
    return _result(12, "determinism", ok, f"{len(blobs[0][1])} bytes, identical={blobs[0][1] == blobs[1][1]}")


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12)


def run_all(fast=True, stream=None):
    """Run every criterion, print one PASS/FAIL line each, return the results."""
    stream = stream or sys.stdout
    results = []
    for i, check in enumerate(CRITERIA, start=1):
        try:
            res = check(fast)
        except Exception as exc:   # a crash is a failure of that criterion
            res = Result(i, check.__name__, False, f"error: {exc!r}")
        results.append(res)
        stream.write(f"criterion {res.id:2d} {'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}\n")
    return results
