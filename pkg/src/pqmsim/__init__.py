"""Simulator for photonic quantum memristors.

Modules: ``qstate`` (state arithmetic), ``memristor`` (one device),
``network`` (two devices fed by a Bell pair), ``digital`` (gate-level,
shot-sampled emulation), ``hysteresis`` (loop geometry and form factor),
``cli`` (command line).
"""
from .digital import DigitalConfig, run_digital
from .hysteresis import close_loop, decompose_lobes, form_factor, self_intersections, sweep_form_factor
from .memristor import MemristorState, pqm_unitary, reflectivity_closed_form, run_single_trace, step_single
from .network import BellDrive, run_pair_trace, step_pair
from .qstate import concurrence_mixed, concurrence_pure, l1_coherence, partial_trace
from .trace import COLUMNS, Trace, TraceRecord

__version__ = "0.1.0"
