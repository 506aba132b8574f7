"""Glue between the simulators and the loop geometry: which columns make up
a response curve, and one-period loops as a function of T_int for sweeps."""
from functools import partial

from . import hysteresis
from .digital import DigitalConfig, run_digital
from .memristor import run_single_trace
from .network import run_pair_trace

QUANTITY_COLUMNS = {
    "photon": ("n_in", "n_out"),
    "coherence": ("c_l1_in", "c_l1_out"),
    "concurrence": ("conc_in", "conc_out"),
}
MODELS = ("single", "pair")


def loop_columns(quantity, model="single"):
    if quantity not in QUANTITY_COLUMNS:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {tuple(QUANTITY_COLUMNS)}")
    if quantity == "concurrence" and model != "pair":
        raise ValueError("concurrence needs the two-device (pair) model")
    return QUANTITY_COLUMNS[quantity]


def trace_loop(T_int, model="single", quantity="photon", flavor="psi+", T_osc=1.0, dt=1e-3):
    """One drive period of the chosen response curve as a closed loop."""
    x, y = loop_columns(quantity, model)
    if model == "single":
        trace = run_single_trace(T_int, T_osc=T_osc, dt=dt)
    elif model == "pair":
        trace = run_pair_trace(flavor, T_int, T_osc=T_osc, dt=dt)
    else:
        raise ValueError(f"unknown model {model!r}")
    return hysteresis.loop_from_trace(trace, x, y, period=T_osc)


def loop_generator(model="single", quantity="photon", flavor="psi+", T_osc=1.0, dt=1e-3):
    """Picklable ``T_int -> loop`` callable for ``sweep_form_factor``."""
    loop_columns(quantity, model)
    return partial(trace_loop, model=model, quantity=quantity, flavor=flavor, T_osc=T_osc, dt=dt)


def digital_loop(trace, smooth=False):
    """Loop of a digital run; the steps cover one period without repeating t = T."""
    return hysteresis.loop_from_trace(trace, "n_in", "n_out",
                                      period=trace.info["config"]["T_osc"] * trace.info["config"]["n_periods"],
                                      periodic=True, smooth=smooth)


def digital_run(**kwargs):
    return run_digital(DigitalConfig(**kwargs))
