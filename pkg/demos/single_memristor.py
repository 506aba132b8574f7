# One photonic memristor driven by cos(pi t)|0> + sin(pi t)|1>.
#
# The reflectivity is the running average of the input photon number over
# the last T_int.  Short windows follow the drive closely, a window of one
# full period sees a constant average and the device acts as a fixed 50/50
# beamsplitter.
import numpy as np

from pqmsim import hysteresis
from pqmsim.memristor import reflectivity_closed_form, run_single_trace

T_osc = 1.0

# numeric window vs closed form
tr = run_single_trace(0.25, T_osc=T_osc, dt=1e-4)
t, R = tr.column("t"), tr.column("R")
print("max |R - closed form| at T_int=0.25:", np.abs(R - reflectivity_closed_form(t, 0.25, T_osc)).max())

# the (n_in, n_out) loop for a few windows
for T_int in (0.1, 0.25, 0.5, 1.0):
    tr = run_single_trace(T_int, T_osc=T_osc, dt=1e-3)
    rep = hysteresis.form_factor(hysteresis.loop_from_trace(tr, "n_in", "n_out"))
    print(f"T_int={T_int:4}  R in [{tr.column('R').min():.3f}, {tr.column('R').max():.3f}]"
          f"  F={rep.form_factor:.4f}  pinches={rep.pinch_points}")

# coherence follows 2|ab| sqrt(1-R) without any assumption on the update rule
tr = run_single_trace(0.25, dt=1e-3)
for name in ("c_l1_in", "c_l1_out"):
    print(name, "max", tr.column(name).max().round(4))
rep = hysteresis.form_factor(hysteresis.loop_from_trace(tr, "c_l1_in", "c_l1_out"))
print("coherence loop lobes:", len(rep.lobes), "F:", round(rep.form_factor, 4))
