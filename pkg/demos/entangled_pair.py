# Two independent memristors, each fed one half of a time-dependent Bell pair.
#
# For Psi inputs the concurrence loop has one lobe and its form factor
# peaks near T_int = 0.25 T_osc.  For Phi inputs the loop splits into two
# lobes that are equal when the window spans whole periods and drift
# apart in between.
from pqmsim import hysteresis
from pqmsim.experiments import loop_generator, trace_loop

grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0]
gen = loop_generator("pair", "concurrence", "psi+", dt=2e-3)
print("Psi+ concurrence form factor")
for T_int, F in hysteresis.sweep_form_factor(gen, grid):
    print(f"  T_int={T_int:5}  F={F:.4f}  " + "#" * int(200 * F))

print("Phi+ concurrence lobes")
for T_int in (0.01, 0.05, 0.25, 0.5, 1.0, 1.5, 2.0):
    rep = hysteresis.form_factor(trace_loop(T_int, "pair", "concurrence", "phi+", dt=1e-3))
    areas = ", ".join(f"{lobe.area:.4f}" for lobe in rep.lobes)
    print(f"  T_int={T_int:4}  lobes={len(rep.lobes)}  areas=[{areas}]  ratio={rep.lobe_area_ratio:.3f}"
          f"  F={rep.form_factor:.4f}")
