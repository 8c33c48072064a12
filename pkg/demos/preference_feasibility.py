"""Observation preferences that no state preference can explain.

With a noisy two-state sensor, the reachable observation preferences form
the segment between the columns of the likelihood. Anything outside it has
no state-level counterpart.
"""

import numpy as np

from efekit.preferences import feasibility_check, observation_prefs_from_state_prefs, valid_class_vertices

a = np.array([[0.6, 0.4], [0.4, 0.6]])

print("valid observation preferences lie between:")
for v in valid_class_vertices(a):
    print("  ", v.probs)

for c_obs in ([0.55, 0.45], [0.8, 0.2]):
    v = feasibility_check(a, c_obs)
    print(f"\nc_obs = {c_obs}: feasible={v.feasible} method={v.method}")
    print("  raw solve      ", v.raw_solution)
    print("  L1 residual    ", v.residual)
    if v.feasible:
        print("  state prefs    ", v.c_s.probs)
        print("  pushed forward ", observation_prefs_from_state_prefs(a, v.c_s).probs)
    else:
        print("  certificate    ", v.certificate)
