"""Census of bound states across the graph families.

Counts evanescent, confined and half-bound states for lines, appended
paths/cycles and cycles, and prints the confined/evanescent energies of
the two benchmark graphs.
"""
import numpy as np

from graphscatter import bound_states, family_from_string, make_family

print(f"{'graph':10s} {'n_ev':>4s} {'n_c':>4s} {'n_h':>4s}")
for spec in ("Line:0", "Line:5", "AL:2", "AL:9", "AC:3", "AC:6", "AC2:6",
             "C:4:2", "C:6:3", "C:8:4", "C:10:5", "C:12:6"):
    bs = bound_states(make_family(family_from_string(spec)))
    n_ev, n_c, n_h = bs.counts
    print(f"{spec:10s} {n_ev:4d} {n_c:4d} {n_h:4d}")

for spec in ("AC:4", "C:10:5"):
    bs = bound_states(make_family(family_from_string(spec)))
    conf = np.round([st.energy for st in bs.confined], 4)
    ev = np.round([st.energy for st in bs.evanescent], 4)
    print(f"{spec}: confined E = {conf}, evanescent E = {ev}")
