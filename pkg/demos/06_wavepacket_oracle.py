"""Time-domain cross-check of the frequency-domain predictions.

Evolves actual wavepackets on the graph with truncated rails and
compares outcome probabilities against S-matrix predictions convolved
with the packet's momentum density.  The two-particle run shows the
confined boson of AC(4) rendering the graph transparent.
"""
import numpy as np

from graphscatter import bound_states, family_from_string, make_family
from graphscatter.oracle import (
    TruncatedSystem,
    evolve_1p,
    evolve_2p_bound,
    predicted_1p,
)

g = make_family(family_from_string("AC:4"))
system = TruncatedSystem(g, 400)

for p0, label in ((-np.pi / 2, "E ~ 0"), (-np.pi / 4, "E ~ sqrt(2)")):
    res = evolve_1p(system, p0, 20.0, 1)
    pred = predicted_1p(g, p0, 20.0, 1)
    print(f"1p {label}: oracle T={res.rail_prob[2]:.4f} R={res.rail_prob[1]:.4f}"
          f" | predicted T={pred[2]:.4f} R={pred[1]:.4f}"
          f" | norm drift {res.norm_drift:.1e}")

bs = bound_states(g)
chi = bs.physical[0]  # confined, E = 0
res = evolve_2p_bound(system, chi, -np.pi / 3, 20.0, 1)
print(f"2p boson + confined chi: transmitted (chi intact) = "
      f"{res.bound_retained[2]:.4f}, reflected = {res.bound_retained[1]:.4f}, "
      f"ejected = {sum(res.both_far.values()):.2e}")
