"""Off-shell R grids over outgoing momenta.

Emits the heatmap data behind the density plots: Line(39) shows mass
concentrating on the total-momentum-conservation line for
counter-propagating input, AL(N) shows a periodic grid pattern with
period pi/N.
"""
import os

import numpy as np

from graphscatter import Statistics, bound_states, family_from_string, make_family
from graphscatter.observables import (
    conservation_band_fraction,
    estimate_grid_period,
    offshell_r_grid,
)
from graphscatter.emit import write_with_sidecar

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)


def emit_grid(name, k_axis, grid, params):
    rows = []
    for i, k1 in enumerate(k_axis):
        for j, k2 in enumerate(k_axis):
            rows.append((k1, k2, grid[i, j].real, grid[i, j].imag))
    path = os.path.join(OUT, name)
    write_with_sidecar(path, ["k1", "k2", "ReR", "ImR"], rows, params)
    print("wrote", path)


g = make_family(family_from_string("Line:39"))
bs = bound_states(g)
p1, p2 = -np.pi / 4, np.pi / 2
k_axis, grid = offshell_r_grid(g, bs, p1, p2, n_k=161, stats=Statistics.BOSON,
                               nodes=4096, line_convention=True)
frac = conservation_band_fraction(k_axis, grid, p1 + p2)
print(f"Line(39) counter-propagating: {100 * frac:.1f}% of |Re R| within "
      f"pi/20 of k1+k2 = p1+p2")
emit_grid("heatmap_Line(39)_counter.csv", k_axis, grid,
          {"p1": p1, "p2": p2, "rails": "signed", "eps": 1e-3,
           "nodes": 4096, "stats": "boson"})

for n in (4, 10, 20):
    g = make_family(family_from_string(f"AL:{n}"))
    bs = bound_states(g)
    k_axis, grid = offshell_r_grid(g, bs, -np.pi / 4, -np.pi / 2, n_k=161,
                                   stats=Statistics.BOSON, nodes=2048)
    period = estimate_grid_period(k_axis, grid)
    print(f"AL({n}): grid period {period:.4f} (pi/N = {np.pi / n:.4f})")
    emit_grid(f"heatmap_AL({n}).csv", k_axis, grid,
              {"p1": -np.pi / 4, "p2": -np.pi / 2, "eps": 1e-3,
               "nodes": 2048, "stats": "boson"})
