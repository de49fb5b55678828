"""One particle scattering off another one bound to the graph.

Demonstrates the hard-core bosonic results: the confined state of AC(4)
makes the graph perfectly transparent at every energy, while any
confined state of C(10,5) blocks transmission entirely; for evanescent
states the budget splits between elastic scattering, inelastic
excitation and ejection, summing to one.
"""
import os

import numpy as np

from graphscatter import (
    Statistics,
    bound_states,
    elastic_amplitude,
    family_from_string,
    make_family,
    process_budget,
)
from graphscatter.emit import write_with_sidecar

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

g4 = make_family(family_from_string("AC:4"))
bs4 = bound_states(g4)
print("AC(4) with the confined boson on board (single-particle values "
      "in parentheses):")
from graphscatter import transmission_1p
for e in (-1.3, 0.25, 1.5):
    t = elastic_amplitude(g4, bs4, e, 0, 2, 1, Statistics.BOSON, nodes=4096)
    t1 = transmission_1p(g4, e, 2, 1)
    print(f"  E={e:+.2f}: |t_chi|^2 = {abs(t) ** 2:.6f}   "
          f"(|t_1p|^2 = {abs(t1) ** 2:.3f})")

print("\nC(10,5) budget for the highest evanescent state (boson):")
g5 = make_family(family_from_string("C:10:5"))
bs5 = bound_states(g5)
rows = []
for e in np.linspace(-1.9, 1.9, 21):
    bud = process_budget(g5, bs5, float(e), 7, 1, Statistics.BOSON,
                         nodes=4096)
    rows.append((e, sum(bud.elastic.values()), sum(bud.inelastic.values()),
                 sum(bud.ejection.values()), bud.total))
    if abs(e) in (0.38, 1.9):
        pass
path = os.path.join(OUT, "budget_C(10,5)_ev2p.csv")
write_with_sidecar(path, ["E", "elastic", "inelastic", "ejection", "total"],
                   rows, {"graph": "C(10,5)", "chi": 7, "stats": "boson"})
for e, el, inel, ej, tot in rows[::5]:
    print(f"  E={e:+.2f}: elastic={el:.3f} inelastic={inel:.3f} "
          f"ejection={ej:.3f} total={tot:.4f}")
print("wrote", path)
