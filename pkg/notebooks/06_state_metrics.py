"""
Comparing states
================

Overlap, purity, normalized overlap and L2 distance between Wigner grids,
and the two ways of turning r into a vacuum fidelity.
"""

import math

from cvteleport.metrics import compare, overlap, purity, vacuum_fidelity
from cvteleport.phase_space import default_grid, input_state, teleport, wigner_squeezed_vacuum, wigner_vacuum

spec = default_grid()
vac = wigner_vacuum(spec)
print("overlap(squeezed vacuum, vacuum):", overlap(wigner_squeezed_vacuum(0.28, spec), vac), 1 / math.cosh(0.28))

w_in = input_state(0.28, 0.8, 0.013, spec)
w_out = teleport(w_in, 0.795)
print("purity in/out:", purity(w_in), purity(w_out))
print(compare(w_in, w_out).to_json(indent=2))

# teleported vacuum against vacuum follows the amplitude convention
for r in (0.0, 0.35, 0.795, 2.0):
    print(f"r = {r:<5} grid {overlap(teleport(vac, r), vac):.6f}"
          f"  amplitude {vacuum_fidelity(r, 'amplitude'):.6f}  linear {vacuum_fidelity(r, 'linear'):.6f}")
