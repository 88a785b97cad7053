"""
Teleportation as diffusion
==========================

Unity-gain teleportation with finite squeezing acts on the Wigner function
like a heat equation. Integrating it with finite differences gives the same
result as the Gaussian convolution.
"""

import math

from cvteleport.metrics import l2_distance
from cvteleport.phase_space import (
    convolve_gaussian,
    default_grid,
    diffusion_steps,
    evolve_diffusion,
    origin_value,
    wigner_reference,
)

spec = default_grid()
w = wigner_reference(0.28, spec)
kappa = 1.0

for kt in (0.02, 0.05, 0.1):
    steps = diffusion_steps(spec, kappa, kt)
    diffused = evolve_diffusion(w, kappa, kt, steps)
    conv = convolve_gaussian(w, math.sqrt(2 * kt))
    print(f"kappa t = {kt:<5} steps = {steps:<4} L2 = {l2_distance(diffused, conv):.2e}"
          f"  W(0,0): {origin_value(diffused):+.6f} vs {origin_value(conv):+.6f}")

# kappa t = exp(-2r) / 2 maps diffusion time onto the EPR parameter
r = 0.795
print("equivalent diffusion time for r = 0.795:", math.exp(-2 * r) / 2)
