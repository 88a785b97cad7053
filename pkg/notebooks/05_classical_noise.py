"""
Classical noise in the teleporter
=================================

Uncorrelated Gaussian noise adds to the teleportation kernel in power. The
effective EPR parameter drops and turns negative once the noise exceeds
sqrt(1 - exp(-2r)).
"""

import math

import numpy as np

from cvteleport.analytic_core import ref_output_negativity
from cvteleport.noise import amplitude_rule_r, break_even_noise, noisy_r
from cvteleport.phase_space import (
    GridSpec,
    apply_quadrature_noise_factor,
    from_characteristic,
    origin_value,
    to_characteristic,
    wigner_reference,
)

for r in (0.35, 0.795, 1.5):
    ns = np.array([0.0, 0.1, 0.3, 0.6])
    print(f"r = {r}: r'/r =", np.round([noisy_r(r, n) / r for n in ns], 4),
          f" break-even N = {break_even_noise(r).amplitude:.4f}")

# Which rule is right? Add the noise directly in the characteristic function.
r, n = 0.5, 0.3
w = wigner_reference(0.28, GridSpec.square(8.0, 512))
g = math.sqrt(math.exp(-2 * r) + n * n)
chi = apply_quadrature_noise_factor(apply_quadrature_noise_factor(to_characteristic(w), g, "u"), g, "v")
print("grid:            ", origin_value(from_characteristic(chi)))
print("power rule:      ", ref_output_negativity(0.28, noisy_r(r, n)))
print("amplitude rule:  ", ref_output_negativity(0.28, amplitude_rule_r(r, n)))
