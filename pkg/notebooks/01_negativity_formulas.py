"""
Central negativity of a teleported squeezed photon
==================================================

Closed-form W(0,0) before and after unity-gain teleportation, and the EPR
parameter needed to keep it negative.
"""

import math

import numpy as np

from cvteleport.analytic_core import (
    InputStateParams,
    input_negativity,
    input_threshold_epsilon,
    output_negativity,
    ref_output_negativity,
    threshold_r,
)

# A pure squeezed photon keeps W(0,0) = -1/pi whatever the squeezing
print("pure photon W(0,0):", input_negativity(InputStateParams(0.5, 1.0)), -1 / math.pi)

# Teleporting it: negativity survives only above 3 dB of EPR squeezing
for r in (0.2, 0.5 * math.log(2), 0.8, 2.0):
    print(f"r = {r:.4f}   W_out(0,0) = {ref_output_negativity(0.28, r):+.5f}")

# Loss on the input. Below eta = 1/2 the input itself is no longer negative.
for eta in (0.4, 0.5, 0.6, 0.8, 1.0):
    print(f"eta = {eta:.1f}   W_in(0,0) = {input_negativity(InputStateParams(0.28, eta)):+.5f}")

# The threshold depends on eta only, not on s
etas = np.linspace(0.55, 1.0, 10)
print("threshold r(eta):", np.round([threshold_r(e, 0.0) for e in etas], 4))
print("same with s = 0.9:", np.round([threshold_r(e, 0.9) for e in etas], 4))

# False heralds raise the threshold and eventually remove it
p = InputStateParams(0.28, 0.8, 0.013)
print("threshold with epsilon = 0.013:", threshold_r(p.eta, p.s, p.epsilon))
print("largest epsilon keeping the input negative:", input_threshold_epsilon(0.8, 0.28))
print("experimental point W_out(0,0):", output_negativity(p, 0.795))
