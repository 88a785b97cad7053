"""
Wigner functions on a grid
==========================

The same channels as in the closed forms, evaluated numerically on a 512^2
grid. Useful when the input state has no closed form.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cvteleport.analytic_core import InputStateParams, output_negativity
from cvteleport.phase_space import (
    apply_loss,
    default_grid,
    input_state,
    mix,
    origin_value,
    teleport,
    to_characteristic,
    wigner_reference,
    wigner_squeezed_vacuum,
)

spec = default_grid()
ref = wigner_reference(0.28, spec)
print("integral:", ref.integral(), " origin:", origin_value(ref))

# input model: mix in false heralds, then loss
w_in = apply_loss(mix(ref, wigner_squeezed_vacuum(0.28, spec), 0.013), 0.8)
assert np.allclose(w_in.values, input_state(0.28, 0.8, 0.013, spec).values)

w_out = teleport(w_in, 0.795)
print("grid W_out(0,0):    ", origin_value(w_out))
print("closed form:        ", output_negativity(InputStateParams(0.28, 0.8, 0.013), 0.795))

# loss and teleportation do not commute
print("teleport then loss: ", origin_value(apply_loss(teleport(ref, 0.795), 0.8)))

chi = to_characteristic(w_out)
print("chi(0,0) =", chi.at_origin())

fig, axes = plt.subplots(1, 2, figsize=(8, 3.6))
for ax, w, title in zip(axes, (w_in, w_out), ("input", "teleported, r = 0.795")):
    lim = np.abs(w.values).max()
    ax.imshow(w.values.T, origin="lower", extent=(-6, 6, -6, 6), cmap="RdBu_r", vmin=-lim, vmax=lim)
    ax.set_xlim(-3, 3)
    ax.set_ylim(-3, 3)
    ax.set_title(title)
    ax.set_xlabel("x")
axes[0].set_ylabel("p")
fig.tight_layout()
fig.savefig("wigner_in_out.png", dpi=120)
