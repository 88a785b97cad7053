"""
Broadband squeezing reduced to one number
=========================================

A wave packet with Lorentzian spectrum sees an OPO squeezing spectrum. The
spectral average of S_-(Omega) defines an effective EPR parameter.
"""

import numpy as np

from cvteleport.multimode import (
    SqueezingSpectrum,
    TransferFunction,
    effective_epr,
    gain_moments,
    lorentzian_grid,
    lorentzian_mode,
    opo_squeezing_spectrum,
    output_mode_function,
)

gamma = 1.0
omega = lorentzian_grid(gamma)
f = lorentzian_mode(gamma, omega)
print("grid points:", omega.size, " span:", omega[-1])

# a wider OPO cavity keeps more squeezing inside the wave packet
for kappa in (0.5, 1.0, 2.0, 5.0, 20.0):
    spec = opo_squeezing_spectrum(0.4, kappa, omega)
    print(f"kappa/gamma = {kappa:<5} r(0) = {spec.r_values[omega.size // 2]:.4f}  r_eff = {effective_epr(f, spec):.4f}")

# nonunity gain from a finite-bandwidth classical channel
spec = opo_squeezing_spectrum(0.4, 2.0, omega)
r_eff = effective_epr(f, spec)
for cutoff in (1.0, 5.0, 50.0):
    gm = gain_moments(f, TransferFunction.low_pass(omega, cutoff), spec, r_eff)
    sq, anti = gm.noise_coefficients(r_eff)
    print(f"cutoff {cutoff:<5} g+ = {gm.g_plus:.4f}  g- = {gm.g_minus:.4f}  |antisqueezed coeff| = {abs(anti):.4f}")

# a pure delay only shifts the wave packet in time
f2 = lorentzian_mode(gamma, omega, "l2")
_, norm = output_mode_function(f2, TransferFunction.delay(omega, 3.0))
print("l2 norm after delay:", norm)
print("flat spectrum check:", effective_epr(f, SqueezingSpectrum.flat(omega, 0.795)))
