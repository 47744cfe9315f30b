"""
Scalar control experiments
==========================

Fits the two heat-trace coefficients of the scalar Laplacian on the unit disk
(Dirichlet and Neumann) and the counting coefficient of the pi x pi square,
where the exact values are known.
"""
import math

import numpy as np

from elastweyl import (fit_counting_second_coeff, fit_heat_second_coeff, heat_trace,
                       rectangle_scalar_spectrum, scalar_disk_spectrum)
from elastweyl.asymptotics import fit_heat_leading_coeff

TAU_MAX = 4e4

disk_dir = scalar_disk_spectrum(1.0, "dir", TAU_MAX)
disk_neu = scalar_disk_spectrum(1.0, "neu", TAU_MAX)
print(f"disk spectra: {disk_dir.total} Dirichlet, {disk_neu.total} Neumann eigenvalues")

# t Z(t) approaches area / 4 pi = 1/4, slowly: the sqrt(t) term is still visible
for t in (1e-2, 1e-3, 3e-4):
    z, tail = heat_trace(disk_dir, t)
    print(f"t = {t:.0e}   t Z = {t * z:.6f}   tail bound / Z = {tail / z:.1e}")

c = fit_heat_leading_coeff(disk_dir)
print(f"\nfitted c = {c.estimate:.7f} +- {c.stderr:.1e}   (exact 0.25)")
for name, spec, sign in (("Dirichlet", disk_dir, -1), ("Neumann", disk_neu, +1)):
    d = fit_heat_second_coeff(spec, 0.25)
    print(f"{name:<9} d = {d.estimate:+.7f} +- {d.stderr:.1e}   exact {sign * math.sqrt(math.pi) / 4:+.7f}"
          f"   window [{d.window[0]:.2e}, {d.window[1]:.2e}], {d.samples} points")

# square of side pi: N(tau) = (pi/4) tau - sqrt(tau) + ...
sq = rectangle_scalar_spectrum(math.pi, math.pi, 1.0, "dir", TAU_MAX)
b = fit_counting_second_coeff(sq, math.pi / 4)
print(f"\nsquare: b = {b.estimate:+.5f} +- {b.stderr:.1e}   exact -1")
print("piece means of (N - a tau)/sqrt(tau):", np.round(b.meta["piece_means"][:6], 4), "...")
