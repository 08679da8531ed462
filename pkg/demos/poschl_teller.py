"""Reflectionless sech² well: scattering data, kernel and oracle side by side.

Run: python demos/poschl_teller.py
"""

import numpy as np

from disperse1d import compute_scattering, make_potential
from disperse1d.jost import KGrid, x_grid
from disperse1d.oracle import oracle_kernel
from disperse1d.propagator import schrodinger_kernel_fresnel

V = make_potential("sech2", coupling=1.0)
field, sd = compute_scattering(V, KGrid(), x_grid())
k = sd.k
print("resonance class:", sd.resonance_class.name)
print("bound states kappa:", sd.kappas)
print("max |T - (k+i)/(k-i)|:", np.max(np.abs(sd.T - (k + 1j) / (k - 1j))))
print("max |R_+|, |R_-|:", np.max(np.abs(sd.Rp)), np.max(np.abs(sd.Rm)))

nodes = np.array([-20.0, -5.0, 0.0, 5.0, 20.0])
for t in (1.0, 5.0, 25.0):
    K = schrodinger_kernel_fresnel(field, sd, t, nodes)
    O = oracle_kernel(V, t, nodes)
    err = np.max(np.abs(K.values - O.values)) / np.max(np.abs(O.values))
    print(f"t = {t:5.1f}  sup|K| = {np.max(np.abs(K.values)):.4f}  "
          f"(4 pi t)^(-1/2) = {(4 * np.pi * t) ** -0.5:.4f}  rel diff vs oracle = {err:.2e}")
