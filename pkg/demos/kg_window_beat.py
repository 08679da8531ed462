"""Klein–Gordon 12-entry response of the resonant sech² well near t = 500.

On the fixed window |x| <= 20 the windowed sup oscillates in t: the
stationary contributions of the sin(t w)/w entry carry phases e^{+-itm}
and beat.  A single ladder point landing in a trough tilts the log-log
fit.  The free evolution of the same datum shows the same oscillation.

Run: python demos/kg_window_beat.py
"""

import numpy as np

from disperse1d import compute_scattering, make_potential
from disperse1d.decayfit import default_ladder, kg_response
from disperse1d.jost import KGrid, x_grid

V = make_potential("sech2", coupling=1.0)
field, sd = compute_scattering(V, KGrid(), x_grid())
ts = np.linspace(480.0, 540.0, 13)
s = kg_response(sd, field, 1.0, None, np.concatenate([[10.0, 30.0, 100.0, 200.0, 300.0], ts]))
for t, v in zip(s.t, s.values):
    print(f"t = {t:7.2f}  response = {v:.4f}  sqrt(t) * response = {np.sqrt(t) * v:.3f}")
lad = kg_response(sd, field, 1.0, None, default_ladder())
print("standard ladder slope:", round(lad.slope, 3), "points:", np.round(lad.t, 2))
