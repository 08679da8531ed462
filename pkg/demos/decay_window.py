"""Sup-norm decay of the kernel on the standard window and on a wider window.

For gaussian_well(2,1) the sup on |x|,|y| <= 20 drops below the
wider-window value once t exceeds roughly the squared window width: the
pairs carrying the t^{-1/2} rate have |x - y| growing with t and leave the
window.  Up to t ~ 140 both windows give identical values.  On the wider
window the fit over [10, 1000] is shallower than -1/2 (sqrt(t) * sup is
still rising), so neither of these windows yields -1/2 over this t-range.  For the
resonant sech2 well both windows agree at every t.

Run: python demos/decay_window.py
"""

import numpy as np

from disperse1d import compute_scattering, make_potential
from disperse1d.decayfit import default_ladder, schrodinger_decay
from disperse1d.jost import KGrid, x_grid
from disperse1d.propagator import window_nodes

ladder = default_ladder()
for name, V in (("sech2", make_potential("sech2", coupling=1.0)),
                ("gaussian_well", make_potential("gaussian_well", depth=2.0, width=1.0))):
    field, sd = compute_scattering(V, KGrid(), x_grid())
    for half in (20.0, 60.0):
        nodes = window_nodes(field, half)[::2] if half > 20 else None
        s = schrodinger_decay(field, sd, ladder, window=nodes)
        print(f"{name:14s} |x|,|y| <= {half:4.0f}: slope {s.slope:+.3f} "
              f"(stderr {s.stderr:.3f}); values {np.array2string(s.values, precision=4)}")
