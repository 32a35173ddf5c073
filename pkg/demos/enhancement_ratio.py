"""Coupling-induced enhancement and suppression of the synchronization measure.

R(g) = Omega(g) / Omega(0) for a bath pair that enhances synchronization and
one that produces a sharp dip.
"""

import numpy as np

from qsync.metrics import omega_of
from qsync.models import OscillatorParams
from qsync.perturbative import r_max

sets = {"enhancement": (0.55, 0.09), "suppression": (0.55, 0.25)}
gs = np.linspace(0, 4, 17)
for name, (wa, wb) in sets.items():
    p = OscillatorParams.with_unit_relaxation(wa, wb, eps=1e-3)
    om0 = omega_of(p)
    r = [omega_of(p.replace(g=g)) / om0 for g in gs]
    best = r_max(p)
    print(f"{name} (w_A={wa}, w_B={wb}): R_max = {best.r_max:.3f} at g = {best.g_star:.3f}, min R on grid = {min(r):.3f}")
    print("  " + " ".join(f"{x:.2f}" for x in r))
