"""Calibration of the superconducting-circuit realisation.

Frequency corrections of each transmon and the effective gain/loss ratios
extracted from simulated relaxation, for the three device columns.
"""

from qsync.cqed_calibration import extract_rates, frequency_corrections
from qsync.models import TWO_PI, cqed_preset

KHZ = TWO_PI * 1e3
for col in ("sc-phasecorrelation-a", "sc-phasecorrelation-b", "sc-enhancement-b"):
    p = cqed_preset(col)
    fc = frequency_corrections(p)
    print(col)
    for j in "AB":
        c = fc[j]
        fit = extract_rates(p, j)
        print(
            f"  {j}: dispersive {c['dispersive'] / KHZ:8.2f} kHz + pump {c['pump'] / KHZ:8.2f} kHz"
            f" = {c['total'] / KHZ:8.2f} kHz (configured {c['configured'] / KHZ:.2f}),"
            f" w/gamma = {fit.ratio:.3f}"
        )
