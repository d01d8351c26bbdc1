"""
Fitting the effective wavelength
================================

Synthetic coincidence counts from the pair pattern are fitted with the
classical double-slit model, slit sizes held at the mask values.  The
fitted wavelength comes out at half the photon wavelength.
"""

import numpy as np

from twophoton import (
    closed_form_pattern,
    fit_pattern,
    reference_setup,
    quantum_classical_comparison,
    simulate_counts,
)

setup = reference_setup()
quantum = closed_form_pattern(setup, n=2)
classical = closed_form_pattern(setup, n=1)

# 1 count/s at the peak for 100 s per angle: about 100 counts in the brightest bin
q_counts = simulate_counts(quantum, 1.0, 0.0, 100.0, seed=1)
c_counts = simulate_counts(classical, 1.0, 0.0, 100.0, seed=2)

for label, data in (("pairs", q_counts), ("single photons", c_counts)):
    fit = fit_pattern(data, setup.mask)
    print("%-15s lambda_eff = %.1f +/- %.1f nm" % (label, fit.lambda_eff * 1e9,
                                                 fit.stderr("lambda_eff") * 1e9))

report = quantum_classical_comparison(q_counts, c_counts, setup.mask)
print("period ratio        %.4f +/- %.4f" % (report.period_ratio.value, report.period_ratio.uncertainty))
print("envelope zero ratio %.4f +/- %.4f" % (report.envelope_zero_ratio.value,
                                            report.envelope_zero_ratio.uncertainty))

###############################################################################
# Scatter of the fitted wavelength over repeated noise draws.

lams = [fit_pattern(simulate_counts(quantum, 1.0, 0.0, 100.0, seed=s), setup.mask).lambda_eff
        for s in range(50)]
print("50 draws: mean %.2f nm, std %.2f nm" % (np.mean(lams) * 1e9, np.std(lams) * 1e9))

# with the crystal removed nothing is counted
empty = simulate_counts(quantum, 0.0, 0.0, 100.0, seed=3)
print("crystal removed: %d coincidences" % sum(r.counts for r in empty))
