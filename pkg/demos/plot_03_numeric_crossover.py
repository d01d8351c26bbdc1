"""
Numeric propagation and the crossover to classical widths
=========================================================

The closed forms assume the pair is born right at the slits.  The
numeric propagator integrates over birth position and emission angle, so
it can follow the pattern as the slits move away from the crystal.
"""

import time

import numpy as np

from twophoton import (
    closed_form_pattern,
    coincidence_pattern_numeric,
    monte_carlo_pattern,
    narrowing_ratio_vs_distance,
    reference_setup,
)
from twophoton.core import default_theta_grid

setup = reference_setup()

# at D = 0 the quadrature reproduces the closed form
at_crystal = setup.replace(distance_from_crystal=0.0)
numeric = coincidence_pattern_numeric(at_crystal)
rms = np.sqrt(np.mean((numeric.pattern.value - closed_form_pattern(at_crystal).value) ** 2))
print("D = 0: order %d, RMS vs closed form %.1e" % (numeric.quadrature_order, rms))

###############################################################################
# Monte Carlo over sampled pairs agrees with the quadrature within its
# standard errors.

coarse = setup.replace(theta_grid=default_theta_grid(n_points=201))
start = time.perf_counter()
quad = coincidence_pattern_numeric(coarse)
mc = monte_carlo_pattern(coarse, 1_000_000, seed=20240601)
z = (mc.value - quad.pattern.value * quad.absolute_peak) / mc.stderr
print("Monte Carlo 1e6 pairs: max |z| = %.2f  (%.1f s)" % (np.max(np.abs(z)), time.perf_counter() - start))

###############################################################################
# Width of the pair pattern relative to the classical pattern, against D.
# The envelope zero returns to the classical value; the FWHM levels off
# near 0.72 because the pair weight becomes a triangle, not a top-hat.

distances = [0.0, 0.005, 0.01, 0.02, 0.03, 0.05, 0.08, 0.1]
zeros = narrowing_ratio_vs_distance(setup, distances)
widths = narrowing_ratio_vs_distance(setup, distances, metric="envelope_fwhm")
for (D, rz), (_, rw) in zip(zeros, widths):
    print("D = %5.1f mm   zero ratio %.3f   FWHM ratio %.3f" % (D * 1e3, rz, rw))
