"""
Classical and two-photon double-slit patterns
=============================================

The same double slit seen by single photons and by entangled pairs.
The pair pattern has half the fringe period and half the envelope width.
"""

import numpy as np

from twophoton import closed_form_pattern, reference_setup, pattern_metrics

setup = reference_setup()
print("slit width a = %.2f mm, separation b = %.2f mm, wavelength %.0f nm"
      % (setup.mask.slit_width * 1e3, setup.mask.slit_separation * 1e3, setup.wavelength * 1e9))

# N = 1 is Young's pattern, N = 2 the coincidence pattern of the pairs
for n in (1, 2, 3, 4):
    m = pattern_metrics(closed_form_pattern(setup, n=n))
    print("N=%d  period %.4f mrad  envelope zero %.4f mrad  FWHM %.4f mrad"
          % (n, m.fringe_period * 1e3, m.envelope_first_zero * 1e3, m.envelope_fwhm * 1e3))

###############################################################################
# A coarse text rendering of the central part of both patterns.

classical = closed_form_pattern(setup, n=1)
pairs = closed_form_pattern(setup, n=2)
for i in range(560, 1041, 24):
    bar_c = "#" * int(round(30 * classical.value[i]))
    bar_q = "#" * int(round(30 * pairs.value[i]))
    print("%+6.2f mrad  %-30s | %s" % (classical.theta[i] * 1e3, bar_c, bar_q))

# the pair pattern is exactly the classical one at half the wavelength
half = closed_form_pattern(setup.replace(signal_wavelength=setup.wavelength / 2,
                                         idler_wavelength=setup.wavelength / 2,
                                         pump_wavelength=setup.wavelength / 4), n=1)
print("max |pair - classical(lambda/2)| =", np.max(np.abs(pairs.value - half.value)))
