"""
When does the narrowing hold?
=============================

Both photons of a pair must cross the same slit, and the pair's angular
spread must not blur the slit edge.  Single-photon fringes must also be
washed out by the beam divergence.  ``validate_setup`` reports all three.
"""

from twophoton import reference_setup, validate_setup

setup = reference_setup()
for f in validate_setup(setup).findings:
    print("%-24s %s %s" % (f.name, f.status, f.message))

###############################################################################
# Moving the slits away from the crystal: the same-slit ratio (b/D)/spread
# falls as 1/D and crosses the threshold of 10 near D = 17 mm.

print()
for D in (0.0, 5.2e-3, 10e-3, 20e-3, 50e-3, 0.2):
    report = validate_setup(setup.replace(distance_from_crystal=D))
    same = report.get("condition same-slit")
    diff = report.get("condition diffraction")
    print("D = %6.1f mm   same-slit %-4s  diffraction %-4s" % (D * 1e3, same.status, diff.status))

###############################################################################
# A beam divergence below lambda/b = 2.29 mrad leaves first-order fringes in place.

tight = setup.replace(divergence=1e-3)
print()
print(validate_setup(tight).get("condition erasure"))
