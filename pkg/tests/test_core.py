import json

import numpy as np
import pytest

from twophoton.core import (
    ABSOLUTE_RATE,
    FAIL,
    PASS,
    WARN,
    DetectionGeometry,
    LinearPhase,
    OpticalSetup,
    Pattern,
    SlitMask,
    SpdcSource,
    setup_from_dict,
    setup_to_dict,
    validate_setup,
)
from twophoton.errors import InvalidParameterError, InvalidSetupError

CONFIG = {
    "source": {"pump_wavelength": "458nm", "signal_wavelength": "916nm",
               "idler_wavelength": "916nm", "emission_spread": "2.4mrad",
               "pump_beam_width": "1mm", "divergence": "5mrad"},
    "mask": {"slit_width": "0.13mm", "slit_separation": "0.4mm", "n_slits": 2,
             "distance_from_crystal": "5.2mm"},
    "detection": {"theta_range": {"start": "-8mrad", "stop": "8mrad", "n_points": 1601}},
}


def source(**kw):
    args = dict(pump_wavelength=458e-9, signal_wavelength=916e-9, idler_wavelength=916e-9,
                emission_spread=2.4e-3, pump_beam_width=1e-3)
    args.update(kw)
    return SpdcSource(**args)


class TestInvariants:
    @pytest.mark.parametrize("kw, name", [
        ({"pump_wavelength": 0.0}, "wavelengths > 0"),
        ({"signal_wavelength": -1e-9}, "wavelengths > 0"),
        ({"emission_spread": -1e-3}, "emission_spread >= 0"),
        ({"pump_beam_width": 0.0}, "pump_beam_width > 0"),
        ({"pair_amplitude": 0.5}, "perturbative regime"),
    ])
    def test_source_violation_names_invariant(self, kw, name):
        with pytest.raises(InvalidSetupError) as info:
            source(**kw)
        assert info.value.finding.name == name
        assert info.value.finding.status == FAIL

    def test_mask_rejects_overlap(self):
        with pytest.raises(InvalidSetupError):
            SlitMask(slit_width=0.4e-3, slit_separation=0.3e-3)

    def test_mask_rejects_three_slits(self):
        with pytest.raises(InvalidSetupError):
            SlitMask(slit_width=0.1e-3, slit_separation=0.3e-3, n_slits=3)

    def test_single_slit_needs_no_separation(self):
        mask = SlitMask(slit_width=0.13e-3, n_slits=1)
        assert mask.slit_edges() == [(-0.065e-3, 0.065e-3)]

    def test_detection_rejects_wide_angles(self):
        with pytest.raises(InvalidSetupError):
            DetectionGeometry(theta_grid=np.linspace(-0.6, 0.6, 11))

    def test_detection_rejects_unsorted(self):
        with pytest.raises(InvalidSetupError):
            DetectionGeometry(theta_grid=np.array([0.0, -1e-3, 1e-3]))

    def test_pairs_need_energy_conservation(self):
        with pytest.raises(InvalidSetupError) as info:
            OpticalSetup(source(idler_wavelength=800e-9),
                         SlitMask(0.13e-3, 0.4e-3), DetectionGeometry())
        assert info.value.finding.name == "energy conservation"

    def test_classical_mode_only_warns(self):
        setup = OpticalSetup(source(idler_wavelength=800e-9), SlitMask(0.13e-3, 0.4e-3),
                             DetectionGeometry(photon_number=1))
        assert validate_setup(setup).get("energy conservation").status == WARN

    def test_grid_is_read_only(self, reference):
        with pytest.raises(ValueError):
            reference.detection.theta_grid[0] = 1.0


class TestMask:
    def test_edges_and_transmission(self):
        mask = SlitMask(0.13e-3, 0.4e-3)
        (l0, l1), (r0, r1) = mask.slit_edges()
        assert (l0, l1) == pytest.approx((-0.265e-3, -0.135e-3))
        assert (r0, r1) == pytest.approx((0.135e-3, 0.265e-3))
        x = np.array([0.0, 0.2e-3, -0.2e-3, 0.3e-3])
        assert mask.transmits(x).tolist() == [False, True, True, False]


class TestReferenceSetup:
    def test_ratios(self, reference):
        report = validate_setup(reference)
        assert report.ok
        assert all(f.status == PASS for f in report.findings)

    def test_replace_keeps_other_parts(self, reference):
        moved = reference.replace(distance_from_crystal=0.0, photon_number=1)
        assert moved.mask.distance_from_crystal == 0.0
        assert moved.detection.photon_number == 1
        assert moved.source is reference.source

    def test_replace_unknown_field(self, reference):
        with pytest.raises(TypeError):
            reference.replace(nonsense=1)

    def test_degenerate(self, reference):
        assert reference.source.degenerate and reference.source.energy_conserving
        assert reference.wavelength == 916e-9


class TestValidation:
    def test_conditions_warn_not_fail(self, reference):
        far = reference.replace(distance_from_crystal=0.4e-3 / 2.4e-3)
        report = validate_setup(far)
        assert report.ok
        assert report.get("condition same-slit").status == WARN
        assert report.get("condition diffraction").status == WARN

    def test_mapping_with_bad_value_reports(self):
        bad = json.loads(json.dumps(CONFIG))
        bad["mask"]["slit_width"] = "-0.13mm"
        report = validate_setup(bad)
        assert not report.ok
        assert report.failures()[0].name.startswith("slit_width")

    def test_mapping_with_bad_units(self):
        bad = json.loads(json.dumps(CONFIG))
        bad["source"]["emission_spread"] = "2.4 parsecs"
        report = validate_setup(bad)
        assert report.failures()[0].name == "config parse"

    def test_never_raises_on_missing_keys(self):
        assert not validate_setup({"source": {}}).ok

    def test_report_json(self, reference):
        d = validate_setup(reference).to_dict()
        json.dumps(d)
        assert d["ok"] is True


class TestConfig:
    def test_units_parsed(self):
        setup = setup_from_dict(CONFIG)
        assert setup.mask.slit_width == pytest.approx(0.13e-3)
        assert setup.source.emission_spread == pytest.approx(2.4e-3)
        assert setup.detection.theta_grid.size == 1601

    def test_round_trip(self):
        setup = setup_from_dict(CONFIG)
        d = setup_to_dict(setup)
        again = setup_to_dict(setup_from_dict(json.loads(json.dumps(d))))
        assert again == d

    def test_round_trip_with_phase(self, reference):
        tilted = reference.replace(pump_phase_profile=LinearPhase(1e3, 0.5))
        d = setup_to_dict(tilted)
        back = setup_from_dict(d)
        assert back.source.pump_phase_profile == LinearPhase(1e3, 0.5)

    def test_custom_phase_not_serializable(self, reference):
        custom = reference.replace(pump_phase_profile=lambda x: 0 * x)
        with pytest.raises(InvalidParameterError):
            setup_to_dict(custom)

    def test_missing_key(self):
        with pytest.raises(InvalidParameterError):
            setup_from_dict({"mask": CONFIG["mask"]})

    def test_explicit_grid(self):
        cfg = dict(CONFIG, detection={"theta_grid": ["-1mrad", "0mrad", "1mrad"]})
        assert setup_from_dict(cfg).detection.theta_grid.tolist() == pytest.approx([-1e-3, 0, 1e-3])


class TestPattern:
    def test_peak_one_enforced(self):
        with pytest.raises(InvalidParameterError):
            Pattern(np.array([0.0, 1.0]), np.array([0.5, 0.9]))

    def test_negative_rejected(self):
        with pytest.raises(InvalidParameterError):
            Pattern(np.array([0.0, 1.0]), np.array([1.0, -0.1]))

    def test_from_values(self):
        p = Pattern.from_values([0.0, 1.0, 2.0], [2.0, 4.0, 1.0], stderr=[0.2, 0.4, 0.1])
        assert p.value.tolist() == [0.5, 1.0, 0.25]
        assert p.stderr.tolist() == pytest.approx([0.05, 0.1, 0.025])

    def test_all_zero_is_absolute(self):
        p = Pattern.from_values([0.0, 1.0], [0.0, 0.0])
        assert p.normalization == ABSOLUTE_RATE

    def test_immutable(self):
        p = Pattern.from_values([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            p.value[0] = 3.0
