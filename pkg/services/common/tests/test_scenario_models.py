"""
Tests for the scenario schema.
"""

import pytest
from pydantic import ValidationError


def _minimal(**overrides):
    data = {
        "schema_version": 1,
        "name": "s",
        "model": "trivial_line",
        "lagrangians": {
            "L0": {
                "curve": {"kind": "segment", "start": 0.0, "end": 1.0},
                "fiber": {"kind": "point"},
                "grading": {"fiber_anchor": 0.0, "base_anchor": 0.0},
            },
        },
        "experiments": [{"kind": "grade", "name": "g", "lagrangian": "L0"}],
    }
    data.update(overrides)
    return data


class TestParseComplex:
    def test_numbers_and_pairs(self):
        from services.common.models.scenario import parse_complex

        assert parse_complex(2) == 2 + 0j
        assert parse_complex(1.5) == 1.5 + 0j
        assert parse_complex([1, -2]) == 1 - 2j
        assert parse_complex((0.5, 0.25)) == 0.5 + 0.25j
        assert parse_complex(3j) == 3j

    @pytest.mark.parametrize("value", [True, [1, 2, 3], ["a", 1], [True, 0], "1+2j", None])
    def test_rejected(self, value):
        from services.common.models.scenario import parse_complex

        with pytest.raises(ValueError):
            parse_complex(value)


class TestCurveSpec:
    def test_segment_pair_endpoints(self):
        from services.common.models.scenario import CurveSpec

        spec = CurveSpec(kind="segment", start=[1, 1], end=2)
        assert spec.start == 1 + 1j
        assert spec.end == 2 + 0j
        assert spec.domain is None
        assert spec.rotate == 0.0

    @pytest.mark.parametrize(
        "data, missing",
        [
            ({"kind": "segment", "start": 0.0}, "end"),
            ({"kind": "arc", "center": 0.0, "radius": 1.0, "theta_start": 0.0}, "theta_end"),
            ({"kind": "constant"}, "value"),
            ({"kind": "ushape", "angle_in": 0.0, "angle_out": 3.0, "radius": 1.0}, "far_radius"),
            ({"kind": "composite"}, "pieces"),
        ],
    )
    def test_required_fields_per_kind(self, data, missing):
        from services.common.models.scenario import CurveSpec

        with pytest.raises(ValidationError) as exc:
            CurveSpec.model_validate(data)
        assert missing in str(exc.value)

    def test_domain_must_increase(self):
        from services.common.models.scenario import CurveSpec

        with pytest.raises(ValidationError, match="increasing"):
            CurveSpec(kind="segment", start=0.0, end=1.0, domain=(1.0, -1.0))

    def test_ushape_rejects_domain(self):
        from services.common.models.scenario import CurveSpec

        with pytest.raises(ValidationError, match="fix their own parameter domain"):
            CurveSpec(
                kind="ushape",
                angle_in=0.0,
                angle_out=3.0,
                radius=1.0,
                far_radius=3.0,
                domain=(0.0, 1.0),
            )

    def test_nested_composite(self):
        from services.common.models.scenario import CurveSpec

        spec = CurveSpec.model_validate(
            {
                "kind": "composite",
                "origin": 0.5,
                "pieces": [
                    {"kind": "segment", "start": 0.0, "end": 1.0},
                    {"kind": "segment", "start": 1.0, "end": [1.0, 1.0]},
                ],
            }
        )
        assert len(spec.pieces) == 2
        assert spec.pieces[1].end == 1 + 1j

    def test_unknown_field_forbidden(self):
        from services.common.models.scenario import CurveSpec

        with pytest.raises(ValidationError):
            CurveSpec(kind="segment", start=0.0, end=1.0, colour="red")

    def test_radius_positive(self):
        from services.common.models.scenario import CurveSpec

        with pytest.raises(ValidationError):
            CurveSpec(kind="arc", center=0.0, radius=0.0, theta_start=0.0, theta_end=1.0)


def test_fiber_defaults():
    from services.common.models.scenario import FiberSpec

    fiber = FiberSpec(kind="circle")
    assert fiber.c0 is None
    assert fiber.r == 1.0
    assert fiber.s_range == (-2.0, 2.0)

    with pytest.raises(ValidationError):
        FiberSpec(kind="torus")


def test_experiment_discriminator():
    from services.common.models.scenario import (
        DegreeExperiment,
        GradeExperiment,
        Scenario,
    )

    data = _minimal(
        lagrangians={
            name: {
                "curve": {"kind": "segment", "start": 0.0, "end": end},
                "fiber": {"kind": "point"},
                "grading": {"fiber_anchor": 0.0, "base_anchor": 0.0},
            }
            for name, end in (("L0", 1.0), ("L1", [0.0, 1.0]))
        },
        experiments=[
            {"kind": "grade", "name": "g", "lagrangian": "L0"},
            {"kind": "degree", "name": "d", "pair": ["L0", "L1"], "expected": [1]},
        ],
    )
    scenario = Scenario.model_validate(data)
    assert isinstance(scenario.experiments[0], GradeExperiment)
    assert isinstance(scenario.experiments[1], DegreeExperiment)
    assert scenario.experiments[1].pair == ("L0", "L1")
    assert scenario.experiments[1].anchor_shift == 1

    data["experiments"].append({"kind": "holonomy", "name": "h"})
    with pytest.raises(ValidationError):
        Scenario.model_validate(data)


class TestScenarioReferences:
    def test_minimal_is_valid(self):
        from services.common.models.scenario import Scenario

        scenario = Scenario.model_validate(_minimal())
        assert scenario.seed == 0
        assert scenario.settings == {}
        assert scenario.output.svg is True
        assert scenario.output.export_patches is False

    def test_schema_version(self):
        from services.common.models.scenario import Scenario

        with pytest.raises(ValidationError):
            Scenario.model_validate(_minimal(schema_version=2))

    def test_needs_an_experiment(self):
        from services.common.models.scenario import Scenario

        with pytest.raises(ValidationError):
            Scenario.model_validate(_minimal(experiments=[]))

    def test_duplicate_experiment_names(self):
        from services.common.models.scenario import Scenario

        experiments = [
            {"kind": "grade", "name": "g", "lagrangian": "L0"},
            {"kind": "grade", "name": "g", "lagrangian": "L0", "samples": 10},
        ]
        with pytest.raises(ValidationError, match="duplicate experiment name"):
            Scenario.model_validate(_minimal(experiments=experiments))

    def test_unknown_lagrangian(self):
        from services.common.models.scenario import Scenario

        experiments = [{"kind": "grade", "name": "g", "lagrangian": "L9"}]
        with pytest.raises(ValidationError, match="unknown Lagrangian 'L9'"):
            Scenario.model_validate(_minimal(experiments=experiments))

    def test_grading_required(self):
        from services.common.models.scenario import Scenario

        data = _minimal()
        del data["lagrangians"]["L0"]["grading"]
        with pytest.raises(ValidationError, match="needs a grading"):
            Scenario.model_validate(data)

    def test_isotopy_references(self):
        from services.common.models.scenario import Scenario

        with pytest.raises(ValidationError, match="isotopy 'pull'"):
            Scenario.model_validate(_minimal(isotopies={"pull": {"lagrangian": "L9", "target": 1.0}}))

        experiments = [{"kind": "flux", "name": "f", "isotopy": "pull"}]
        with pytest.raises(ValidationError, match="unknown isotopy"):
            Scenario.model_validate(_minimal(experiments=experiments))

    def test_isotopy_target_curve_or_constant(self):
        from services.common.models.scenario import CurveSpec, Scenario

        scenario = Scenario.model_validate(
            _minimal(
                isotopies={
                    "a": {"lagrangian": "L0", "target": [2.5, 1.0]},
                    "b": {
                        "lagrangian": "L0",
                        "target": {"kind": "segment", "start": 0.0, "end": 2.0},
                    },
                }
            )
        )
        assert scenario.isotopies["a"].target == 2.5 + 1j
        assert isinstance(scenario.isotopies["b"].target, CurveSpec)

    def test_settings_are_numbers(self):
        from services.common.models.scenario import Scenario

        scenario = Scenario.model_validate(_minimal(settings={"COLLAR_SAMPLES": 129}))
        assert scenario.settings == {"COLLAR_SAMPLES": 129.0}

        with pytest.raises(ValidationError):
            Scenario.model_validate(_minimal(settings={"COLLAR_SAMPLES": "many"}))
