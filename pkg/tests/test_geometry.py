import math

import numpy as np
import pytest

from morselink.core.errors import ErrorCode, MorseLinkError
from morselink.geometry import (
    BuiltinModels,
    CircleModel,
    builtin_model,
    by_name,
    census_csv,
    euler_characteristic,
    locate_critical_points,
    normal_form_residual,
)


class TestCircleModel:
    def test_circle_a_census(self):
        model = builtin_model("circle-a")
        crits = locate_critical_points(model)
        assert [p.name for p in crits] == ["M1", "M2", "m1", "m2"]
        values = {p.name: p.value for p in crits}
        assert values == pytest.approx({"M1": 4.0, "M2": 3.0, "m1": 0.0, "m2": 1.0}, abs=1e-9)
        assert [p.index for p in crits] == [1, 1, 0, 0]
        assert euler_characteristic(crits) == 0

    def test_critical_positions_follow_value_gaps(self):
        model = builtin_model("CIRCLE-A")
        positions = model.critical_positions
        assert positions[0] == 0.0
        assert positions[1] == pytest.approx(1.827, abs=1e-3)
        assert positions[2] == pytest.approx(3.409, abs=1e-3)
        assert positions[3] == pytest.approx(4.701, abs=1e-3)

    def test_function_is_c2_at_junctions(self):
        model = builtin_model("CIRCLE-A")
        for theta in model.critical_positions:
            left = model.hessian(np.array([theta - 1e-7]))[0, 0]
            right = model.hessian(np.array([theta + 1e-7]))[0, 0]
            assert left == pytest.approx(right, rel=1e-4)

    def test_rejects_non_alternating_values(self):
        with pytest.raises(MorseLinkError) as exc:
            CircleModel("bad", [1.0, 2.0, 3.0, 0.0])
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_random_values_alternate_and_are_seeded(self):
        first = BuiltinModels.random_circle_values(7, 3)
        assert first == BuiltinModels.random_circle_values(7, 3)
        assert len(first) == 6
        for i in range(6):
            v, prev_v, next_v = first[i], first[i - 1], first[(i + 1) % 6]
            assert (v > prev_v and v > next_v) or (v < prev_v and v < next_v)

    def test_circle_random_census(self):
        model = builtin_model("circle-random", seed=7, m=3)
        crits = locate_critical_points(model)
        assert sum(1 for p in crits if p.index == 1) == 3
        assert sum(1 for p in crits if p.index == 0) == 3

    def test_negated_frames(self):
        model = builtin_model("CIRCLE-A")
        crit = by_name(locate_critical_points(model))["M1"]
        dual = crit.negated(1)
        assert dual.index == 0
        assert dual.value == -4.0
        # k(n-k) = 0：稳定标架直接取原不稳定标架
        assert np.allclose(dual.stable, crit.unstable)


class TestBuiltinModels:
    def test_unknown_model(self):
        with pytest.raises(MorseLinkError) as exc:
            builtin_model("KLEIN-BOTTLE")
        assert exc.value.code is ErrorCode.UNKNOWN_MODEL
        assert exc.value.exit_code == 2

    def test_name_normalization(self):
        assert BuiltinModels.normalize_name(" torus_c ") == "TORUS-C"

    @pytest.mark.parametrize("name", ["CIRCLE-A", "TORUS-C", "SPHERE-B", "ROUND-SPHERE"])
    def test_gradient_matches_finite_differences(self, name):
        model = builtin_model(name)
        points = model.random_points(np.random.default_rng(3), 20)
        assert model.check_gradient(points) < 1e-5

    @pytest.mark.parametrize("name, betti", [("CIRCLE-A", (1, 1)), ("TORUS-C", (1, 2, 1)), ("SPHERE-B", (1, 0, 1))])
    def test_betti_numbers(self, name, betti):
        model = builtin_model(name)
        assert model.betti == betti
        assert len(model.betti) == model.n + 1

    def test_negated_model_flips_values(self):
        model = builtin_model("TORUS-C")
        x = np.array([0.3, 1.1])
        assert model.negated().value(x) == pytest.approx(-model.value(x))
        assert np.allclose(model.negated().gradient(x), -model.gradient(x))


class TestRoundSphere:
    def test_poles(self):
        model = builtin_model("ROUND-SPHERE")
        crits = locate_critical_points(model)
        assert [(p.name, p.index) for p in crits] == [("M1", 2), ("m1", 0)]
        assert np.allclose(crits[0].coords, [0.0, 0.0, 1.0], atol=1e-9)
        assert np.allclose(crits[1].coords, [0.0, 0.0, -1.0], atol=1e-9)

    def test_antipodal_points_are_pi_apart(self):
        model = builtin_model("ROUND-SPHERE")
        north, south = np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])
        assert model.distance(north, south) == pytest.approx(math.pi)
        assert model.distance(south, north) == pytest.approx(math.pi)
        assert abs(model.displacement(north, south) @ north) < 1e-12

    def test_normal_form_residual(self):
        model = builtin_model("ROUND-SPHERE")
        crits = locate_critical_points(model)
        assert normal_form_residual(model, crits[0], 0.01) < 1e-3

    def test_maximum_frame_is_positive(self):
        model = builtin_model("ROUND-SPHERE")
        top = locate_critical_points(model)[0]
        assert model.orientation(top.coords, *top.unstable) > 0

    def test_census_csv(self):
        model = builtin_model("ROUND-SPHERE")
        text = census_csv(locate_critical_points(model))
        lines = text.strip().splitlines()
        assert lines[0] == "name,coords,index,value"
        assert lines[1].startswith("M1,")


@pytest.mark.slow
class TestTwoDimensionalModels:
    def test_torus_census(self):
        model = builtin_model("TORUS-C")
        crits = locate_critical_points(model)
        assert len(crits) == 6
        assert [p.index for p in crits].count(1) == 3
        assert euler_characteristic(crits) == 0

    def test_torus_saddle_frames_are_oriented(self):
        model = builtin_model("TORUS-C")
        for p in locate_critical_points(model):
            if p.index == 1:
                assert model.orientation(p.coords, p.stable[0], p.unstable[0]) > 0

    def test_sphere_b_levels(self):
        model = builtin_model("SPHERE-B")
        crits = locate_critical_points(model)
        assert [p.index for p in crits] == [2, 2, 1, 0]
        values = sorted((p.value for p in crits), reverse=True)
        assert values == pytest.approx([2.0, 1.2, 1.0, 0.0], abs=1e-6)
        assert [p.name for p in crits] == ["M1", "M2", "s1", "m1"]

    def test_sphere_b_critical_points_on_great_circle(self):
        model = builtin_model("SPHERE-B")
        for p in locate_critical_points(model):
            assert abs(p.coords[1]) < 1e-8
            assert math.isclose(float(np.linalg.norm(p.coords)), 1.0, abs_tol=1e-12)
