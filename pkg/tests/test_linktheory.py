import numpy as np
import pytest
from hypothesis import given, settings

from morselink.algebra import INTEGERS, RATIONALS, Chain, CoefficientRing
from morselink.core.errors import ErrorCode, MorseLinkError
from morselink.flow import build_morse_data
from morselink.geometry import builtin_model
from morselink.linktheory import (
    beta_geom_search,
    check_link_rank_bound,
    check_linking_identity,
    check_oracle_linking,
    check_pseudoboundary,
    circle_oracle,
    config_from_model,
    delta_pairing,
    displace_pair,
    link_matrix,
    linking_terms,
    load_circle_config,
    make_pair,
    oracle_beta_equality,
    pseudoboundary_from_chain,
    random_circle_config,
    unstable_chain,
    validate_config,
    verify_beta_equality,
    verify_rank_realization,
)
from morselink.plchain import PLChain, boundary_pl
from morselink.schemas import CircleComponent, CircleConfig, MarkedPoint

from .strategies import circle_configs

CIRCLE = builtin_model("CIRCLE-A")
POSITIONS = {"M1": 0.0, "m1": 1.8270, "M2": 3.4090, "m2": 4.7010}

# (θ, tag, mult)：b_+ 靠近极小、b_- 靠近极大且两两交错
INTERLEAVED = [(1.5, "b_plus", 1), (2.5, "b_minus", 1), (4.0, "b_plus", -1), (5.5, "b_minus", -1)]
# 斜坡 M1→m1 上 b_- 在 b_+ 之下，修正项非零
STACKED = [(0.5, "b_plus", 1), (1.4, "b_minus", 1), (4.0, "b_minus", -1), (5.5, "b_plus", -1)]
SHIFTED = [(1.6, "b_plus", 1), (2.6, "b_minus", 1), (4.1, "b_plus", -1), (5.6, "b_minus", -1)]


def point(tag, value, mult=1, name=None):
    return MarkedPoint(tag=tag, value=value, mult=mult, name=name)


def config(*points, name="test"):
    return CircleConfig(name=name, components=[CircleComponent(points=list(points))])


def circle_a_config():
    return config(point("max", 4.0), point("min", 0.0), point("max", 3.0), point("min", 1.0), name="circle-a")


def chains_from(marks, tag):
    chosen = [(theta, mult) for theta, t, mult in marks if t == tag]
    return PLChain.points(CIRCLE.kind, [[theta] for theta, _ in chosen], [mult for _, mult in chosen])


def entries(cx):
    return {k: set(items) for k, items in cx.boundary_entries().items()}


def pair_from(md, marks, label=""):
    return make_pair(md, chains_from(marks, "b_plus"), chains_from(marks, "b_minus"), label=label)


class TestCircleOracle:
    def test_circle_a_complex(self):
        result = circle_oracle(circle_a_config())
        assert result.cx_f.ids(1) == ["M1", "M2"]
        assert result.counts == {("M1", "m1"): 1, ("M1", "m2"): -1, ("M2", "m1"): -1, ("M2", "m2"): 1}

    def test_circle_a_beta(self):
        result = circle_oracle(circle_a_config())
        assert result.beta_alg == 2.0
        assert result.beta_geom == 2.0
        assert set(result.geom_witness) == {"M1", "m1", "M2", "m2"}

    def test_single_pair_of_critical_points(self):
        result = circle_oracle(config(point("max", 1.0), point("min", 0.0)))
        assert result.cx_f.rank(1) == 0
        assert result.beta_alg == 0.0
        assert result.beta_geom == 0.0
        assert result.geom_witness is None

    def test_interleaved_pair_balances(self):
        cfg = config(
            point("max", 4.0), point("b_plus", 0.5, 1), point("min", 0.0), point("b_minus", 2.5, 1),
            point("max", 3.0), point("b_plus", 1.5, -1), point("min", 1.0), point("b_minus", 3.5, -1),
        )
        terms = circle_oracle(cfg).linking
        assert terms["lk"] == -1
        assert terms["correction"] == 0
        assert terms["lam"] == -1
        assert terms["residual"] == 0

    def test_correction_term_balances(self):
        cfg = config(
            point("max", 4.0), point("b_plus", 3.0, 1), point("b_minus", 1.0, 1), point("min", 0.0),
            point("max", 3.0), point("b_minus", 2.0, -1), point("min", 1.0), point("b_plus", 2.0, -1),
        )
        terms = circle_oracle(cfg).linking
        assert terms["lk"] == 0
        assert terms["correction"] == 1
        assert terms["lam"] == 1
        assert terms["residual"] == 0

    def test_report(self):
        cfg = config(
            point("max", 4.0), point("b_plus", 0.5, 1), point("min", 0.0), point("b_minus", 2.5, 1),
            point("max", 3.0), point("b_plus", 1.5, -1), point("min", 1.0), point("b_minus", 3.5, -1),
        )
        report = check_oracle_linking(cfg)
        assert report.passed
        assert report.identity == "linking_identity"

    def test_two_components(self):
        cfg = CircleConfig(components=[
            CircleComponent(points=[point("max", 4.0), point("min", 0.0), point("max", 3.0), point("min", 1.0)]),
            CircleComponent(points=[point("max", 2.0), point("min", 1.5)]),
        ])
        result = circle_oracle(cfg)
        assert result.cx_f.ids(1) == ["M1", "M2", "M3"]
        assert result.beta_geom == 2.0

    def test_rejects_non_alternating(self):
        with pytest.raises(MorseLinkError) as exc:
            validate_config(config(point("max", 2.0), point("max", 1.0), point("min", 0.0), point("min", 0.5)))
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_rejects_non_monotone_marks(self):
        with pytest.raises(MorseLinkError) as exc:
            validate_config(config(point("max", 2.0), point("probe", 2.5), point("min", 0.0)))
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_rejects_open_chain(self):
        with pytest.raises(MorseLinkError) as exc:
            validate_config(config(point("max", 2.0), point("b_plus", 1.0, 1), point("min", 0.0)))
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_load_toml(self, tmp_path):
        path = tmp_path / "circle.toml"
        path.write_text(
            'name = "circle-a"\n'
            "[[components]]\n"
            'points = [{tag = "max", value = 4.0}, {tag = "min", value = 0.0},'
            ' {tag = "max", value = 3.0}, {tag = "min", value = 1.0}]\n',
            encoding="utf-8",
        )
        cfg = load_circle_config(path)
        assert cfg.name == "circle-a"
        assert circle_oracle(cfg).beta_geom == 2.0

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(MorseLinkError) as exc:
            load_circle_config(tmp_path / "missing.toml")
        assert exc.value.code is ErrorCode.IO_ERROR

    def test_load_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("colour = 1\n[[components]]\npoints = []\n", encoding="utf-8")
        with pytest.raises(MorseLinkError) as exc:
            load_circle_config(path)
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    @settings(max_examples=200, deadline=None)
    @given(circle_configs())
    def test_linking_identity_on_random_configs(self, cfg):
        assert circle_oracle(cfg).linking["residual"] == 0

    @settings(max_examples=50, deadline=None)
    @given(circle_configs(max_marks=2))
    def test_beta_equality_on_random_configs(self, cfg):
        assert oracle_beta_equality(cfg).passed

    @settings(max_examples=100, deadline=None)
    @given(circle_configs())
    def test_nonzero_link_needs_nonzero_differential(self, cfg):
        result = circle_oracle(cfg)
        if result.linking["rhs"] != 0:
            assert result.cx_f.rank(1, RATIONALS) >= 1


@pytest.mark.slow
class TestOracleLargeSamples:
    def test_linking_identity_on_500_pairs(self):
        rng = np.random.default_rng(2024)
        corrected = 0
        for i in range(500):
            m = int(rng.integers(1, 4))
            marks = int(rng.integers(2, 5))
            linking = circle_oracle(random_circle_config(rng, m, marks, name=f"pair-{i}")).linking
            assert linking["residual"] == 0, f"pair-{i}"
            corrected += linking["correction"] != 0
        assert corrected >= 50

    @settings(max_examples=500, deadline=None)
    @given(circle_configs(max_marks=2))
    def test_beta_equality_on_500_configs(self, cfg):
        assert oracle_beta_equality(cfg).passed


class TestOracleAgainstPipeline:
    def test_config_from_model_names(self):
        cfg = config_from_model(CIRCLE)
        names = [p.name for p in cfg.components[0].points]
        assert names == ["M1", "m1", "M2", "m2"]

    def test_complex_matches(self, circle_md):
        result = circle_oracle(config_from_model(CIRCLE))
        assert entries(result.cx_f) == entries(circle_md.cx_f)
        for (p, q), value in result.counts.items():
            assert circle_md.signed_count(p, q) == value

    @pytest.mark.parametrize("seed", [3, 11, 17])
    def test_random_circle_matches(self, seed):
        model = builtin_model("CIRCLE-RANDOM", seed=seed, m=4)
        md = build_morse_data(model)
        result = circle_oracle(config_from_model(model))
        assert entries(result.cx_f) == entries(md.cx_f)

    @pytest.mark.parametrize("marks", [INTERLEAVED, STACKED], ids=["interleaved", "stacked"])
    def test_linking_terms_match(self, circle_md, marks):
        expected = circle_oracle(config_from_model(CIRCLE, marks)).linking
        pair = pair_from(circle_md, marks)
        terms = linking_terms(circle_md, pair.b_plus, pair.b_minus)
        assert terms["lk"] == expected["lk"]
        assert terms["correction"] == expected["correction"]
        assert terms["lam"] == expected["lam"]

    @pytest.mark.parametrize("marks", [INTERLEAVED, STACKED], ids=["interleaved", "stacked"])
    def test_linking_identity_report(self, circle_md, marks):
        report = check_linking_identity(circle_md, pair_from(circle_md, marks, label="hand"))
        assert report.passed
        assert report.witnesses[0]["label"] == "hand"

    def test_stacked_pair_has_correction(self, circle_md):
        report = check_linking_identity(circle_md, pair_from(circle_md, STACKED))
        assert report.witnesses[0]["correction"] != 0


class TestPairs:
    def test_rejects_wrong_dimension(self, circle_md):
        arc = PLChain.polyline(CIRCLE.kind, [[0.5], [1.0]])
        with pytest.raises(MorseLinkError) as exc:
            make_pair(circle_md, arc, chains_from(INTERLEAVED, "b_minus"))
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_rejects_intersecting_carriers(self, circle_md):
        b = chains_from(INTERLEAVED, "b_plus")
        with pytest.raises(MorseLinkError) as exc:
            make_pair(circle_md, b, b)
        assert exc.value.code is ErrorCode.CARRIERS_INTERSECT

    def test_rejects_critical_points(self, circle_md):
        at_minima = PLChain.points(CIRCLE.kind, [[POSITIONS["m1"]], [POSITIONS["m2"]]], [1, -1])
        with pytest.raises(MorseLinkError) as exc:
            make_pair(circle_md, at_minima, chains_from(INTERLEAVED, "b_minus"))
        assert exc.value.code is ErrorCode.CHAIN_TOO_CLOSE_TO_CRITICAL

    def test_displacement_clears_critical_points(self, circle_md):
        at_minima = PLChain.points(CIRCLE.kind, [[POSITIONS["m1"]], [POSITIONS["m2"]]], [1, -1])
        at_maxima = PLChain.points(CIRCLE.kind, [[POSITIONS["M1"]], [POSITIONS["M2"]]], [1, -1])
        pair = displace_pair(circle_md, at_minima, at_maxima, seed=0)
        levels = pair.levels(CIRCLE)
        assert levels[0] < 1.5
        assert levels[1] > 2.5


class TestPseudoboundary:
    def test_unstable_chain_of_maximum(self, circle_md):
        chain = unstable_chain(circle_md, "M1")
        assert chain.dim == 1
        boundary = boundary_pl(chain).normalized()
        assert boundary.dim == 0
        assert len(boundary) == 2
        assert sorted(CIRCLE.values(boundary.vertices())) == pytest.approx([0.0, 1.0], abs=1e-6)

    def test_unstable_chain_of_minimum(self, circle_md):
        chain = unstable_chain(circle_md, "m1")
        assert chain.dim == 0
        assert len(chain) == 1

    def test_pseudoboundary_of_maximum(self, circle_md):
        a = Chain(1, {"M1": 1}, INTEGERS)
        _, b = pseudoboundary_from_chain(circle_md, a)
        assert b.dim == 0
        mults = {round(float(CIRCLE.value(c.vertices[0]))): c.multiplicity for c in b.cells}
        assert mults == {0: 1, 1: -1}
        assert b.f_range(CIRCLE)[1] == pytest.approx(1.0, abs=1e-6)
        assert check_pseudoboundary(circle_md, a, b).passed

    def test_cycle_gives_empty_boundary(self, circle_md):
        a = Chain(1, {"M1": 1, "M2": 1}, INTEGERS)
        _, b = pseudoboundary_from_chain(circle_md, a)
        assert b.is_empty()
        pairing = delta_pairing(circle_md, a)
        assert pairing.z == {}
        assert set(pairing.pairs) == {"m1", "m2"}
        assert check_pseudoboundary(circle_md, a, b).passed

    def test_multiples(self, circle_md):
        a = Chain(1, {"M1": 2, "M2": -1}, INTEGERS)
        _, b = pseudoboundary_from_chain(circle_md, a)
        assert delta_pairing(circle_md, a).z == {"m1": 3, "m2": -3}
        assert sorted(abs(c.multiplicity) for c in b.cells) == [3, 3]

    def test_pairing_leftovers_survive_in_boundary(self, circle_md):
        a = Chain(1, {"M1": 2, "M2": -1}, INTEGERS)
        pairing = delta_pairing(circle_md, a)
        _, b = pseudoboundary_from_chain(circle_md, a)
        assert {q: sum(sign for _, sign in items) for q, items in pairing.leftovers.items()} == pairing.z
        survivors = {round(float(CIRCLE.value(c.vertices[0]))): c.multiplicity for c in b.cells}
        assert sorted(map(abs, survivors.values())) == sorted(map(abs, pairing.z.values()))
        assert check_pseudoboundary(circle_md, a, b).passed

    def test_rejects_fractional_coefficients(self, circle_md):
        a = Chain(1, {"M1": "1/2"}, RATIONALS)
        with pytest.raises(MorseLinkError) as exc:
            pseudoboundary_from_chain(circle_md, a)
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_negated_direction(self, circle_md):
        neg = circle_md.negated()
        _, b = pseudoboundary_from_chain(neg, Chain(1, {"m1": 1}, INTEGERS))
        assert sorted(CIRCLE.values(b.vertices())) == pytest.approx([3.0, 4.0], abs=1e-6)


class TestLinkMatrix:
    def test_single_pair(self, circle_md):
        pair = pair_from(circle_md, INTERLEAVED)
        matrix, rank = link_matrix(circle_md, [pair.b_plus], [pair.b_minus])
        assert matrix == [[-1]]
        assert rank == 1

    def test_empty_lists(self, circle_md):
        pair = pair_from(circle_md, INTERLEAVED)
        assert link_matrix(circle_md, [], [pair.b_minus]) == ([], 0)
        assert link_matrix(circle_md, [pair.b_plus], []) == ([[]], 0)

    def test_rank_bound(self, circle_md):
        first = pair_from(circle_md, INTERLEAVED)
        second = pair_from(circle_md, SHIFTED)
        report = check_link_rank_bound(circle_md, [first.b_plus, second.b_plus],
                                       [first.b_minus, second.b_minus], k=0)
        assert report.passed
        assert report.lhs <= report.rhs == 1


class TestSeparation:
    def test_circle_a_witness(self, circle_md):
        search = beta_geom_search(circle_md, 0)
        assert search.bound == pytest.approx(2.0, abs=1e-9)
        assert search.lk != 0
        top, bottom = search.pair.levels(CIRCLE)
        assert top == pytest.approx(1.0, abs=1e-6)
        assert bottom == pytest.approx(3.0, abs=1e-6)

    def test_circle_a_equality(self, circle_md):
        report = verify_beta_equality(circle_md, 0)
        assert report.passed
        assert report.lhs == 2.0

    @pytest.mark.parametrize("ring", [RATIONALS, CoefficientRing.mod(5)], ids=["Q", "Z5"])
    def test_witness_linking_matches_lambda_with_sign(self, circle_md, ring):
        report = verify_beta_equality(circle_md, 0, ring=ring)
        assert report.passed
        assert "linking" not in report.residual
        witness = report.witnesses[0]
        assert ring.normalize(witness["lk"]) == ring.normalize(witness["lam"])

    def test_random_strategy_never_exceeds_algebra(self, circle_md):
        search = beta_geom_search(circle_md, 0, strategy="random", seed=5)
        assert search.bound <= search.beta_alg + 1e-9

    def test_unknown_strategy(self, circle_md):
        with pytest.raises(MorseLinkError) as exc:
            beta_geom_search(circle_md, 0, strategy="greedy")
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    @pytest.mark.parametrize("seed", [3, 7, 11])
    def test_random_circle_matches_oracle(self, seed):
        model = builtin_model("CIRCLE-RANDOM", seed=seed, m=5)
        md = build_morse_data(model)
        expected = circle_oracle(config_from_model(model)).beta_geom
        assert beta_geom_search(md, 0).bound == pytest.approx(expected, abs=1e-6)


class TestRankRealization:
    @pytest.mark.parametrize("ring", [RATIONALS, CoefficientRing.mod(2)], ids=["Q", "Z2"])
    def test_circle_a(self, circle_md, ring):
        report = verify_rank_realization(circle_md, 0, ring)
        assert report.passed
        assert report.lhs == report.rhs == 1
        assert not any(c for row in report.witnesses[0]["corrections"] for c in row)

    def test_random_circle(self):
        md = build_morse_data(builtin_model("CIRCLE-RANDOM", seed=11, m=4))
        report = verify_rank_realization(md, 0)
        assert report.passed
        assert report.rhs == md.cx_f.rank(1, RATIONALS)


@pytest.mark.slow
class TestSurfaces:
    def test_sphere_b_pseudoboundary(self, sphere_b_md):
        saddle = sphere_b_md.of_index(1)[0]
        a = Chain(2, {"M2": 1}, INTEGERS)
        _, b = pseudoboundary_from_chain(sphere_b_md, a)
        assert b.dim == 1
        assert b.f_range(sphere_b_md.model)[1] == pytest.approx(saddle.value, abs=1e-3)
        assert check_pseudoboundary(sphere_b_md, a, b).passed

    def test_sphere_b_disk(self, sphere_b_md):
        disk = unstable_chain(sphere_b_md, "M1")
        assert disk.dim == 2
        assert boundary_pl(boundary_pl(disk)).is_empty()

    def test_sphere_b_beta(self, sphere_b_md):
        search = beta_geom_search(sphere_b_md, 1)
        assert search.bound == pytest.approx(0.2, abs=0.05)
        assert verify_beta_equality(sphere_b_md, 1, tol=0.05).passed

    def test_sphere_b_linking_identity(self, sphere_b_md):
        search = beta_geom_search(sphere_b_md, 1)
        pair = displace_pair(sphere_b_md, search.pair.b_plus, search.pair.b_minus, seed=0)
        assert check_linking_identity(sphere_b_md, pair).passed

    @pytest.mark.parametrize("k", [0, 1])
    def test_torus_beta(self, torus_md, k):
        assert verify_beta_equality(torus_md, k, tol=0.05).passed

    def test_torus_realization(self, torus_md):
        assert verify_rank_realization(torus_md, 1).passed

    def test_round_sphere_has_no_linked_pair(self):
        md = build_morse_data(builtin_model("ROUND-SPHERE"))
        search = beta_geom_search(md, 0)
        assert search.bound == 0.0
        assert ErrorCode.NO_LINKED_PAIR_FOUND.value in search.notes
        assert verify_rank_realization(md, 0).passed
