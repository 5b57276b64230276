import csv
import json

import pytest

from morselink.algebra import load_complex
from morselink.cli import build_run_config, main
from morselink.cli.args_parser import parse_arguments
from morselink.core.errors import ErrorCode, MorseLinkError


def reports_in(directory):
    """编号报告 NN-*.json（不含 summary.json 与 oracle.json 等结果文件）"""
    return sorted(directory.glob("[0-9][0-9]-*.json"))


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


class TestArguments:
    def test_defaults(self, tmp_path):
        config = build_run_config(parse_arguments(["verify"]))
        assert config.model.name == "CIRCLE-A"
        assert config.ring == "Z"
        assert config.selected_suites() == ["identities", "dualm", "linklink", "alggeom", "main2"]
        assert config.degrees_for(1) == [0]

    def test_negative_tolerance(self):
        with pytest.raises(ValueError):
            parse_arguments(["verify", "--tol", "-1"])

    def test_flags_override_toml(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(
            'ring = "Q"\nseed = 5\nsuite = "dualm"\n'
            '[model]\nname = "circle-random"\nseed = 3\nm = 4\n',
            encoding="utf-8",
        )
        config = build_run_config(parse_arguments(["verify", "--config", str(path), "--seed", "7"]))
        assert config.ring == "Q"
        assert config.seed == 7
        assert config.suites == ["dualm"]
        assert config.model.name == "circle-random"
        assert config.model.params == {"seed": 3, "m": 4}

    def test_model_params_from_flags(self):
        args = parse_arguments(["beta", "-m", "circle-random", "-p", "seed=3", "-p", "m=5"])
        config = build_run_config(args)
        assert config.model.params == {"seed": 3, "m": 5}

    @pytest.mark.parametrize("ring, label", [("Z2", "Zp:2"), ("Zp:5", "Zp:5"), ("Q", "Q")])
    def test_ring_labels(self, ring, label):
        assert build_run_config(parse_arguments(["verify", "--ring", ring])).ring == label

    def test_bad_ring(self):
        with pytest.raises(MorseLinkError) as exc:
            build_run_config(parse_arguments(["verify", "--ring", "Zp:4"]))
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_unknown_toml_key(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("colour = 1\n", encoding="utf-8")
        with pytest.raises(MorseLinkError) as exc:
            build_run_config(parse_arguments(["verify", "--config", str(path)]))
        assert exc.value.code is ErrorCode.INVALID_CONFIG

    def test_degree_out_of_range(self):
        config = build_run_config(parse_arguments(["verify", "-k", "1"]))
        with pytest.raises(MorseLinkError) as exc:
            config.degrees_for(1)
        assert exc.value.code is ErrorCode.INVALID_CONFIG


class TestVerify:
    def test_circle_a_all_suites(self, tmp_path):
        assert main(["verify", "--model", "circle-a", "--suite", "all", "--out", str(tmp_path)]) == 0
        directory = tmp_path / "circle-a"
        assert len(reports_in(directory)) == 9
        summary = json.loads((directory / "summary.json").read_text(encoding="utf-8"))
        assert {item["status"] for item in summary} == {"pass"}
        for path in reports_in(directory):
            assert json.loads(path.read_text(encoding="utf-8"))["seed"] == 0

    def test_reports_are_reproducible(self, tmp_path):
        for name in ("a", "b"):
            assert main(["verify", "--suite", "all", "--seed", "4", "--out", str(tmp_path / name)]) == 0
        first = reports_in(tmp_path / "a" / "circle-a")
        second = reports_in(tmp_path / "b" / "circle-a")
        assert [p.name for p in first] == [p.name for p in second]
        for a, b in zip(first, second):
            assert a.read_bytes() == b.read_bytes()

    def test_vacuous_linklink_is_skipped(self, tmp_path, capsys):
        assert main(["verify", "--model", "round-sphere", "--suite", "linklink", "--out", str(tmp_path)]) == 1
        (directory,) = list(tmp_path.iterdir())
        summary = json.loads((directory / "summary.json").read_text(encoding="utf-8"))
        assert summary
        assert {item["status"] for item in summary} == {"skip"}
        out = capsys.readouterr().out
        assert "0 份通过" in out
        assert "skip" in out

    def test_over_z2(self, tmp_path):
        assert main(["verify", "--ring", "Z2", "--suite", "main2", "--out", str(tmp_path)]) == 0

    def test_unknown_model(self, tmp_path, capsys):
        assert main(["verify", "--model", "klein-bottle", "--out", str(tmp_path)]) == 2
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["code"] == "UNKNOWN_MODEL"

    def test_invalid_config_exit_code(self, tmp_path):
        assert main(["verify", "--ring", "R", "--out", str(tmp_path)]) == 2

    @pytest.mark.slow
    def test_sphere_b_identities_exact(self, tmp_path):
        args = ["verify", "--model", "sphere-b", "--suite", "identities", "--tol", "0", "--out", str(tmp_path)]
        assert main(args) == 0


class TestBeta:
    def test_circle_a(self, tmp_path):
        assert main(["beta", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "circle-a" / "beta.csv")
        assert len(rows) == 1
        assert rows[0]["k"] == "0"
        assert rows[0]["q_k"] == "1"
        assert float(rows[0]["beta_alg"]) == 2.0
        assert float(rows[0]["beta_geom"]) == 2.0

    def test_random_circle(self, tmp_path):
        args = ["beta", "-m", "circle-random", "-p", "seed=3", "-p", "m=5", "--out", str(tmp_path)]
        assert main(args) == 0
        (directory,) = list(tmp_path.iterdir())
        row = read_csv(directory / "beta.csv")[0]
        assert float(row["beta_alg"]) == pytest.approx(float(row["beta_geom"]), abs=1e-9)

    @pytest.mark.slow
    def test_round_sphere_zeros(self, tmp_path):
        assert main(["beta", "-m", "round-sphere", "--out", str(tmp_path)]) == 0
        (directory,) = list(tmp_path.iterdir())
        for row in read_csv(directory / "beta.csv"):
            assert row["q_k"] == "0"
            assert float(row["beta_alg"]) == 0.0
            assert float(row["beta_geom"]) == 0.0


class TestExport:
    def test_circle_a(self, tmp_path, circle_md):
        assert main(["export", "--out", str(tmp_path)]) == 0
        directory = tmp_path / "circle-a"
        cx = load_complex((directory / "complex_f.json").read_text(encoding="utf-8"))
        assert cx.boundary_entries() == circle_md.cx_f.boundary_entries()
        rows = read_csv(directory / "trajectories.csv")
        assert len(rows) == 4
        assert {row["sign"] for row in rows} <= {"1", "-1"}
        chains = json.loads((directory / "pseudoboundaries.json").read_text(encoding="utf-8"))
        assert [entry["generator"] for entry in chains["0"]] == ["M1", "M2"]


class TestOracleCommand:
    def test_linked_configuration(self, tmp_path):
        path = tmp_path / "circle.toml"
        path.write_text(
            'name = "hand"\n'
            "[[components]]\n"
            "points = [\n"
            '  {tag = "max", value = 4.0}, {tag = "b_plus", value = 0.5, mult = 1},\n'
            '  {tag = "min", value = 0.0}, {tag = "b_minus", value = 2.5, mult = 1},\n'
            '  {tag = "max", value = 3.0}, {tag = "b_plus", value = 1.5, mult = -1},\n'
            '  {tag = "min", value = 1.0}, {tag = "b_minus", value = 3.5, mult = -1},\n'
            "]\n",
            encoding="utf-8",
        )
        assert main(["oracle", "--circle", str(path), "--out", str(tmp_path / "out")]) == 0
        result = json.loads((tmp_path / "out" / "hand" / "oracle.json").read_text(encoding="utf-8"))
        assert result["lk"] == -1
        assert result["beta_geom"] == 2.0
        assert len(reports_in(tmp_path / "out" / "hand")) == 2

    def test_missing_file(self, tmp_path):
        assert main(["oracle", "--circle", str(tmp_path / "none.toml")]) == 1
