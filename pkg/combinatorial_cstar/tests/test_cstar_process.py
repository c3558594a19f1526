import json
from unittest.mock import patch

import asdf
import pytest

from combinatorial_cstar.cstar_process import (
    EXIT_INPUT,
    EXIT_NEGATIVE,
    EXIT_PASS,
    EXIT_RESOURCE,
    REPORT_SCHEMA,
    CStarProcess,
    _get_parser,
    main,
)
from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.exceptions import ConsistencyError, InputError
from combinatorial_cstar.utils import fixture_path, list_fixtures
from combinatorial_cstar.utils.cstar_utils import REPORT_TREE_KEY


class TestConfiguration:
    def test_defaults(self):
        process = CStarProcess()
        assert process.config == default_cstar_config

    def test_dict_overrides_merge(self):
        process = CStarProcess(config_filename={"TOLERANCE": 1e-6})
        assert process.config["TOLERANCE"] == 1e-6
        assert process.config["HULL_CAP"] == default_cstar_config["HULL_CAP"]

    def test_json_file(self, tmp_path):
        config_file = tmp_path / "config.json"
        config_file.write_text(json.dumps({"SEED": 99, "BRUTE_FORCE_LIMIT": 8}))
        process = CStarProcess(config_filename=str(config_file))
        assert process.config["SEED"] == 99
        assert process.config["BRUTE_FORCE_LIMIT"] == 8
        assert process.config["TOLERANCE"] == default_cstar_config["TOLERANCE"]

    def test_fixture_dir(self, tmp_path):
        doc = json.loads(fixture_path("fixture_b").read_text())
        doc["name"] = "local_group"
        (tmp_path / "local_group.json").write_text(json.dumps(doc))
        process = CStarProcess(config_filename={"FIXTURE_DIR": str(tmp_path)})
        spec = process.load("local_group")
        assert spec.name == "local_group"
        assert spec.category.size == 2
        assert list_fixtures(str(tmp_path)) == ["local_group"]

    def test_defaults_are_not_mutated(self):
        seed = default_cstar_config["SEED"]
        CStarProcess(config_filename={"SEED": seed + 1})
        assert default_cstar_config["SEED"] == seed


class TestStages:
    def test_load_fixture_by_name(self, cstar_process):
        spec = cstar_process.load("fixture_a")
        assert spec.name == "fixture_a"
        assert spec.category.size == 3

    def test_validate(self, cstar_process):
        report = cstar_process.cmd_validate(cstar_process.load("fixture_a"))
        assert report["schema"] == REPORT_SCHEMA
        assert report["input"] == {"name": "fixture_a", "kind": "graph"}
        assert report["passed"]
        assert report["degree"]["passed"]

    def test_validate_reports_witness(self, cstar_process):
        report = cstar_process.cmd_validate(cstar_process.load("idempotent_monoid"))
        assert not report["passed"]
        assert report["validation"]["failures"] == [
            {"axiom": "left cancellation", "witness": [1, 0, 1]}
        ]

    def test_validate_truncated(self, cstar_process):
        report = cstar_process.cmd_validate(cstar_process.load("loop"))
        assert report["passed"]
        assert "skipped" in report["validation"]
        assert report["bounded"]["depth_bound"] == 3
        assert report["bounded"]["right_ideals"]["v"] == ["f", "f.f", "f.f.f", "v"]

    def test_hull(self, cstar_process):
        hull = cstar_process.cmd_hull(cstar_process.load("fixture_a"))["hull"]
        assert hull["size"] == 6
        assert hull["idempotents"] == 4
        assert hull["singly_aligned"]
        assert hull["invertibles"] == ["v", "w"]
        assert hull["elements"][2]["pieces"] == [["e", "w"]]

    def test_spectrum(self, cstar_process):
        spectrum = cstar_process.cmd_spectrum(cstar_process.load("fixture_a"))["spectrum"]
        assert spectrum["filters"] == 3
        assert spectrum["ultrafilters"] == 2
        assert spectrum["tight_filters"] == 2
        assert [row[-1] for row in spectrum["census"]["rows"]] == [True, True, False]
        # the filter above {v, e} is prime but not tight
        assert [row[-2] for row in spectrum["census"]["rows"]] == [True, True, True]
        assert "union" in spectrum["prime_scope"]

    def test_groupoid(self, cstar_process):
        groupoid = cstar_process.cmd_groupoid(cstar_process.load("fixture_a"))["groupoid"]
        assert groupoid["size"] == 4
        assert groupoid["units"] == 2
        assert groupoid["siso"] == [0, 1, 4, 5]
        assert groupoid["f_lambda"] == [0, 1, 4, 5]
        assert groupoid["s_c"] == [0, 1, 2, 3, 4, 5]
        assert groupoid["cycline_pairs"] == [["v", "v"], ["w", "w"], ["e", "e"]]
        assert groupoid["isotropy"]["dense"]

    def test_groupoid_without_single_alignment(self, cstar_process):
        groupoid = cstar_process.cmd_groupoid(cstar_process.load("fixture_d"))["groupoid"]
        assert "s_c" not in groupoid

    @pytest.mark.parametrize(
        "fixture,subalgebra,expected",
        [
            ("fixture_a", "diagonal", True),
            ("fixture_a", "siso", True),
            ("fixture_a", "siso_core", True),
            ("fixture_a", "core", True),
            ("fixture_b", "diagonal", False),
            ("fixture_b", "siso", True),
            ("fixture_c", "cycline", True),
        ],
    )
    def test_detect(self, cstar_process, fixture, subalgebra, expected):
        report = cstar_process.cmd_detect(cstar_process.load(fixture), subalgebra)
        assert report["passed"] is expected
        assert report["detection"]["subalgebra"] == subalgebra
        assert report["detection"]["stable"]

    def test_unknown_subalgebra(self, cstar_process):
        spec = cstar_process.load("fixture_a")
        with pytest.raises(InputError):
            cstar_process.subalgebra_generators(spec.category, "upper")

    def test_report_fixture_a(self, cstar_process):
        report = cstar_process.cmd_report(cstar_process.load("fixture_a"))
        assert report["passed"]
        assert report["model"]["dimension"] == report["model"]["groupoid_size"] == 4
        assert report["model"]["blocks"] == [4]
        assert report["relations"]["passed"]
        assert report["ideals"]["missing_siso_only_if_zero"]
        assert report["detection"]["cycline"]["detects"]

    def test_report_fixture_b(self, cstar_process):
        report = cstar_process.cmd_report(cstar_process.load("fixture_b"))
        assert report["passed"]
        assert report["model"]["blocks"] == [1, 1]
        assert not report["detection"]["diagonal"]["detects"]
        assert report["detection"]["siso"]["detects"]
        assert "skipped" in report["detection"]["cycline"]
        assert report["ideals"]["count"] == 4

    def test_report_truncated(self, cstar_process):
        report = cstar_process.cmd_report(cstar_process.load("loop"))
        assert report["command"] == "report"
        assert "skipped" in report["stages"]

    def test_verify_lemmas(self, cstar_process):
        report = cstar_process.cmd_verify_lemmas(cstar_process.load("fixture_c"), random=2)
        assert report["passed"]
        assert report["instances"] == 5
        assert report["failed"] == []

    def test_stages_are_cached_per_category(self, cstar_process):
        first = cstar_process.load("fixture_a").category
        second = cstar_process.load("fixture_a").category
        hull = cstar_process.hull_of(first)
        assert cstar_process.hull_of(first) is hull
        assert cstar_process.groupoid_of(first).hull is hull
        assert cstar_process.hull_of(second) is not hull
        cstar_process.forget(first)
        assert cstar_process.hull_of(first) is not hull

    def test_verify_lemmas_drops_random_instances(self, cstar_process):
        spec = cstar_process.load("fixture_c")
        cstar_process.cmd_verify_lemmas(spec, random=3)
        assert list(cstar_process._stages) == [spec.category]


class TestCommandLine:
    def test_parser_commands(self):
        args = _get_parser().parse_args(["detect", "fixture_b", "--subalgebra", "diagonal"])
        assert args.command == "detect"
        assert args.subalgebra == "diagonal"
        assert _get_parser().parse_args(["detect", "fixture_b"]).subalgebra == "siso"

    def test_pass(self, capsys):
        assert main(["validate", "fixture_a"]) == EXIT_PASS
        report = json.loads(capsys.readouterr().out)
        assert report["passed"]

    @pytest.mark.parametrize(
        "argv",
        [
            ["detect", "fixture_b", "--subalgebra", "diagonal"],
            ["validate", "idempotent_monoid"],
        ],
        ids=["diagonal_misses_ideal", "not_left_cancellative"],
    )
    def test_negative(self, argv):
        assert main(argv) == EXIT_NEGATIVE

    def test_malformed_document(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format": "cstar-input/1", "kind": ')
        assert main(["validate", str(bad)]) == EXIT_INPUT

    def test_cyclic_input_at_cstar_level(self):
        assert main(["groupoid", "loop"]) == EXIT_INPUT

    def test_resource_cap(self):
        assert main(["hull", "fixture_c", "--cap", "3"]) == EXIT_RESOURCE

    def test_consistency_error_is_negative(self):
        with patch(
            "combinatorial_cstar.cstar_process.CStarProcess.cmd_validate",
            side_effect=ConsistencyError("oracles disagree"),
        ):
            assert main(["validate", "fixture_a"]) == EXIT_NEGATIVE

    def test_json_output(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["report", "fixture_b", "--out", str(out)]) == EXIT_PASS
        report = json.loads(out.read_text())
        assert report["command"] == "report"
        assert report["passed"]

    def test_asdf_output(self, tmp_path):
        out = tmp_path / "report.asdf"
        assert main(["spectrum", "fixture_a", "--out", str(out)]) == EXIT_PASS
        with asdf.open(out) as af:
            assert af.tree[REPORT_TREE_KEY]["spectrum"]["tight_filters"] == 2

    def test_format_flag_without_suffix(self, tmp_path):
        out = tmp_path / "report"
        assert main(["spectrum", "fixture_a", "--out", str(out), "--format", "asdf"]) == EXIT_PASS
        with asdf.open(out) as af:
            assert af.tree[REPORT_TREE_KEY]["spectrum"]["tight_filters"] == 2

    def test_output_format_from_config(self, tmp_path):
        config_file = tmp_path / "config.json"
        config_file.write_text(json.dumps({"OUTPUT_FORMAT": "asdf"}))
        out = tmp_path / "report"
        argv = ["validate", "fixture_a", "--out", str(out), "--config-filename", str(config_file)]
        assert main(argv) == EXIT_PASS
        with asdf.open(out) as af:
            assert af.tree[REPORT_TREE_KEY]["passed"]

    def test_suffix_wins_over_output_format(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["validate", "fixture_a", "--out", str(out), "--format", "asdf"]) == EXIT_PASS
        assert json.loads(out.read_text())["passed"]

    def test_unsupported_output(self, tmp_path):
        out = tmp_path / "report.txt"
        assert main(["validate", "fixture_a", "--out", str(out)]) == EXIT_INPUT
        assert not out.exists()

    def test_overrides_reach_the_process(self):
        with patch("combinatorial_cstar.cstar_process.run", return_value={"passed": True}) as run:
            assert main(["validate", "fixture_a", "--tolerance", "1e-6", "--seed", "5"]) == EXIT_PASS
        process = run.call_args[0][0]
        assert process.config["TOLERANCE"] == 1e-6
        assert process.config["SEED"] == 5
