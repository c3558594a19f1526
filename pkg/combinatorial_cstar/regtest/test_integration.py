"""Acceptance runs of the whole pipeline on fixtures and random instances."""

import json

import pytest

from combinatorial_cstar.cstar_process import EXIT_PASS, main
from combinatorial_cstar.inverse_hull import Semilattice
from combinatorial_cstar.lemma_suite import LemmaSuite, order_wedge_failures
from combinatorial_cstar.spectrum import (
    enumerate_filters,
    is_tight_cover,
    is_tight_reduced,
    is_ultrafilter,
)


@pytest.mark.parametrize(
    "fixture,dimension,blocks",
    [("fixture_a", 4, [4]), ("fixture_b", 2, [1, 1]), ("fixture_c", 16, None)],
)
def test_fixture_reports(acceptance_process, acceptance_logger, fixture, dimension, blocks):
    report = acceptance_process.cmd_report(acceptance_process.load(fixture))
    model = report["model"]
    acceptance_logger.info(
        f"{fixture}: dimension {model['dimension']}, blocks {model['blocks']}, "
        f"relations {report['relations']['counts']}"
    )
    assert report["passed"]
    assert model["dimension"] == model["groupoid_size"] == dimension
    assert sum(model["blocks"]) == dimension
    if blocks is not None:
        assert model["blocks"] == blocks
    assert report["relations"]["passed"]
    assert report["ideals"]["missing_siso_only_if_zero"]
    assert report["detection"]["siso"]["detects"]
    assert report["detection"]["siso"]["stable"]


def test_report_round_trip_through_the_command_line(tmp_path):
    out = tmp_path / "fixture_c.json"
    assert main(["report", "fixture_c", "--out", str(out)]) == EXIT_PASS
    report = json.loads(out.read_text())
    assert report["passed"]
    assert report["spectrum"]["tight_filters"] == 4


def test_triple_tightness_oracle(acceptance_process, random_instances, acceptance_logger):
    limit = acceptance_process.config["BRUTE_FORCE_LIMIT"]
    checked = 0
    for _ in range(40):
        elements = random_instances.inverse_subsemigroup()
        E = Semilattice.from_sets(s.domain for s in elements)
        if len(E) > limit:
            continue
        for xi in enumerate_filters(E):
            verdicts = {is_ultrafilter(E, xi), is_tight_cover(E, xi), is_tight_reduced(E, xi)}
            assert len(verdicts) == 1, (E.idempotents, xi.minimum)
            checked += 1
    acceptance_logger.info(f"Tightness oracles agree on {checked} filters")
    assert checked > 0


def test_order_wedge_on_inverse_subsemigroups(random_instances):
    for _ in range(40):
        checked, failures = order_wedge_failures(random_instances.inverse_subsemigroup())
        assert failures == []


@pytest.mark.slow
def test_random_instances_pass_every_lemma(random_instances, acceptance_logger):
    specs = random_instances.instances()
    failed = []
    for spec in specs:
        suite = LemmaSuite(spec.category)
        suite.run()
        if not suite.passed:
            failed.append(spec.name)
    acceptance_logger.info(f"{len(specs) - len(failed)} of {len(specs)} random instances pass every lemma")
    assert failed == []


@pytest.mark.slow
def test_random_instances_siso_detects(acceptance_process, random_instances):
    for spec in random_instances.instances(20):
        report = acceptance_process.cmd_report(spec)
        assert report["passed"], spec.name
        assert report["ideals"]["missing_siso_only_if_zero"], spec.name
        assert report["detection"]["siso"]["detects"], spec.name


def test_detection_is_stable_under_tolerance(acceptance_process):
    for fixture in ("fixture_a", "fixture_b", "fixture_c"):
        spec = acceptance_process.load(fixture)
        for subalgebra in ("diagonal", "siso"):
            assert acceptance_process.cmd_detect(spec, subalgebra)["detection"]["stable"]
