import argparse
import json
from pathlib import Path
from typing import Optional, Union

from astropy.table import Table

from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.exceptions import (
    CStarError,
    ConsistencyError,
    DegreeError,
    InputError,
    ResourceCapError,
)
from combinatorial_cstar.input_handler import InputSpec, parse_input
from combinatorial_cstar.inverse_hull import InverseHull, decompose, generate_hull
from combinatorial_cstar.lcsc_core import (
    Lcsc,
    core,
    invertibles,
    is_singly_aligned,
    right_ideal,
    validate,
    validate_degree,
)
from combinatorial_cstar.lemma_suite import (
    SUMMARY_COLUMNS,
    SUMMARY_DTYPES,
    LemmaSuite,
    order_wedge_failures,
    summary_table,
)
from combinatorial_cstar.logger import logger, set_verbose
from combinatorial_cstar.matrix_cstar import (
    FINITE_REGIME,
    analysis_checks,
    detection_verdict,
    enumerate_ideals,
    full_algebra,
    minimal_ideal_blocks,
    star_closure,
    t_op,
    verify_relations,
)
from combinatorial_cstar.random_instances import RandomInstances
from combinatorial_cstar.spectrum import (
    enumerate_filters,
    is_prime,
    is_ultrafilter,
    tight_filters,
)
from combinatorial_cstar.tight_groupoid import (
    TightGroupoid,
    build_tight_groupoid,
    compute_f_lambda,
    compute_s_c,
    compute_siso,
    cycline_pairs,
    isotropy_check,
    siso_subgroupoid,
)
from combinatorial_cstar.utils import fixture_path, list_fixtures, make_table, save_report
from combinatorial_cstar.utils.cstar_utils import SUPPORTED_REPORT_FORMATS

REPORT_SCHEMA = "cstar-report/1"
SUBALGEBRAS = ("diagonal", "siso", "core", "siso_core", "cycline", "full")

EXIT_PASS = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def table_rows(table: Table) -> dict:
    """A table as ``{"columns": [...], "rows": [[...], ...]}`` for reports."""
    return {"columns": list(table.colnames), "rows": [list(row) for row in table]}


def _log_table(title: str, table: Table):
    logger.debug(f"{title}\n" + "\n".join(table.pformat(max_lines=-1, max_width=-1)))


class CStarProcess:
    """
    Run the pipeline stages on parsed input documents.

    Attributes
    ----------
    config : dict
        Upper-case configuration keys, see ``default_cstar_config``.
    """

    def __init__(self, config_filename: Union[dict, str] = ""):
        """
        Parameters
        ----------
        config_filename : Union[dict, str], optional
            Path to a JSON configuration file, "" for the defaults, or a
            configuration dictionary.
        """
        self._set_config_file(config_filename)
        # pipeline stages per category object; see ``forget``
        self._stages: dict[Lcsc, dict] = {}

    def _set_config_file(self, config_filename: Union[dict, str] = ""):
        """
        Set the configuration.

        Keys absent from a file or dictionary keep their default values.
        """
        self.config = dict(default_cstar_config)
        if isinstance(config_filename, str):
            if config_filename:
                # a config filename was provided in JSON format
                with open(config_filename) as f:
                    self.config.update(json.load(f))
        else:
            # a config was provided in dict format
            self.config.update(config_filename)

    def load(self, source, require_cstar: bool = False) -> InputSpec:
        """
        Parse a document, a path, or the name of a fixture in ``FIXTURE_DIR``.
        """
        fixture_dir = self.config["FIXTURE_DIR"]
        if (
            isinstance(source, str)
            and not Path(source).exists()
            and source in list_fixtures(fixture_dir)
        ):
            source = fixture_path(source, fixture_dir)
        return parse_input(source, require_cstar=require_cstar, depth=self.config["DEPTH"])

    def _header(self, command: str, spec: Optional[InputSpec]) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "command": command,
            "input": None if spec is None else {"name": spec.name, "kind": spec.kind},
            "options": {
                "tolerance": self.config["TOLERANCE"],
                "seed": self.config["SEED"],
                "hull_cap": self.config["HULL_CAP"],
                "dimension_cap": self.config["DIMENSION_CAP"],
                "depth": self.config["DEPTH"],
            },
        }

    def _stage(self, cat: Lcsc) -> dict:
        return self._stages.setdefault(cat, {})

    def forget(self, cat: Lcsc):
        """Drop the cached hull, groupoid and SISO of ``cat``."""
        self._stages.pop(cat, None)

    def hull_of(self, cat: Lcsc) -> InverseHull:
        stages = self._stage(cat)
        if "hull" not in stages:
            logger.info(f"Generating inverse hull of {cat.name or 'input'}...")
            stages["hull"] = generate_hull(cat, cap=self.config["HULL_CAP"])
        return stages["hull"]

    def groupoid_of(self, cat: Lcsc) -> TightGroupoid:
        stages = self._stage(cat)
        if "groupoid" not in stages:
            hull = self.hull_of(cat)
            logger.info("Building tight groupoid...")
            stages["groupoid"] = build_tight_groupoid(hull, tight_filters(hull.semilattice))
        return stages["groupoid"]

    def siso_of(self, cat: Lcsc) -> frozenset[int]:
        stages = self._stage(cat)
        if "siso" not in stages:
            G = self.groupoid_of(cat)
            stages["siso"] = compute_siso(G.hull, G.filters)
        return stages["siso"]

    @staticmethod
    def _bounded_queries(cat: Lcsc) -> dict:
        return {
            "depth_bound": cat.depth_bound,
            "right_ideals": {
                cat.label(a): sorted(cat.label(b) for b in right_ideal(cat, a))
                for a in range(cat.size)
            },
        }

    def cmd_validate(self, spec: InputSpec) -> dict:
        cat = spec.category
        report = self._header("validate", spec)
        report["morphisms"] = cat.size
        if cat.is_bounded:
            report["validation"] = {"skipped": f"truncated at depth {cat.depth_bound}"}
            report["bounded"] = self._bounded_queries(cat)
            report["passed"] = True
            return report
        validation = validate(cat)
        report["validation"] = validation.to_dict()
        passed = validation.passed
        if cat.degree is not None:
            degree = validate_degree(cat)
            report["degree"] = degree.to_dict()
            passed = passed and degree.passed
        report["passed"] = passed
        return report

    def cmd_hull(self, spec: InputSpec) -> dict:
        cat = spec.category
        hull = self.hull_of(cat)
        report = self._header("hull", spec)
        elements = []
        for i, s in enumerate(hull.elements):
            pieces = [] if i == hull.zero else decompose(s, hull)
            elements.append(
                {
                    "index": i,
                    "map": s.describe(cat),
                    "idempotent": hull.is_idempotent(i),
                    "pieces": [[cat.label(a), cat.label(b)] for a, b in pieces],
                }
            )
        report["hull"] = {
            "size": len(hull),
            "idempotents": len(hull.semilattice),
            "singly_aligned": is_singly_aligned(cat),
            "invertibles": sorted(cat.label(u) for u in invertibles(cat)),
            "elements": elements,
        }
        report["passed"] = True
        return report

    def _describe_idempotent(self, cat: Lcsc, hull: InverseHull, e: int) -> str:
        return "{" + ",".join(cat.label(a) for a in sorted(hull.semilattice.idempotents[e])) + "}"

    def spectrum_census(self, cat: Lcsc) -> Table:
        hull = self.hull_of(cat)
        E = hull.semilattice
        tight = {xi.minimum for xi in tight_filters(E)}
        rows = [
            (
                xi.minimum,
                self._describe_idempotent(cat, hull, xi.minimum),
                len(xi),
                is_ultrafilter(E, xi),
                is_prime(E, xi),
                xi.minimum in tight,
            )
            for xi in enumerate_filters(E)
        ]
        table = make_table(
            rows,
            ("minimum", "constructible", "size", "ultrafilter", "prime", "tight"),
            (int, str, int, bool, bool, bool),
        )
        _log_table("Filter census", table)
        return table

    def cmd_spectrum(self, spec: InputSpec) -> dict:
        cat = spec.category
        hull = self.hull_of(cat)
        census = self.spectrum_census(cat)
        report = self._header("spectrum", spec)
        report["spectrum"] = {
            "semilattice": len(hull.semilattice),
            "filters": len(census),
            "ultrafilters": int(sum(census["ultrafilter"])),
            "tight_filters": int(sum(census["tight"])),
            # primeness only sees joins that are unions landing in the semilattice
            "prime_scope": "union joins in the idempotent semilattice",
            "census": table_rows(census),
        }
        report["passed"] = True
        return report

    def groupoid_census(self, G: TightGroupoid, H: frozenset[int]) -> Table:
        rows = [
            (x, G.filter_of_unit(x), len(G.isotropy(x)), len(G.isotropy(x) & H))
            for x in G.unit_list
        ]
        table = make_table(
            rows,
            ("unit", "filter", "isotropy", "siso_isotropy"),
            (int, int, int, int),
        )
        _log_table("Unit census", table)
        return table

    def cmd_groupoid(self, spec: InputSpec) -> dict:
        cat = spec.category
        G = self.groupoid_of(cat)
        hull = G.hull
        siso = self.siso_of(cat)
        f_lambda = compute_f_lambda(hull, siso)
        H = siso_subgroupoid(G, siso)
        iso = isotropy_check(G, H)
        census = self.groupoid_census(G, H)
        report = self._header("groupoid", spec)
        body = {
            "size": len(G),
            "units": len(G.units),
            "siso": sorted(siso),
            "f_lambda": sorted(f_lambda),
            "core": sorted(cat.label(a) for a in core(cat)),
            "isotropy": iso.to_dict(),
            "census": table_rows(census),
        }
        if is_singly_aligned(cat):
            body["s_c"] = sorted(compute_s_c(hull, siso, f_lambda))
        if cat.degree is not None:
            try:
                pairs = cycline_pairs(cat, hull, siso)
                body["cycline_pairs"] = [[cat.label(a), cat.label(b)] for a, b in pairs]
            except DegreeError as err:
                body["cycline_pairs"] = {"skipped": str(err)}
        report["groupoid"] = body
        report["passed"] = True
        return report

    def subalgebra_generators(self, cat: Lcsc, subalgebra: str) -> list:
        """
        The T-operators generating one of the named subalgebras.

        Raises
        ------
        InputError
            For an unknown subalgebra name.
        NotSinglyAlignedError
            For ``core`` on a category that is not singly aligned.
        DegreeError
            For ``cycline`` without a valid degree map.
        """
        G = self.groupoid_of(cat)
        hull = G.hull
        if subalgebra == "full":
            members = range(len(hull))
        elif subalgebra == "diagonal":
            members = hull.idempotent_elements
        elif subalgebra == "siso":
            members = self.siso_of(cat)
        elif subalgebra == "siso_core":
            members = compute_f_lambda(hull, self.siso_of(cat))
        elif subalgebra == "core":
            members = compute_s_c(hull, self.siso_of(cat))
        elif subalgebra == "cycline":
            members = {hull.pair(a, b) for a, b in cycline_pairs(cat, hull, self.siso_of(cat))}
        else:
            logger.error(f"Unknown subalgebra {subalgebra!r}")
            raise InputError(f"subalgebra must be one of {', '.join(SUBALGEBRAS)}")
        return [t_op(s, G) for s in sorted(members)]

    def detect(self, cat: Lcsc, subalgebra: str) -> dict:
        logger.info(f"Detecting ideals with the {subalgebra} subalgebra...")
        full = self.subalgebra_generators(cat, "full")
        gens = self.subalgebra_generators(cat, subalgebra)
        verdict = detection_verdict(
            full, gens, self.config["TOLERANCE"], self.config["DIMENSION_CAP"]
        )
        result = verdict.to_dict()
        result["subalgebra"] = subalgebra
        result["generators"] = len(gens)
        return result

    def cmd_detect(self, spec: InputSpec, subalgebra: str) -> dict:
        cat = spec.category
        cat.require_finite("detect")
        report = self._header("detect", spec)
        report["detection"] = self.detect(cat, subalgebra)
        report["passed"] = report["detection"]["detects"]
        return report

    def lemma_results(self, spec: InputSpec) -> tuple[bool, Table]:
        cat = spec.category
        validation = validate(cat)
        if not validation.passed:
            logger.warning(f"{spec.name}: invalid category {sorted(validation.axioms)}")
            table = make_table(
                [(spec.name, "category axioms", 1, len(validation.failures), False)],
                SUMMARY_COLUMNS,
                SUMMARY_DTYPES,
            )
            return False, table
        suite = LemmaSuite(cat, self.hull_of(cat), self.config["BRUTE_FORCE_LIMIT"])
        results = suite.run()
        return suite.passed, summary_table(results, spec.name)

    def cmd_verify_lemmas(self, spec: Optional[InputSpec] = None, random: Optional[int] = None) -> dict:
        report = self._header("verify-lemmas", spec)
        specs = [] if spec is None else [spec]
        if random:
            specs += RandomInstances(self.config["SEED"]).instances(random)
        tables = []
        passed = True
        for s in specs:
            ok, table = self.lemma_results(s)
            passed = passed and ok
            tables.append(table)
            if s is not spec:
                self.forget(s.category)

        wedge_rows = []
        if random:
            generator = RandomInstances(self.config["SEED"])
            for k in range(random):
                elements = generator.inverse_subsemigroup()
                checked, failures = order_wedge_failures(elements)
                passed = passed and not failures
                wedge_rows.append((f"I(X)_{k}", "order wedge", checked, len(failures), not failures))

        summary = make_table(
            [tuple(row) for t in tables for row in t] + wedge_rows,
            SUMMARY_COLUMNS,
            SUMMARY_DTYPES,
        )
        _log_table("Lemma summary", summary)
        report["instances"] = len(specs) + len(wedge_rows)
        report["lemmas"] = table_rows(summary)
        report["failed"] = [list(row) for row in summary if not row["passed"]]
        report["passed"] = passed
        return report

    def cmd_report(self, spec: InputSpec) -> dict:
        """Run every stage; finite-only stages are skipped on truncated inputs."""
        cat = spec.category
        report = self.cmd_validate(spec)
        report["command"] = "report"
        if cat.is_bounded:
            report["stages"] = {"skipped": "finite-only stages need an untruncated category"}
            return report
        if not report["passed"]:
            logger.info(f"{spec.name}: validation failed, later stages skipped")
            return report

        passed = True
        report["hull"] = self.cmd_hull(spec)["hull"]
        report["spectrum"] = self.cmd_spectrum(spec)["spectrum"]
        report["groupoid"] = self.cmd_groupoid(spec)["groupoid"]

        G = self.groupoid_of(cat)
        logger.info("Building matrix model...")
        A = full_algebra(G, self.config["TOLERANCE"], self.config["DIMENSION_CAP"])
        blocks = minimal_ideal_blocks(A, self.config["SEED"], self.config["RETRY_SEED"])
        report["model"] = {
            "dimension": A.dimension,
            "groupoid_size": len(G),
            "blocks": [b.dimension for b in blocks],
            "analysis": analysis_checks(A, G),
        }
        passed = passed and all(
            report["model"]["analysis"][k] for k in ("e_red_contractive", "e_red_faithful", "j_injective")
        )

        logger.info("Checking generator relations...")
        relations = verify_relations(G, spec.edges, self.config["BRUTE_FORCE_LIMIT"])
        report["relations"] = relations.to_dict()
        passed = passed and relations.passed

        detections = {}
        for name in ("diagonal", "siso", "siso_core", "core", "cycline"):
            if name == "core" and not is_singly_aligned(cat):
                detections[name] = {"skipped": "not singly aligned"}
                continue
            if name == "cycline" and cat.degree is None:
                detections[name] = {"skipped": "no degree map"}
                continue
            try:
                detections[name] = self.detect(cat, name)
            except DegreeError as err:
                detections[name] = {"skipped": str(err)}
        report["detection"] = detections
        passed = passed and all(
            d.get("detects", True) for n, d in detections.items() if n != "diagonal"
        )

        siso_gens = self.subalgebra_generators(cat, "siso")
        B = star_closure(siso_gens, self.config["TOLERANCE"], self.config["DIMENSION_CAP"], size=len(G))
        ideals = enumerate_ideals(A, B, blocks)
        # an ideal missing the S^Iso subalgebra must be zero
        report["ideals"] = {
            "count": len(ideals),
            "regime": FINITE_REGIME,
            "missing_siso_only_if_zero": all(
                i["dimension"] == 0 for i in ideals if i["intersection_dimension"] == 0
            ),
            "ideals": ideals,
        }
        passed = passed and report["ideals"]["missing_siso_only_if_zero"]

        lemmas_ok, lemma_table = self.lemma_results(spec)
        report["lemmas"] = table_rows(lemma_table)
        report["passed"] = passed and lemmas_ok
        return report


def _common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--config-filename",
        type=str,
        default="",
        help="Path to a JSON configuration file (default: built-in configuration).",
    )
    parser.add_argument("--tolerance", type=float, default=None, help="Numerical tolerance (default: 1e-9).")
    parser.add_argument("--depth", type=int, default=None, help="Path-length bound for cyclic graph inputs.")
    parser.add_argument("--cap", type=int, default=None, help="Largest inverse hull size (default: 100000).")
    parser.add_argument("--seed", type=int, default=None, help="Seed for random instances and block splitting.")
    parser.add_argument(
        "--out",
        type=str,
        default=None,
        help="Write the report to this file (.json or .asdf) instead of stdout.",
    )
    parser.add_argument(
        "--format",
        choices=SUPPORTED_REPORT_FORMATS,
        default=None,
        help="Report format for an --out path without a known suffix (default: json).",
    )
    parser.add_argument("--verbose", action="store_true", help="Also log DEBUG messages to the console.")


def _get_parser():
    """
    Build the ``cstar`` argument parser: one subcommand per pipeline stage.
    """
    parser = argparse.ArgumentParser(
        prog="cstar",
        description="Inverse hulls, tight groupoids and C*-models of finite categories.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("validate", "Check the category axioms (and the degree map, if any)."),
        ("hull", "Generate the left inverse hull."),
        ("spectrum", "List filters, ultrafilters and tight filters."),
        ("groupoid", "Build the tight groupoid and its distinguished subsemigroups."),
        ("report", "Run the whole pipeline."),
    ):
        sub = subparsers.add_parser(name, help=text)
        sub.add_argument("input", help="Input document, or the name of a packaged fixture.")
        _common_arguments(sub)

    detect = subparsers.add_parser("detect", help="Check whether a subalgebra detects ideals.")
    detect.add_argument("input", help="Input document, or the name of a packaged fixture.")
    detect.add_argument("--subalgebra", choices=SUBALGEBRAS, default="siso")
    _common_arguments(detect)

    lemmas = subparsers.add_parser("verify-lemmas", help="Run the lemma suites.")
    lemmas.add_argument("input", nargs="?", default=None, help="Input document (optional).")
    lemmas.add_argument("--random", type=int, default=None, help="Also check this many random instances.")
    _common_arguments(lemmas)
    return parser


def _apply_overrides(process: CStarProcess, args):
    for flag, key in (
        ("tolerance", "TOLERANCE"),
        ("depth", "DEPTH"),
        ("cap", "HULL_CAP"),
        ("seed", "SEED"),
        ("format", "OUTPUT_FORMAT"),
    ):
        value = getattr(args, flag)
        if value is not None:
            process.config[key] = value


def run(process: CStarProcess, args) -> dict:
    if args.command == "verify-lemmas":
        spec = None if args.input is None else process.load(args.input)
        return process.cmd_verify_lemmas(spec, args.random)
    require_cstar = args.command in ("groupoid", "detect")
    spec = process.load(args.input, require_cstar=require_cstar)
    if args.command == "detect":
        return process.cmd_detect(spec, args.subalgebra)
    return getattr(process, f"cmd_{args.command}")(spec)


def main(argv=None) -> int:
    """
    Entry point of the ``cstar`` command; returns the exit code.
    """
    parser = _get_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        set_verbose(logger)

    logger.info(f"Starting cstar {args.command}")
    try:
        process = CStarProcess(config_filename=args.config_filename)
        _apply_overrides(process, args)
        report = run(process, args)
        text = save_report(report, args.out, process.config["OUTPUT_FORMAT"])
    except ResourceCapError as err:
        logger.info(f"Resource cap reached: {err}")
        return EXIT_RESOURCE
    except ConsistencyError as err:
        logger.info(f"Cross-check failed: {err}")
        return EXIT_NEGATIVE
    except (CStarError, ValueError, OSError) as err:
        logger.info(f"Input rejected: {err}")
        return EXIT_INPUT

    if args.out is None:
        print(text)
    logger.info(f"cstar {args.command} completed")
    return EXIT_PASS if report.get("passed", False) else EXIT_NEGATIVE
