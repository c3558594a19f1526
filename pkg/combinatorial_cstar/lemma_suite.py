"""
Exhaustive checks of the structural lemmas on one category or inverse semigroup.
"""

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Optional, Sequence

from astropy.table import Table

from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.exceptions import CStarError, ConsistencyError
from combinatorial_cstar.inverse_hull import (
    ZERO,
    InverseHull,
    PartialBij,
    compose,
    decompose,
    generate_hull,
    inverse_of,
    natural_leq,
    singly_aligned_product,
    union_join,
)
from combinatorial_cstar.lcsc_core import (
    Lcsc,
    alignment_witness,
    core,
    ideal_meet,
    invertibles,
    is_exhaustive,
    is_singly_aligned,
)
from combinatorial_cstar.logger import logger
from combinatorial_cstar.spectrum import (
    enumerate_filters,
    filters_containing,
    is_prime,
    is_tight,
    is_tight_cover,
    is_tight_reduced,
    is_ultrafilter,
    tight_filters,
    union_relations,
)
from combinatorial_cstar.tight_groupoid import compute_f_lambda, compute_siso
from combinatorial_cstar.utils import make_table

__all__ = [
    "LEMMAS",
    "SUMMARY_COLUMNS",
    "SUMMARY_DTYPES",
    "LemmaResult",
    "LemmaSuite",
    "order_wedge_failures",
    "summary_table",
]

SUMMARY_COLUMNS = ("instance", "lemma", "checked", "failures", "passed")
SUMMARY_DTYPES = (str, str, int, int, bool)

LEMMAS = (
    "order wedge",
    "tight is prime",
    "prime is tight",
    "distributes over unions",
    "tight union has a piece",
    "siso three ways",
    "F closed",
    "core properties",
    "hull form",
    "iso intersection",
    "iso to core",
    "tightness oracles",
)


@dataclass
class LemmaResult:
    lemma: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "checked": self.checked,
            "passed": self.passed,
            "failures": [list(f) for f in self.failures[:10]],
        }


def order_wedge_failures(elements: Sequence[PartialBij]) -> tuple[int, list]:
    """
    For a ⩽ s in an inverse semigroup of partial bijections:
    s e s* = a e a* for idempotents e ⩽ a*a, and t*st = t*at when tt* ⩽ aa*.

    Every member of a compatible family lies below its join, so the pairs
    a ⩽ s cover every join.
    """
    elements = list(elements)
    idempotents = [e for e in elements if e.is_idempotent]
    checked, failures = 0, []
    for a, s in product(elements, repeat=2):
        if not natural_leq(a, s):
            continue
        a_dom = compose(inverse_of(a), a)
        a_ran = compose(a, inverse_of(a))
        for e in idempotents:
            if natural_leq(e, a_dom):
                checked += 1
                lhs = compose(compose(s, e), inverse_of(s))
                rhs = compose(compose(a, e), inverse_of(a))
                if lhs != rhs:
                    failures.append((a.pairs, s.pairs, e.pairs))
        for t in elements:
            if natural_leq(compose(t, inverse_of(t)), a_ran):
                checked += 1
                lhs = compose(inverse_of(t), compose(s, t))
                rhs = compose(inverse_of(t), compose(a, t))
                if lhs != rhs:
                    failures.append((a.pairs, s.pairs, t.pairs))
    return checked, failures


class LemmaSuite:
    """
    Run every lemma check on a finite category.

    Parameters
    ----------
    cat : Lcsc
        A finite, validated category.
    hull : InverseHull, optional
        Its left inverse hull, generated when omitted.
    limit : int, optional
        Largest |E| for the literal subset enumerations.
    """

    def __init__(self, cat: Lcsc, hull: Optional[InverseHull] = None, limit: Optional[int] = None):
        self.cat = cat
        self.hull = generate_hull(cat) if hull is None else hull
        self.limit = default_cstar_config["BRUTE_FORCE_LIMIT"] if limit is None else limit
        self.E = self.hull.semilattice
        self.filters = tight_filters(self.E)
        self.results: list[LemmaResult] = []

    def _run(self, lemma: str, check: Callable[[LemmaResult], None]) -> LemmaResult:
        result = LemmaResult(lemma)
        try:
            check(result)
        except ConsistencyError as err:
            result.failures.append(("consistency", str(err)))
        except CStarError as err:
            result.failures.append(("error", type(err).__name__, str(err)))
        if not result.passed:
            logger.warning(f"{self.cat.name or 'category'}: {lemma} failed {result.failures[:3]}")
        return result

    def run(self) -> list[LemmaResult]:
        checks = [
            ("order wedge", self.check_order_wedge),
            ("tight is prime", self.check_tight_prime),
            ("prime is tight", self.check_prime_tight),
            ("distributes over unions", self.check_distributive),
            ("tight union has a piece", self.check_tight_union),
            ("siso three ways", self.check_siso),
            ("F closed", self.check_f_closed),
            ("core properties", self.check_core),
            ("hull form", self.check_hull_form),
            ("iso intersection", self.check_iso_intersection),
            ("iso to core", self.check_iso_to_core),
            ("tightness oracles", self.check_tightness_oracles),
        ]
        self.results = [self._run(name, check) for name, check in checks]
        failed = [r.lemma for r in self.results if not r.passed]
        logger.debug(f"{self.cat.name or 'category'}: lemma failures {failed}")
        return self.results

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def siso(self) -> frozenset[int]:
        if not hasattr(self, "_siso"):
            self._siso = compute_siso(self.hull, self.filters)
        return self._siso

    def check_order_wedge(self, result: LemmaResult):
        result.checked, result.failures = order_wedge_failures(self.hull.elements)

    def check_tight_prime(self, result: LemmaResult):
        joins = union_relations(self.E, self.limit) if len(self.E) <= self.limit else None
        for xi in self.filters:
            result.checked += 1
            if not is_prime(self.E, xi, joins):
                result.failures.append((xi.minimum,))
            if joins is not None and is_prime(self.E, xi) != is_prime(self.E, xi, joins):
                result.failures.append(("prime shortcut", xi.minimum))

    def check_prime_tight(self, result: LemmaResult):
        # only where every compatible finite join and relative complement exists
        if not self.E.is_boolean_ring():
            return
        for xi in enumerate_filters(self.E):
            if is_prime(self.E, xi):
                result.checked += 1
                if not is_tight(self.E, xi, cross_check=False):
                    result.failures.append((xi.minimum,))

    def check_distributive(self, result: LemmaResult):
        hull = self.hull
        for s in range(len(hull)):
            if s == hull.zero:
                continue
            pieces = [hull.elements[hull.pair(a, b)] for a, b in decompose(hull.elements[s], hull)]
            for t in hull.elements:
                result.checked += 1
                left = [p for p in (compose(t, q) for q in pieces) if not p.is_zero]
                right = [p for p in (compose(q, t) for q in pieces) if not p.is_zero]
                if compose(t, hull.elements[s]) != (union_join(left) if left else ZERO):
                    result.failures.append(("left", s, hull.index_of(t)))
                if compose(hull.elements[s], t) != (union_join(right) if right else ZERO):
                    result.failures.append(("right", s, hull.index_of(t)))

    def check_tight_union(self, result: LemmaResult):
        hull = self.hull
        for k, xi in enumerate(self.filters):
            for e in xi.elements:
                result.checked += 1
                pieces = decompose(hull.elements[hull.idempotent(e)], hull)
                if not any(hull.domains[hull.pair(a, a)] in xi for a, _ in pieces):
                    result.failures.append((k, e))

    def check_siso(self, result: LemmaResult):
        hull = self.hull
        result.checked = len(hull)
        siso = self.siso
        missing = [i for i in hull.idempotent_elements if i not in siso]
        if missing:
            result.failures.append(("idempotents", *missing))
        for s, t in product(sorted(siso), repeat=2):
            if hull.mul(s, t) not in siso or hull.star(s) not in siso:
                result.failures.append(("closure", s, t))
                break

    def check_f_closed(self, result: LemmaResult):
        f_lambda = compute_f_lambda(self.hull, self.siso)
        result.checked = len(f_lambda) ** 2

    def check_core(self, result: LemmaResult):
        cat = self.cat
        core_set = core(cat)
        units = invertibles(cat)
        for x in sorted(cat.objects):
            result.checked += 1
            if x not in core_set:
                result.failures.append(("identity", x))
        for u in units:
            result.checked += 1
            if u not in core_set:
                result.failures.append(("invertible", u))
        for (a, b), ab in sorted(cat.table.items()):
            result.checked += 1
            if a in core_set and b in core_set and ab not in core_set:
                result.failures.append(("subcategory", a, b))
            if ab in core_set and not (a in core_set and b in core_set):
                result.failures.append(("factors", a, b))
        singly = is_singly_aligned(cat)
        for a, b in combinations(sorted(core_set), 2):
            if cat.rng[a] != cat.rng[b]:
                continue
            witness = alignment_witness(cat, a, b)
            result.checked += 1
            if not is_exhaustive(cat, witness, cat.rng[a]):
                result.failures.append(("meet exhaustive", a, b))
            if singly and witness and witness[0] not in core_set:
                result.failures.append(("meet in core", a, b))

    def _pairs(self) -> list[tuple[int, int]]:
        cat = self.cat
        return [
            (a, b) for a, b in product(range(cat.size), repeat=2) if cat.src[a] == cat.src[b]
        ]

    def check_hull_form(self, result: LemmaResult):
        cat, hull = self.cat, self.hull
        if not is_singly_aligned(cat):
            return
        units = invertibles(cat)
        pairs = self._pairs()
        for p1, p2 in product(pairs, repeat=2):
            result.checked += 1
            got = singly_aligned_product(p1, p2, cat)
            expected = hull.mul(hull.pair(*p1), hull.pair(*p2))
            if (hull.zero if got is None else hull.pair(*got)) != expected:
                result.failures.append(("product", *p1, *p2))
            same = hull.pair(*p1) == hull.pair(*p2)
            related = any(
                cat.compose(p1[0], u) == p2[0] and cat.compose(p1[1], u) == p2[1]
                for u in units
                if cat.rng[u] == cat.src[p1[0]]
            )
            if same != related:
                result.failures.append(("invertible", *p1, *p2))

    def _constructible(self, a: int) -> int:
        """Semilattice index of αΛ."""
        return self.hull.ranges[self.hull.basic(a)]

    def check_iso_intersection(self, result: LemmaResult):
        cat, hull = self.cat, self.hull
        for a, b in self._pairs():
            if hull.pair(a, b) not in self.siso:
                continue
            result.checked += 1
            d_a = set(filters_containing(self._constructible(a), self.filters))
            d_b = set(filters_containing(self._constructible(b), self.filters))
            union = set()
            for g in alignment_witness(cat, a, b):
                union |= set(filters_containing(self._constructible(g), self.filters))
            if not d_a == d_b == union:
                result.failures.append((a, b))

    def check_iso_to_core(self, result: LemmaResult):
        cat, hull = self.cat, self.hull
        f_lambda = compute_f_lambda(hull, self.siso)
        for a, b in self._pairs():
            s = hull.pair(a, b)
            if s not in self.siso:
                continue
            for d in sorted(ideal_meet(cat, a, b)):
                result.checked += 1
                delta = hull.basic(d)
                conjugated = hull.mul(hull.star(delta), hull.mul(s, delta))
                if conjugated not in f_lambda:
                    result.failures.append((a, b, d))

    def check_tightness_oracles(self, result: LemmaResult):
        if len(self.E) > self.limit:
            return
        for xi in enumerate_filters(self.E):
            result.checked += 1
            verdicts = (
                is_ultrafilter(self.E, xi),
                is_tight_cover(self.E, xi),
                is_tight_reduced(self.E, xi),
            )
            if len(set(verdicts)) != 1:
                result.failures.append((xi.minimum, *verdicts))


def summary_table(results: Sequence[LemmaResult], instance: str = "") -> Table:
    """One row per lemma: instance, lemma, checked, failures, passed."""
    return make_table(
        [(instance, r.lemma, r.checked, len(r.failures), r.passed) for r in results],
        SUMMARY_COLUMNS,
        SUMMARY_DTYPES,
    )
