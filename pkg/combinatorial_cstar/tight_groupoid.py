"""
Tight groupoids of germs and the distinguished inverse subsemigroups.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from networkx.utils import UnionFind

from combinatorial_cstar.exceptions import (
    ConsistencyError,
    DegreeError,
    NotSinglyAlignedError,
    PreconditionError,
    SubgroupoidError,
)
from combinatorial_cstar.inverse_hull import InverseHull, decompose, generate_hull
from combinatorial_cstar.lcsc_core import (
    Lcsc,
    core,
    is_exhaustive,
    is_singly_aligned,
    validate_degree,
)
from combinatorial_cstar.logger import logger
from combinatorial_cstar.spectrum import Filter, act, fixes_domain, tight_filters

__all__ = [
    "Germ",
    "FiniteGroupoid",
    "TightGroupoid",
    "IsotropyReport",
    "germ_equal",
    "build_tight_groupoid",
    "check_germ_products",
    "siso_algebraic",
    "siso_fixing",
    "siso_pairs",
    "compute_siso",
    "compute_f_lambda",
    "compute_s_c",
    "cycline_pairs",
    "siso_subgroupoid",
    "isotropy_check",
]


@dataclass(frozen=True)
class Germ:
    """A germ class [s, ξ]; ``s`` is a hull index and ``xi`` a tight-filter position."""

    s: int
    xi: int
    members: tuple[int, ...] = field(default=(), compare=False)

    @property
    def rep(self) -> tuple[int, int]:
        return (self.s, self.xi)


@dataclass(eq=False)
class FiniteGroupoid:
    """
    A finite groupoid given by tables over element indices.

    ``products[(a, b)]`` is defined exactly when ``source_of[a] == range_of[b]``.
    """

    labels: tuple[str, ...]
    units: frozenset[int]
    range_of: tuple[int, ...]
    source_of: tuple[int, ...]
    products: dict[tuple[int, int], int]
    inverse: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def unit_list(self) -> list[int]:
        return sorted(self.units)

    def composable(self, a: int, b: int) -> bool:
        return self.source_of[a] == self.range_of[b]

    def product(self, a: int, b: int) -> int:
        return self.products[(a, b)]

    def isotropy(self, x: int) -> frozenset[int]:
        return frozenset(
            g for g in range(len(self)) if self.range_of[g] == x == self.source_of[g]
        )

    def source_fibre(self, x: int) -> list[int]:
        return [g for g in range(len(self)) if self.source_of[g] == x]

    def is_bisection(self, subset: Iterable[int]) -> bool:
        subset = list(subset)
        return len({self.range_of[g] for g in subset}) == len(subset) == len(
            {self.source_of[g] for g in subset}
        )

    def bisection_product(self, U: Iterable[int], V: Iterable[int]) -> frozenset[int]:
        return frozenset(
            self.products[(a, b)] for a in U for b in V if self.composable(a, b)
        )

    def check_axioms(self) -> list[str]:
        """Groupoid axiom violations, as readable strings (empty when valid)."""
        problems = []
        n = len(self)
        for x in self.unit_list:
            if self.range_of[x] != x or self.source_of[x] != x or self.inverse[x] != x:
                problems.append(f"unit {x} is not its own range, source and inverse")
        for a, b in product(range(n), repeat=2):
            defined = (a, b) in self.products
            if defined != self.composable(a, b):
                problems.append(f"composability of ({a}, {b}) does not match r/d")
                continue
            if not defined:
                continue
            ab = self.products[(a, b)]
            if self.range_of[ab] != self.range_of[a] or self.source_of[ab] != self.source_of[b]:
                problems.append(f"r/d of product ({a}, {b}) are wrong")
        for a in range(n):
            inv = self.inverse[a]
            if self.inverse[inv] != a:
                problems.append(f"inverse is not an involution at {a}")
            if self.products.get((a, inv)) != self.range_of[a]:
                problems.append(f"{a} times its inverse is not r({a})")
            if self.products.get((inv, a)) != self.source_of[a]:
                problems.append(f"inverse of {a} times {a} is not d({a})")
            if self.products.get((self.range_of[a], a)) != a:
                problems.append(f"left unit law fails at {a}")
        for (a, b), ab in self.products.items():
            for c in range(n):
                if self.composable(b, c):
                    if self.products[(ab, c)] != self.products[(a, self.products[(b, c)])]:
                        problems.append(f"associativity fails at ({a}, {b}, {c})")
        return problems


@dataclass(eq=False)
class TightGroupoid(FiniteGroupoid):
    """The groupoid of germs of the hull acting on its tight filters."""

    germs: tuple[Germ, ...] = ()
    hull: Optional[InverseHull] = None
    filters: tuple[Filter, ...] = ()
    unit_of_filter: tuple[int, ...] = ()

    @cached_property
    def class_of(self) -> dict[tuple[int, int], int]:
        return {(s, g.xi): i for i, g in enumerate(self.germs) for s in g.members}

    def germ_class(self, s: int, xi: int) -> int:
        return self.class_of[(s, xi)]

    def filter_of_unit(self, x: int) -> int:
        return self.unit_of_filter.index(x)

    def bisection(self, s: int) -> frozenset[int]:
        """The germs [s, ξ] for ξ ranging over D_{s*s}."""
        e = self.hull.domains[s]
        return frozenset(
            self.class_of[(s, k)] for k, xi in enumerate(self.filters) if e in xi
        )


@dataclass(frozen=True)
class IsotropyReport:
    subgroupoid: bool
    within_isotropy: bool
    agreement_units: frozenset[int]
    dense: bool
    regime: str = "finite discrete unit space"

    def to_dict(self) -> dict:
        return {
            "subgroupoid": self.subgroupoid,
            "within_isotropy": self.within_isotropy,
            "agreement_units": sorted(self.agreement_units),
            "dense": self.dense,
            "regime": self.regime,
        }


def germ_equal(s: int, t: int, xi: Filter, hull: InverseHull) -> tuple[bool, Optional[int]]:
    """
    Whether [s, ξ] = [t, ξ], with the witnessing idempotent when they are.

    Returns
    -------
    (bool, int or None)
        The verdict and the semilattice index of some e ∈ ξ with se = te.

    Raises
    ------
    PreconditionError
        If s*s or t*t is not in ξ.
    """
    E = hull.semilattice
    if hull.domains[s] not in xi or hull.domains[t] not in xi:
        logger.error(f"Germs of {s} and {t} are not defined at the filter above {xi.minimum}")
        raise PreconditionError("germ comparison needs s*s and t*t in the filter")
    for e in sorted(xi.elements):
        if not (E.leq(e, hull.domains[s]) and E.leq(e, hull.domains[t])):
            continue
        idem = hull.idempotent(e)
        if hull.mul(s, idem) == hull.mul(t, idem):
            return True, e
    return False, None


def _germ_classes(hull: InverseHull, filters: Sequence[Filter]) -> list[Germ]:
    germs = []
    for k, xi in enumerate(filters):
        members = [
            s for s in range(len(hull)) if s != hull.zero and hull.domains[s] in xi
        ]
        uf = UnionFind(members)
        for s, t in combinations(members, 2):
            if germ_equal(s, t, xi, hull)[0]:
                uf.union(s, t)
        classes = sorted(sorted(cls) for cls in uf.to_sets())
        germs.extend(Germ(cls[0], k, tuple(cls)) for cls in classes)
    return sorted(germs, key=lambda g: g.rep)


def check_germ_products(G: TightGroupoid) -> None:
    """
    Recompute every product from every pair of representatives.

    Raises
    ------
    ConsistencyError
        If some product depends on the representatives chosen.
    """
    hull = G.hull
    for (a, b), ab in G.products.items():
        xi = G.germs[b].xi
        for t in G.germs[a].members:
            for s in G.germs[b].members:
                if G.class_of.get((hull.mul(t, s), xi)) != ab:
                    logger.error(f"Germ product ({a}, {b}) depends on representatives")
                    raise ConsistencyError("germ composition is not well defined")


def build_tight_groupoid(
    hull: InverseHull,
    filters: Optional[Sequence[Filter]] = None,
    verify: bool = True,
) -> TightGroupoid:
    """
    Build the groupoid of germs [s, ξ] over the tight filters.

    Parameters
    ----------
    hull : InverseHull
        The acting inverse semigroup.
    filters : sequence of Filter, optional
        The tight filters; computed from the hull's semilattice when omitted.
    verify : bool, optional
        Check the groupoid axioms and representative independence.

    Returns
    -------
    TightGroupoid
    """
    E = hull.semilattice
    filters = tuple(tight_filters(E) if filters is None else filters)
    position = {xi.minimum: k for k, xi in enumerate(filters)}
    germs = _germ_classes(hull, filters)
    class_of = {(s, g.xi): i for i, g in enumerate(germs) for s in g.members}

    unit_of_filter = tuple(
        class_of[(hull.idempotent(xi.minimum), k)] for k, xi in enumerate(filters)
    )
    source_of = []
    range_of = []
    inverse = []
    for g in germs:
        image = act(g.s, filters[g.xi], hull)
        k = position[image.minimum]
        source_of.append(unit_of_filter[g.xi])
        range_of.append(unit_of_filter[k])
        inverse.append(class_of[(hull.star(g.s), k)])

    products = {}
    for a, b in product(range(len(germs)), repeat=2):
        if source_of[a] == range_of[b]:
            products[(a, b)] = class_of[(hull.mul(germs[a].s, germs[b].s), germs[b].xi)]

    labels = tuple(f"[{g.s},{g.xi}]" for g in germs)
    G = TightGroupoid(
        labels=labels,
        units=frozenset(unit_of_filter),
        range_of=tuple(range_of),
        source_of=tuple(source_of),
        products=products,
        inverse=tuple(inverse),
        germs=tuple(germs),
        hull=hull,
        filters=filters,
        unit_of_filter=unit_of_filter,
    )
    if verify:
        problems = G.check_axioms()
        if problems:
            logger.error(f"Tight groupoid violates axioms: {problems[:3]}")
            raise ConsistencyError(f"groupoid axioms fail: {problems[0]}")
        check_germ_products(G)
    logger.debug(f"tight groupoid: {len(G)} elements, {len(G.units)} units")
    return G


def siso_algebraic(hull: InverseHull) -> frozenset[int]:
    """{s : s e s* e ≠ 0 for every nonzero e ⩽ s*s}."""
    E = hull.semilattice
    return frozenset(
        s
        for s in range(len(hull))
        if all(
            E.meet[hull.conjugate(s, e), e] != E.zero
            for e in E.nonzero
            if E.leq(e, hull.domains[s])
        )
    )


def siso_fixing(hull: InverseHull, filters: Optional[Sequence[Filter]] = None) -> frozenset[int]:
    """Elements whose action fixes every tight filter in their domain."""
    filters = tight_filters(hull.semilattice) if filters is None else filters
    return frozenset(s for s in range(len(hull)) if fixes_domain(s, hull, filters))


def _pair_in_iso(cat: Lcsc, a: int, b: int) -> bool:
    # γ ranges over s(β)Λ
    return all(
        cat.ideal(cat.compose(a, c)) & cat.ideal(cat.compose(b, c))
        for c in sorted(cat.ideal(cat.src[b]))
    )


def siso_pairs(hull: InverseHull) -> frozenset[int]:
    """Elements all of whose pieces αβ* satisfy αγΛ ∩ βγΛ ≠ ∅ for γ ∈ s(β)Λ."""
    cat = hull.cat
    return frozenset(
        s
        for s in range(len(hull))
        if s == hull.zero
        or all(_pair_in_iso(cat, a, b) for a, b in decompose(hull.elements[s], hull))
    )


def compute_siso(hull: InverseHull, filters: Optional[Sequence[Filter]] = None) -> frozenset[int]:
    """
    S^Iso, computed three independent ways.

    Raises
    ------
    ConsistencyError
        If the algebraic, filter-fixing and pair descriptions disagree, or a
        union of pieces is in S^Iso without every piece being in it.
    """
    algebraic = siso_algebraic(hull)
    fixing = siso_fixing(hull, filters)
    pairs = siso_pairs(hull)
    if not algebraic == fixing == pairs:
        diff = sorted((algebraic ^ fixing) | (algebraic ^ pairs))
        logger.error(f"S^Iso computations disagree on hull elements {diff}")
        raise ConsistencyError("S^Iso characterizations disagree")
    for s in range(len(hull)):
        if s == hull.zero:
            continue
        pieces = [hull.pair(a, b) for a, b in decompose(hull.elements[s], hull)]
        if (s in algebraic) != all(p in algebraic for p in pieces):
            logger.error(f"Piecewise S^Iso membership fails for hull element {s}")
            raise ConsistencyError("S^Iso is not decided piece by piece")
    logger.debug(f"S^Iso has {len(algebraic)} of {len(hull)} hull elements")
    return algebraic


def _exhaustive_family(cat: Lcsc, family: Iterable[int]) -> bool:
    family = frozenset(family)
    ranges = {cat.rng[a] for a in family}
    return len(ranges) == 1 and is_exhaustive(cat, family, ranges.pop())


def _assert_inverse_subsemigroup(hull: InverseHull, members: frozenset[int], name: str):
    for s in members:
        if hull.star(s) not in members:
            logger.error(f"{name} is not closed under inverses at {s}")
            raise ConsistencyError(f"{name} is not closed under inverses at {s}")
        for t in members:
            if hull.mul(s, t) not in members:
                logger.error(f"{name} is not closed under products at ({s}, {t})")
                raise ConsistencyError(f"{name} is not closed under products")


def compute_f_lambda(hull: InverseHull, siso: Optional[frozenset[int]] = None) -> frozenset[int]:
    """
    F_Λ: elements of S^Iso whose α- and β-families are both exhaustive, plus 0.
    """
    cat = hull.cat
    siso = compute_siso(hull) if siso is None else siso
    members = {hull.zero}
    for s in siso:
        if s == hull.zero:
            continue
        pieces = decompose(hull.elements[s], hull)
        if _exhaustive_family(cat, (a for a, _ in pieces)) and _exhaustive_family(
            cat, (b for _, b in pieces)
        ):
            members.add(s)
    members = frozenset(members)
    _assert_inverse_subsemigroup(hull, members, "F_Λ")
    return members


def compute_s_c(
    hull: InverseHull,
    siso: Optional[frozenset[int]] = None,
    f_lambda: Optional[frozenset[int]] = None,
) -> frozenset[int]:
    """
    S_c = {αβ* : α, β in the core} ∪ {0} for singly aligned categories.

    Raises
    ------
    NotSinglyAlignedError
        If the category is not singly aligned.
    """
    cat = hull.cat
    if not is_singly_aligned(cat):
        logger.error(f"{cat.name or 'category'} is not singly aligned; S_c undefined")
        raise NotSinglyAlignedError("S_c needs a singly aligned category")
    core_set = core(cat)
    members = {hull.zero}
    for s in range(len(hull)):
        if s == hull.zero:
            continue
        ((a, b),) = decompose(hull.elements[s], hull)
        if a in core_set and b in core_set:
            members.add(s)
    members = frozenset(members)
    _assert_inverse_subsemigroup(hull, members, "S_c")

    siso = compute_siso(hull) if siso is None else siso
    f_lambda = compute_f_lambda(hull, siso) if f_lambda is None else f_lambda
    if f_lambda != siso & members:
        logger.error("F_Λ differs from S^Iso ∩ S_c")
        raise ConsistencyError("F_Λ is not S^Iso ∩ S_c")
    return members


def cycline_pairs(
    cat: Lcsc,
    hull: Optional[InverseHull] = None,
    siso: Optional[frozenset[int]] = None,
) -> list[tuple[int, int]]:
    """
    All (α, β) with s(α) = s(β) and αβ* ∈ S^Iso.

    Raises
    ------
    DegreeError
        If the degree map is missing or fails unique factorization.
    """
    report = validate_degree(cat)
    if not report.passed:
        logger.error(f"Degree map of {cat.name or 'category'} is invalid: {report.failures}")
        raise DegreeError(f"invalid degree map: {sorted(report.axioms)}")
    hull = generate_hull(cat) if hull is None else hull
    siso = compute_siso(hull) if siso is None else siso
    return [
        (a, b)
        for a, b in product(range(cat.size), repeat=2)
        if cat.src[a] == cat.src[b] and hull.pair(a, b) in siso
    ]


def siso_subgroupoid(G: TightGroupoid, siso: Iterable[int]) -> frozenset[int]:
    """Germ classes having a representative in the given subsemigroup."""
    siso = frozenset(siso)
    return frozenset(i for i, g in enumerate(G.germs) if siso & set(g.members))


def isotropy_check(G: FiniteGroupoid, H: Iterable[int]) -> IsotropyReport:
    """
    Compare a subgroupoid with the isotropy of G unit by unit.

    Raises
    ------
    SubgroupoidError
        If H misses a unit or is not closed under products and inverses.
    """
    H = frozenset(H)
    closed = (
        G.units <= H
        and all(G.inverse[h] in H for h in H)
        and all(G.product(a, b) in H for a in H for b in H if G.composable(a, b))
    )
    if not closed:
        logger.error("Subset is not an open subgroupoid containing the units")
        raise SubgroupoidError("H is not a subgroupoid containing the unit space")
    within = all(G.range_of[h] == G.source_of[h] for h in H)
    agreement = frozenset(x for x in G.units if G.isotropy(x) <= H)
    return IsotropyReport(
        subgroupoid=True,
        within_isotropy=within,
        agreement_units=agreement,
        dense=agreement == G.units,
    )
