"""
Finite left cancellative small categories.

A category is stored as dense integer morphism IDs with range/source maps and
a partial composition table. Identities are morphisms too: ``objects`` is the
subset of IDs that are identities.
"""

import itertools
import operator
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Optional

from combinatorial_cstar.exceptions import (
    ConsistencyError,
    DegreeError,
    PreconditionError,
    StructuralError,
    UnboundedCategoryError,
    UnknownMorphismError,
)
from combinatorial_cstar.logger import logger

__all__ = [
    "AxiomFailure",
    "ValidationReport",
    "RightIdeal",
    "Lcsc",
    "validate",
    "right_ideal",
    "ideal_meet",
    "maximal_generators",
    "alignment_witness",
    "is_singly_aligned",
    "invertibles",
    "is_exhaustive",
    "core",
    "validate_degree",
]


class AxiomFailure(NamedTuple):
    axiom: str
    witness: tuple[int, ...]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of an axiom check; ``passed`` iff there are no failures."""

    failures: tuple[AxiomFailure, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def axioms(self) -> set[str]:
        return {f.axiom for f in self.failures}

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failures": [
                {"axiom": f.axiom, "witness": list(f.witness)} for f in self.failures
            ],
        }


@dataclass(frozen=True)
class RightIdeal:
    generator: int
    elements: frozenset[int]

    def __contains__(self, item) -> bool:
        return item in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class Lcsc:
    """
    A finite (or depth-bounded) small category given by tables.

    Attributes
    ----------
    names : tuple of str
        Morphism labels; the position is the morphism ID.
    objects : frozenset of int
        IDs of the identity morphisms.
    src, rng : tuple of int
        Source and range of every morphism, as object IDs.
    table : Mapping[(int, int), int]
        Composition ``(a, b) -> ab``, defined when ``src[a] == rng[b]``.
    degree : tuple of tuple of int, optional
        Degree vector in N^k for every morphism.
    depth_bound : int, optional
        Set for truncated presentations of infinite categories.
    name : str
        Label used in logs and reports.
    """

    names: tuple[str, ...]
    objects: frozenset[int]
    src: tuple[int, ...]
    rng: tuple[int, ...]
    table: Mapping[tuple[int, int], int] = field(repr=False)
    degree: Optional[tuple[tuple[int, ...], ...]] = None
    depth_bound: Optional[int] = None
    name: str = ""

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def is_bounded(self) -> bool:
        return self.depth_bound is not None

    @property
    def rank(self) -> int:
        """The k of a k-graph degree map (0 when no degree is attached)."""
        if not self.degree:
            return 0
        return len(self.degree[0])

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.names)}

    def id_of(self, label: str) -> int:
        try:
            return self.index[label]
        except KeyError:
            logger.error(f"Unknown morphism {label!r} in {self.name or 'category'}")
            raise UnknownMorphismError(f"unknown morphism {label!r}") from None

    def check_id(self, a: int) -> int:
        try:
            index = operator.index(a)
        except TypeError:
            index = -1
        if not 0 <= index < self.size:
            logger.error(f"Unknown morphism ID {a!r} in {self.name or 'category'}")
            raise UnknownMorphismError(f"unknown morphism ID {a!r}")
        return index

    def require_finite(self, operation: str):
        if self.is_bounded:
            message = (
                f"{operation} needs a finite category; "
                f"{self.name or 'input'} is truncated at depth {self.depth_bound}"
            )
            logger.error(message)
            raise UnboundedCategoryError(message)

    def compose(self, a: int, b: int) -> Optional[int]:
        return self.table.get((a, b))

    @cached_property
    def right_products(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """For every a, the pairs (b, ab) sorted by b."""
        products = defaultdict(list)
        for (a, b), ab in self.table.items():
            products[a].append((b, ab))
        return tuple(tuple(sorted(products[a])) for a in range(self.size))

    @cached_property
    def factorizations(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """For every c, the pairs (a, b) with ab = c."""
        found = defaultdict(list)
        for (a, b), ab in self.table.items():
            found[ab].append((a, b))
        return tuple(tuple(sorted(found[c])) for c in range(self.size))

    @cached_property
    def ideals(self) -> tuple[frozenset[int], ...]:
        return tuple(
            frozenset(ab for _, ab in self.right_products[a]) | {a}
            for a in range(self.size)
        )

    def ideal(self, a: int) -> frozenset[int]:
        return self.ideals[a]

    def leq(self, a: int, b: int) -> bool:
        """a ≤ b iff a ∈ bΛ."""
        return a in self.ideals[b]

    def equivalent(self, a: int, b: int) -> bool:
        return self.ideals[a] == self.ideals[b]

    def quotient(self, target: int, left: int) -> Optional[int]:
        """The unique b with ``left · b == target``, if any."""
        for b, ab in self.right_products[left]:
            if ab == target:
                return b
        return None

    def label(self, a: int) -> str:
        return self.names[a]

    @cached_property
    def singly_aligned(self) -> bool:
        return _every_witness_single(self)


def _check_structure(cat: Lcsc):
    n = cat.size
    problems = []
    if len(cat.src) != n or len(cat.rng) != n:
        problems.append("range/source maps do not cover every morphism")
    if any(not 0 <= x < n for x in cat.objects):
        problems.append("object set references unknown IDs")
    for a in range(min(n, len(cat.src), len(cat.rng))):
        if cat.src[a] not in cat.objects or cat.rng[a] not in cat.objects:
            problems.append(f"morphism {a} has range or source outside the objects")
            break
    for (a, b), ab in cat.table.items():
        if not (0 <= a < n and 0 <= b < n and 0 <= ab < n):
            problems.append(f"composition ({a}, {b}) -> {ab} references unknown ID")
            break
    if cat.degree is not None:
        widths = {len(d) for d in cat.degree}
        if len(cat.degree) != n or len(widths) != 1 or widths == {0}:
            problems.append("degree map must give one vector in N^k (k >= 1) per morphism")
        elif any(x < 0 for d in cat.degree for x in d):
            problems.append("degree vectors must be nonnegative")
    if problems:
        message = "; ".join(problems)
        logger.error(f"Malformed category table: {message}")
        raise StructuralError(message)


def _report(witnesses: Mapping[str, list]) -> ValidationReport:
    return ValidationReport(
        tuple(
            AxiomFailure(axiom, min(found))
            for axiom, found in sorted(witnesses.items())
            if found
        )
    )


def validate(cat: Lcsc, check_right_cancellation: bool = False) -> ValidationReport:
    """
    Check the small-category axioms and left cancellativity.

    Every violated axiom is reported once, with its lexicographically least
    witness tuple of morphism IDs.

    Parameters
    ----------
    cat : Lcsc
        Candidate table; need not satisfy any axiom.
    check_right_cancellation : bool, optional
        Also check that ``a -> ab`` is injective for each b.

    Returns
    -------
    ValidationReport

    Raises
    ------
    StructuralError
        If the table references unknown IDs.
    UnboundedCategoryError
        If the category is a depth-truncated presentation.
    """
    cat.require_finite("validate")
    _check_structure(cat)
    witnesses: dict[str, list] = defaultdict(list)

    for x in sorted(cat.objects):
        if cat.src[x] != x or cat.rng[x] != x:
            witnesses["identity"].append((x,))

    for a, b in itertools.product(range(cat.size), repeat=2):
        ab = cat.compose(a, b)
        composable = cat.src[a] == cat.rng[b]
        if ab is None:
            if composable:
                unit = a in cat.objects or b in cat.objects
                witnesses["unit law" if unit else "composability"].append((a, b))
            continue
        if not composable:
            witnesses["composability"].append((a, b))
        elif cat.rng[ab] != cat.rng[a] or cat.src[ab] != cat.src[b]:
            witnesses["range/source"].append((a, b))

    for a in range(cat.size):
        left = cat.compose(cat.rng[a], a)
        right = cat.compose(a, cat.src[a])
        if left is not None and left != a:
            witnesses["unit law"].append((cat.rng[a], a))
        if right is not None and right != a:
            witnesses["unit law"].append((a, cat.src[a]))

    for (a, b), ab in cat.table.items():
        for c, bc in cat.right_products[b]:
            lhs = cat.compose(ab, c)
            rhs = cat.compose(a, bc)
            if lhs != rhs:
                witnesses["associativity"].append((a, b, c))

    for a in range(cat.size):
        seen: dict[int, int] = {}
        for b, ab in cat.right_products[a]:
            if ab in seen:
                witnesses["left cancellation"].append((a, seen[ab], b))
            else:
                seen[ab] = b

    if check_right_cancellation:
        for b in range(cat.size):
            seen = {}
            for a in range(cat.size):
                ab = cat.compose(a, b)
                if ab is None:
                    continue
                if ab in seen:
                    witnesses["right cancellation"].append((seen[ab], a, b))
                else:
                    seen[ab] = a

    report = _report(witnesses)
    if report.passed:
        logger.debug(f"{cat.name or 'category'}: all category axioms hold")
    else:
        logger.debug(f"{cat.name or 'category'}: violated {sorted(report.axioms)}")
    return report


def right_ideal(cat: Lcsc, a: int) -> RightIdeal:
    a = cat.check_id(a)
    return RightIdeal(a, cat.ideal(a))


def ideal_meet(cat: Lcsc, a: int, b: int) -> frozenset[int]:
    """αΛ ∩ βΛ."""
    a = cat.check_id(a)
    b = cat.check_id(b)
    return cat.ideal(a) & cat.ideal(b)


def maximal_generators(cat: Lcsc, subset: Iterable[int]) -> list[int]:
    """
    The ≤-maximal members of ``subset``, one per ≈-class (lowest ID).
    """
    members = sorted(set(subset))
    maximal = [
        g
        for g in members
        if not any(cat.leq(g, h) and not cat.leq(h, g) for h in members)
    ]
    reps: list[int] = []
    for g in maximal:
        if not any(cat.equivalent(g, r) for r in reps):
            reps.append(g)
    return reps


def alignment_witness(cat: Lcsc, a: int, b: int) -> list[int]:
    """
    Minimal generators of αΛ ∩ βΛ.

    Returns
    -------
    list of int
        Pairwise ≈-inequivalent morphisms whose right ideals union to the
        meet; empty when the meet is empty.
    """
    cat.require_finite("alignment_witness")
    meet = ideal_meet(cat, a, b)
    witness = maximal_generators(cat, meet)
    union = frozenset().union(*(cat.ideal(g) for g in witness))
    if union != meet:
        logger.error(f"Generators {witness} do not exhaust the meet of {a} and {b}")
        raise ConsistencyError(f"alignment witness for ({a}, {b}) is incomplete")
    return witness


def is_singly_aligned(cat: Lcsc) -> bool:
    cat.require_finite("is_singly_aligned")
    return cat.singly_aligned


def _every_witness_single(cat: Lcsc) -> bool:
    return all(
        len(alignment_witness(cat, a, b)) <= 1
        for a, b in itertools.combinations_with_replacement(range(cat.size), 2)
    )


def invertibles(cat: Lcsc) -> dict[int, int]:
    """
    Invertible morphisms mapped to their inverses.

    Left cancellation makes β with αβ = r(α) unique, and it is then a
    two-sided inverse.
    """
    cat.require_finite("invertibles")
    inverses = {}
    for a in range(cat.size):
        b = cat.quotient(cat.rng[a], a)
        if b is not None:
            inverses[a] = b
    return inverses


def is_exhaustive(cat: Lcsc, family: Iterable[int], x: int) -> bool:
    """
    True iff every αΛ with α ∈ xΛ meets βΛ for some β in ``family``.

    Raises
    ------
    PreconditionError
        If ``x`` is not an object or ``family`` is not inside xΛ.
    """
    cat.require_finite("is_exhaustive")
    family = frozenset(family)
    if x not in cat.objects:
        logger.error(f"{x} is not an object of {cat.name or 'the category'}")
        raise PreconditionError(f"{x} is not an object")
    outside = family - cat.ideal(x)
    if outside:
        logger.error(f"Morphisms {sorted(outside)} are not in the right ideal of {x}")
        raise PreconditionError(f"{sorted(outside)} not contained in xΛ for x={x}")
    return all(
        any(cat.ideal(a) & cat.ideal(b) for b in family) for a in cat.ideal(x)
    )


def core(cat: Lcsc) -> frozenset[int]:
    """
    The core Λ_c.

    Computed from singleton exhaustiveness and from the direct meet condition
    over r(α)Λ; the two must agree.
    """
    cat.require_finite("core")
    by_exhaustion = frozenset(
        a for a in range(cat.size) if is_exhaustive(cat, {a}, cat.rng[a])
    )
    by_meets = frozenset(
        a
        for a in range(cat.size)
        if all(ideal_meet(cat, a, b) for b in sorted(cat.ideal(cat.rng[a])))
    )
    if by_exhaustion != by_meets:
        logger.error(
            f"Core characterizations disagree: {sorted(by_exhaustion ^ by_meets)}"
        )
        raise ConsistencyError("core characterizations disagree")
    return by_exhaustion


def _add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def validate_degree(cat: Lcsc) -> ValidationReport:
    """
    Check additivity of the degree map and unique factorization.

    Raises
    ------
    DegreeError
        If the category carries no degree map.
    """
    if cat.degree is None:
        logger.error(f"{cat.name or 'category'} has no degree map")
        raise DegreeError("degree map absent")
    cat.require_finite("validate_degree")
    _check_structure(cat)
    d = cat.degree
    witnesses: dict[str, list] = defaultdict(list)

    for (a, b), ab in cat.table.items():
        if d[ab] != _add(d[a], d[b]):
            witnesses["degree additivity"].append((a, b))

    for c in range(cat.size):
        for m in itertools.product(*(range(x + 1) for x in d[c])):
            n = tuple(x - y for x, y in zip(d[c], m))
            found = [
                (a, b)
                for a, b in cat.factorizations[c]
                if d[a] == m and d[b] == n
            ]
            if not found:
                witnesses["unique factorization"].append((c,))
            elif len(found) > 1:
                (a1, b1), (a2, b2) = found[:2]
                witnesses["unique factorization"].append((c, a1, b1, a2, b2))

    return _report(witnesses)
