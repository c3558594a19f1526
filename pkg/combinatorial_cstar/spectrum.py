"""
Filters on a finite idempotent semilattice and the action of the hull on them.

A finite semilattice only has principal filters, so a filter is kept as its
minimum together with the up-set of that minimum.
"""

from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from typing import Iterable, Optional, Sequence

from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.exceptions import (
    ConsistencyError,
    DomainError,
    PreconditionError,
)
from combinatorial_cstar.inverse_hull import InverseHull, Semilattice
from combinatorial_cstar.logger import logger

__all__ = [
    "Filter",
    "principal_filter",
    "filter_from_set",
    "enumerate_filters",
    "ultrafilters",
    "is_ultrafilter",
    "is_cover",
    "is_tight",
    "is_tight_cover",
    "is_tight_reduced",
    "tight_filters",
    "union_relations",
    "is_prime",
    "act",
    "fixes_domain",
    "filters_containing",
]


@dataclass(frozen=True)
class Filter:
    minimum: int
    elements: frozenset[int]

    def __contains__(self, e: int) -> bool:
        return e in self.elements

    def __len__(self) -> int:
        return len(self.elements)


def principal_filter(E: Semilattice, e: int) -> Filter:
    if e == E.zero:
        logger.error("The zero idempotent does not generate a proper filter")
        raise PreconditionError("a filter needs a nonzero minimum")
    return Filter(e, E.above(e))


def filter_from_set(E: Semilattice, subset: Iterable[int]) -> Filter:
    """
    Build a filter from its element set, checking the filter axioms.

    Raises
    ------
    PreconditionError
        If the set is empty, contains zero, or is not up- and meet-closed.
    ConsistencyError
        If the set has no least element (impossible for a finite filter).
    """
    members = frozenset(subset)
    if not members or E.zero in members:
        logger.error(f"{sorted(members)} is empty or contains the zero idempotent")
        raise PreconditionError("a filter is nonempty and does not contain zero")
    if any(not E.above(e) <= members for e in members):
        logger.error(f"{sorted(members)} is not upward closed")
        raise PreconditionError(f"{sorted(members)} is not upward closed")
    if any(int(E.meet[e, f]) not in members for e in members for f in members):
        logger.error(f"{sorted(members)} is not closed under meets")
        raise PreconditionError(f"{sorted(members)} is not closed under meets")
    minimum = reduce(lambda e, f: int(E.meet[e, f]), sorted(members))
    if E.above(minimum) != members:
        logger.error(f"Filter {sorted(members)} has no least element")
        raise ConsistencyError(f"filter {sorted(members)} is not principal")
    return Filter(minimum, members)


def enumerate_filters(E: Semilattice) -> list[Filter]:
    """One filter per nonzero idempotent, ordered by minimum."""
    return [principal_filter(E, e) for e in E.nonzero]


def ultrafilters(E: Semilattice) -> list[Filter]:
    return [principal_filter(E, e) for e in E.minimal_nonzero()]


def is_ultrafilter(E: Semilattice, xi: Filter) -> bool:
    return xi.minimum in E.minimal_nonzero()


def is_cover(E: Semilattice, C: Iterable[int], D: Iterable[int]) -> bool:
    """
    True iff every nonzero d in D meets some c in C.

    Raises
    ------
    PreconditionError
        If C is not a subset of D.
    """
    C, D = frozenset(C), frozenset(D)
    if not C <= D:
        logger.error(f"Cover candidate {sorted(C)} is not inside {sorted(D)}")
        raise PreconditionError("a cover must be a subset of the covered set")
    return all(
        any(E.meet[c, d] != E.zero for c in C) for d in D if d != E.zero
    )


def _subset_ands(items: Sequence[int], masks: Sequence[int], full: int) -> list[int]:
    """AND of masks[item] over every subset of items, indexed by subset bitmask."""
    table = [full] * (1 << len(items))
    for subset in range(1, len(table)):
        low = subset & -subset
        table[subset] = table[subset ^ low] & masks[items[low.bit_length() - 1]]
    return table


def _covered_avoiding(E: Semilattice, region: int, xi_mask: int) -> bool:
    """Whether region \\ ξ covers the region E^{X,Y}."""
    avoiding = region & ~xi_mask
    f = region
    while f:
        low = f & -f
        if not E.meets_mask[low.bit_length() - 1] & avoiding:
            return False
        f ^= low
    return True


def _cover_violation(E: Semilattice, xi: Filter, xs: Sequence[int]) -> bool:
    # Some cover Z of E^{X,Y} avoids ξ exactly when E^{X,Y} \ ξ is itself a cover.
    full = (1 << len(E)) - 1
    nonzero = full & ~(1 << E.zero)
    xi_mask = sum(1 << e for e in xi.elements)
    outside = [f for f in range(len(E)) if f not in xi.elements]
    x_table = _subset_ands(xs, E.below_mask, full)
    y_table = _subset_ands(outside, E.disjoint_mask, full)
    return any(
        _covered_avoiding(E, x_region & y_region & nonzero, xi_mask)
        for x_region in x_table
        for y_region in y_table
    )


def is_tight_cover(E: Semilattice, xi: Filter) -> bool:
    """Tightness by enumerating every X ⊆ ξ and Y ⊆ E \\ ξ."""
    return not _cover_violation(E, xi, sorted(xi.elements))


def is_tight_reduced(E: Semilattice, xi: Filter) -> bool:
    """Tightness with X fixed to {min ξ}; Y still ranges over E \\ ξ."""
    full = (1 << len(E)) - 1
    nonzero = full & ~(1 << E.zero)
    xi_mask = sum(1 << e for e in xi.elements)
    outside = [f for f in range(len(E)) if f not in xi.elements]
    x_region = E.below_mask[xi.minimum]
    return not any(
        _covered_avoiding(E, x_region & y_region & nonzero, xi_mask)
        for y_region in _subset_ands(outside, E.disjoint_mask, full)
    )


def is_tight(
    E: Semilattice,
    xi: Filter,
    cross_check: bool = True,
    limit: Optional[int] = None,
) -> bool:
    """
    Tightness of a filter on a finite semilattice.

    The answer is the ultrafilter test. When ``cross_check`` is set and
    ``|E| <= limit``, the cover criterion is also evaluated in full and in
    reduced form, and all three must agree.

    Raises
    ------
    ConsistencyError
        If the oracles disagree.
    """
    limit = default_cstar_config["BRUTE_FORCE_LIMIT"] if limit is None else limit
    tight = is_ultrafilter(E, xi)
    if cross_check and len(E) <= limit:
        cover = is_tight_cover(E, xi)
        reduced = is_tight_reduced(E, xi)
        if not tight == cover == reduced:
            logger.error(
                f"Tightness oracles disagree on filter above {xi.minimum}: "
                f"ultrafilter={tight}, cover={cover}, reduced={reduced}"
            )
            raise ConsistencyError("tightness oracles disagree")
    return tight


def tight_filters(E: Semilattice, cross_check: bool = True) -> list[Filter]:
    found = [xi for xi in enumerate_filters(E) if is_tight(E, xi, cross_check)]
    logger.debug(f"{len(found)} tight filters among {len(E) - 1} filters")
    return found


def union_relations(E: Semilattice, limit: Optional[int] = None) -> list[tuple[frozenset[int], int]]:
    """
    Every relation ⋃F = c with F a nonempty set of nonzero idempotents.

    Only available for small semilattices; the count is exponential.
    """
    limit = default_cstar_config["BRUTE_FORCE_LIMIT"] if limit is None else limit
    if len(E) > limit:
        logger.error(f"Semilattice of size {len(E)} is over the enumeration limit {limit}")
        raise PreconditionError(f"union relations are enumerated only for |E| <= {limit}")
    relations = []
    nonzero = E.nonzero
    for size in range(1, len(nonzero) + 1):
        for family in combinations(nonzero, size):
            union = frozenset().union(*(E.idempotents[f] for f in family))
            if union in E.position:
                relations.append((frozenset(family), E.position[union]))
    return relations


def is_prime(
    E: Semilattice,
    xi: Filter,
    joins: Optional[Sequence[tuple[frozenset[int], int]]] = None,
) -> bool:
    """
    Primeness with respect to unions that land in the semilattice.

    With explicit ``joins`` the definition is applied literally. Otherwise a
    relation avoiding ξ exists iff, for some c ∈ ξ, the idempotents below c
    and outside ξ already union to c.
    """
    if joins is not None:
        return all(c not in xi or bool(F & xi.elements) for F, c in joins)
    for c in xi.elements:
        avoiding = [
            E.idempotents[f] for f in E.below(c) if f != E.zero and f not in xi
        ]
        if frozenset().union(*avoiding) == E.idempotents[c]:
            return False
    return True


def act(s: int, xi: Filter, hull: InverseHull) -> Filter:
    """
    θ_s(ξ), the up-closure of {s e s* : e ∈ ξ}.

    Raises
    ------
    DomainError
        If s*s is not in ξ.
    """
    E = hull.semilattice
    if hull.domains[s] not in xi:
        logger.error(f"Element {s} does not act on the filter above {xi.minimum}")
        raise DomainError(f"s*s not in the filter for s={s}")
    images = {hull.conjugate(s, e) for e in xi.elements}
    image = filter_from_set(E, frozenset().union(*(E.above(f) for f in images)))
    if image.minimum != hull.conjugate(s, xi.minimum):
        logger.error(f"Image of the filter above {xi.minimum} under {s} has the wrong minimum")
        raise ConsistencyError("image filter minimum is not s·min·s*")
    return image


def filters_containing(e: int, filters: Sequence[Filter]) -> list[int]:
    """Positions of the filters in ``filters`` that contain e (the set D_e)."""
    return [i for i, xi in enumerate(filters) if e in xi]


def fixes_domain(s: int, hull: InverseHull, filters: Sequence[Filter]) -> bool:
    """True iff θ_s fixes every given (tight) filter that contains s*s."""
    return all(
        act(s, filters[i], hull) == filters[i]
        for i in filters_containing(hull.domains[s], filters)
    )
