"""
Partial bijections on a category's morphisms and the left inverse hull.

Hull elements are compared extensionally (equal graphs). ``InverseHull`` keeps
them in a fixed sorted order so that every later stage can work with integer
indices.
"""

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.exceptions import (
    ConsistencyError,
    IncompatibleJoinError,
    NotHullElementError,
    NotSinglyAlignedError,
    PreconditionError,
    ResourceCapError,
)
from combinatorial_cstar.lcsc_core import (
    Lcsc,
    alignment_witness,
    invertibles,
    is_singly_aligned,
    maximal_generators,
)
from combinatorial_cstar.logger import logger

__all__ = [
    "PartialBij",
    "ZERO",
    "compose",
    "inverse_of",
    "natural_leq",
    "is_compatible",
    "union_join",
    "basic_map",
    "zigzag",
    "Semilattice",
    "InverseHull",
    "generate_hull",
    "decompose",
    "canonical_pair",
    "singly_aligned_product",
]


@dataclass(frozen=True)
class PartialBij:
    """
    A finite injective partial map, stored as sorted ``(x, s(x))`` pairs.

    The empty map is the zero element.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted(set(self.pairs)))
        xs = [x for x, _ in pairs]
        ys = [y for _, y in pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            logger.error(f"Pairs {pairs} do not form an injective partial map")
            raise ValueError(f"not an injective partial map: {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_mapping(cls, mapping) -> "PartialBij":
        return cls(tuple(mapping.items()))

    @classmethod
    def identity(cls, subset: Iterable[int]) -> "PartialBij":
        return cls(tuple((x, x) for x in subset))

    @cached_property
    def mapping(self) -> dict[int, int]:
        return dict(self.pairs)

    @cached_property
    def domain(self) -> frozenset[int]:
        return frozenset(x for x, _ in self.pairs)

    @cached_property
    def image(self) -> frozenset[int]:
        return frozenset(y for _, y in self.pairs)

    @property
    def is_zero(self) -> bool:
        return not self.pairs

    @property
    def is_idempotent(self) -> bool:
        return all(x == y for x, y in self.pairs)

    @property
    def star(self) -> "PartialBij":
        return inverse_of(self)

    @property
    def sort_key(self):
        return (len(self.pairs), self.pairs)

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def __len__(self) -> int:
        return len(self.pairs)

    def __mul__(self, other: "PartialBij") -> "PartialBij":
        return compose(self, other)

    def restrict(self, subset: Iterable[int]) -> "PartialBij":
        keep = frozenset(subset)
        return PartialBij(tuple((x, y) for x, y in self.pairs if x in keep))

    def describe(self, cat: Optional[Lcsc] = None) -> str:
        if cat is None:
            body = ", ".join(f"{x}->{y}" for x, y in self.pairs)
        else:
            body = ", ".join(f"{cat.label(x)}->{cat.label(y)}" for x, y in self.pairs)
        return "{" + body + "}"


ZERO = PartialBij()


def compose(s: PartialBij, t: PartialBij) -> PartialBij:
    """s∘t on the largest domain where it makes sense."""
    smap = s.mapping
    return PartialBij(tuple((x, smap[y]) for x, y in t.pairs if y in smap))


def inverse_of(s: PartialBij) -> PartialBij:
    return PartialBij(tuple((y, x) for x, y in s.pairs))


def natural_leq(s: PartialBij, t: PartialBij) -> bool:
    """
    s ⩽ t in the natural order, i.e. ts*s = s; checked against restriction.
    """
    algebraic = compose(t, compose(inverse_of(s), s)) == s
    restriction = set(s.pairs) <= set(t.pairs)
    if algebraic != restriction:
        logger.error(f"Order checks disagree for {s.pairs} and {t.pairs}")
        raise ConsistencyError("natural order: algebraic and graph forms disagree")
    return algebraic


def is_compatible(s: PartialBij, t: PartialBij) -> bool:
    """True iff s*t and st* are idempotents; checked against pointwise agreement."""
    algebraic = (
        compose(inverse_of(s), t).is_idempotent
        and compose(s, inverse_of(t)).is_idempotent
    )
    smap, tmap = s.mapping, t.mapping
    sinv, tinv = inverse_of(s).mapping, inverse_of(t).mapping
    functional = all(smap[x] == tmap[x] for x in s.domain & t.domain) and all(
        sinv[y] == tinv[y] for y in s.image & t.image
    )
    if algebraic != functional:
        logger.error(f"Compatibility checks disagree for {s.pairs} and {t.pairs}")
        raise ConsistencyError("compatibility: algebraic and functional forms disagree")
    return algebraic


def union_join(parts: Sequence[PartialBij]) -> PartialBij:
    """
    The join of pairwise compatible maps, which is their graph union.

    Raises
    ------
    IncompatibleJoinError
        Naming the first incompatible pair of positions.
    """
    parts = list(parts)
    for i, j in combinations(range(len(parts)), 2):
        if not is_compatible(parts[i], parts[j]):
            logger.error(f"Cannot join incompatible maps at positions {i} and {j}")
            raise IncompatibleJoinError(
                f"parts {i} and {j} are not compatible", pair=(i, j)
            )
    return PartialBij(tuple({p for part in parts for p in part.pairs}))


def basic_map(cat: Lcsc, a: int) -> PartialBij:
    """Left multiplication by α, from s(α)Λ onto αΛ."""
    a = cat.check_id(a)
    return PartialBij(cat.right_products[a])


def zigzag(cat: Lcsc, a: int, b: int) -> PartialBij:
    """The map αβ*: βγ ↦ αγ."""
    return compose(basic_map(cat, a), inverse_of(basic_map(cat, b)))


@dataclass(frozen=True, eq=False)
class Semilattice:
    """
    A finite meet-semilattice of sets, closed under intersection.

    Index ``zero`` holds the empty set. The order is inclusion, so
    ``meet[i, j]`` is the index of the intersection.
    """

    idempotents: tuple[frozenset[int], ...]
    zero: int
    meet: np.ndarray = field(repr=False)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]]) -> "Semilattice":
        family = {frozenset(x) for x in sets} | {frozenset()}
        ordered = tuple(sorted(family, key=lambda x: (len(x), sorted(x))))
        position = {x: i for i, x in enumerate(ordered)}
        size = len(ordered)
        meet = np.zeros((size, size), dtype=np.int64)
        for i, x in enumerate(ordered):
            for j, y in enumerate(ordered):
                both = x & y
                if both not in position:
                    logger.error("Set family is not closed under intersection")
                    raise PreconditionError(
                        f"family not closed under intersection: {sorted(x)} and {sorted(y)}"
                    )
                meet[i, j] = position[both]
        return cls(ordered, position[frozenset()], meet)

    def __len__(self) -> int:
        return len(self.idempotents)

    @cached_property
    def position(self) -> dict[frozenset[int], int]:
        return {x: i for i, x in enumerate(self.idempotents)}

    def index_of(self, subset: Iterable[int]) -> int:
        key = frozenset(subset)
        if key not in self.position:
            logger.error(f"No idempotent with domain {sorted(key)}")
            raise PreconditionError(f"{sorted(key)} is not in the semilattice")
        return self.position[key]

    @property
    def nonzero(self) -> list[int]:
        return [i for i in range(len(self)) if i != self.zero]

    def leq(self, e: int, f: int) -> bool:
        return int(self.meet[e, f]) == e

    def above(self, e: int) -> frozenset[int]:
        return frozenset(f for f in range(len(self)) if self.leq(e, f))

    def below(self, e: int) -> frozenset[int]:
        return frozenset(f for f in range(len(self)) if self.leq(f, e))

    def minimal_nonzero(self) -> list[int]:
        return [
            e
            for e in self.nonzero
            if not any(f != e and self.leq(f, e) for f in self.nonzero)
        ]

    def is_boolean_ring(self) -> bool:
        """Closed under union and relative difference as well as intersection."""
        family = set(self.idempotents)
        return all(
            (x | y) in family and (x - y) in family
            for x in self.idempotents
            for y in self.idempotents
        )

    # Bitmask views used by the brute-force tightness oracles.
    @cached_property
    def below_mask(self) -> tuple[int, ...]:
        return tuple(sum(1 << f for f in self.below(e)) for e in range(len(self)))

    @cached_property
    def disjoint_mask(self) -> tuple[int, ...]:
        return tuple(
            sum(1 << f for f in range(len(self)) if self.meet[e, f] == self.zero)
            for e in range(len(self))
        )

    @cached_property
    def meets_mask(self) -> tuple[int, ...]:
        return tuple(
            sum(1 << f for f in range(len(self)) if self.meet[e, f] != self.zero)
            for e in range(len(self))
        )


@dataclass(eq=False)
class InverseHull:
    """
    The left inverse hull S_Λ of a finite category.

    Attributes
    ----------
    cat : Lcsc
        The category the maps act on.
    elements : tuple of PartialBij
        All hull elements, sorted by (size, graph); index 0 is the zero map.
    semilattice : Semilattice
        Domains of the idempotents, i.e. the constructible sets J(Λ).
    """

    cat: Lcsc
    elements: tuple[PartialBij, ...]
    semilattice: Semilattice
    _products: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, s: PartialBij) -> bool:
        return s in self.index

    @cached_property
    def index(self) -> dict[PartialBij, int]:
        return {s: i for i, s in enumerate(self.elements)}

    def index_of(self, s: PartialBij) -> int:
        try:
            return self.index[s]
        except KeyError:
            logger.error(f"{s.describe(self.cat)} is not an element of the hull")
            raise NotHullElementError(f"{s.pairs} is not a hull element") from None

    @property
    def zero(self) -> int:
        return self.index[ZERO]

    def mul(self, i: int, j: int) -> int:
        key = (i, j)
        if key not in self._products:
            self._products[key] = self.index_of(
                compose(self.elements[i], self.elements[j])
            )
        return self._products[key]

    @cached_property
    def stars(self) -> tuple[int, ...]:
        return tuple(self.index_of(inverse_of(s)) for s in self.elements)

    def star(self, i: int) -> int:
        return self.stars[i]

    @cached_property
    def domains(self) -> tuple[int, ...]:
        """Semilattice index of dom(s), i.e. of s*s."""
        return tuple(self.semilattice.index_of(s.domain) for s in self.elements)

    @cached_property
    def ranges(self) -> tuple[int, ...]:
        return tuple(self.semilattice.index_of(s.image) for s in self.elements)

    @cached_property
    def idempotent_elements(self) -> tuple[int, ...]:
        """Hull index of Id_X for every semilattice index X."""
        return tuple(
            self.index_of(PartialBij.identity(x)) for x in self.semilattice.idempotents
        )

    def idempotent(self, e: int) -> int:
        return self.idempotent_elements[e]

    def is_idempotent(self, i: int) -> bool:
        return self.elements[i].is_idempotent

    def basic(self, a: int) -> int:
        return self.index_of(basic_map(self.cat, a))

    def pair(self, a: int, b: int) -> int:
        """Hull index of αβ*."""
        return self.index_of(zigzag(self.cat, a, b))

    def conjugate(self, s: int, e: int) -> int:
        """Semilattice index of s e s* for a semilattice index e."""
        return self.domains[self.mul(self.mul(s, self.idempotent(e)), self.star(s))]


def generate_hull(cat: Lcsc, cap: Optional[int] = None) -> InverseHull:
    """
    Close {α, α* : α ∈ Λ} ∪ {0} under composition.

    Parameters
    ----------
    cat : Lcsc
        A finite, validated category.
    cap : int, optional
        Largest allowed hull size (default from the configuration).

    Returns
    -------
    InverseHull

    Raises
    ------
    ResourceCapError
        If the closure grows past ``cap`` elements.
    ConsistencyError
        If the idempotents do not form the semilattice of their domains.
    """
    cat.require_finite("generate_hull")
    cap = default_cstar_config["HULL_CAP"] if cap is None else cap
    generators = []
    for a in range(cat.size):
        s = basic_map(cat, a)
        generators.extend([s, inverse_of(s)])
    generators = sorted(set(generators), key=lambda s: s.sort_key)

    seen = {ZERO, *generators}
    queue = deque(generators)
    while queue:
        s = queue.popleft()
        for g in generators:
            p = compose(s, g)
            if p not in seen:
                seen.add(p)
                if len(seen) > cap:
                    message = f"hull of {cat.name or 'category'} exceeds {cap} elements"
                    logger.error(message)
                    raise ResourceCapError(message)
                queue.append(p)

    elements = tuple(sorted(seen, key=lambda s: s.sort_key))
    idempotents = [s for s in elements if s.is_idempotent]
    semilattice = Semilattice.from_sets(s.domain for s in idempotents)
    if len(semilattice) != len(idempotents):
        logger.error(f"{len(idempotents)} idempotents but {len(semilattice)} constructible sets")
        raise ConsistencyError("idempotents and constructible sets differ in number")
    for e in idempotents:
        for f in idempotents:
            if compose(e, f) != PartialBij.identity(e.domain & f.domain):
                logger.error("Idempotent product is not the intersection map")
                raise ConsistencyError("E(S) is not isomorphic to J(Λ)")

    hull = InverseHull(cat, elements, semilattice)
    logger.debug(
        f"{cat.name or 'category'}: hull has {len(hull)} elements, "
        f"{len(semilattice)} idempotents"
    )
    return hull


def decompose(s: PartialBij, hull: InverseHull) -> list[tuple[int, int]]:
    """
    Write a nonzero hull element as a union of maps αβ*.

    The β are the maximal generators of dom(s) and α = s(β).

    Returns
    -------
    list of (int, int)
        Pairs (α, β), ordered by β.

    Raises
    ------
    PreconditionError
        If ``s`` is zero.
    NotHullElementError
        If ``s`` is not locally of the form αβ*, or is such a union but
        not in the hull.
    """
    if s.is_zero:
        logger.error("Cannot decompose the zero map")
        raise PreconditionError("decompose needs a nonzero element")
    cat = hull.cat
    pairs = []
    # basic on every maximal generator also makes dom(s) a union of ideals
    for b in maximal_generators(cat, s.domain):
        a = s(b)
        if cat.src[a] != cat.src[b]:
            logger.error(f"Map {s.pairs} sends {b} to a morphism with another source")
            raise NotHullElementError(f"{s.pairs} does not preserve sources at {b}")
        for c, bc in cat.right_products[b]:
            if s.mapping.get(bc) != cat.compose(a, c):
                logger.error(f"Map {s.pairs} is not left multiplication on the ideal of {b}")
                raise NotHullElementError(f"{s.pairs} is not basic on {b}Λ")
        pairs.append((a, b))
    hull.index_of(s)
    if union_join([zigzag(cat, a, b) for a, b in pairs]) != s:
        logger.error(f"Basic pieces of {s.pairs} do not join back to it")
        raise ConsistencyError(f"decomposition of {s.pairs} does not reconstruct it")
    return pairs


def canonical_pair(cat: Lcsc, a: int, b: int) -> tuple[int, int]:
    """The least (αu, βu) over invertibles u; all of them give the same αβ*."""
    units = invertibles(cat)
    return min(
        (cat.compose(a, u), cat.compose(b, u))
        for u in units
        if cat.rng[u] == cat.src[a]
    )


def singly_aligned_product(
    p1: tuple[int, int], p2: tuple[int, int], cat: Lcsc
) -> Optional[tuple[int, int]]:
    """
    Product (αβ*)(γτ*) in a singly aligned category, in closed form.

    With βΛ ∩ γΛ = ρΛ and ρ = ββ₁ = γγ₁, the product is (αβ₁)(τγ₁)*.

    Returns
    -------
    (int, int) or None
        The canonical pair of the product, or None for the zero map.

    Raises
    ------
    NotSinglyAlignedError
        If some meet of right ideals needs more than one generator.
    """
    if not is_singly_aligned(cat):
        logger.error(f"{cat.name or 'category'} is not singly aligned")
        raise NotSinglyAlignedError("singly_aligned_product needs single alignment")
    (a, b), (c, t) = p1, p2
    if cat.src[a] != cat.src[b] or cat.src[c] != cat.src[t]:
        logger.error(f"Pairs {p1} and {p2} do not share sources")
        raise PreconditionError(f"pairs {p1} and {p2} must share sources")

    witness = alignment_witness(cat, b, c)
    if not witness:
        result = None
    else:
        rho = witness[0]
        b1 = cat.quotient(rho, b)
        c1 = cat.quotient(rho, c)
        result = canonical_pair(cat, cat.compose(a, b1), cat.compose(t, c1))

    expected = compose(zigzag(cat, a, b), zigzag(cat, c, t))
    got = ZERO if result is None else zigzag(cat, *result)
    if got != expected:
        logger.error(f"Closed-form product of {p1} and {p2} disagrees with composition")
        raise ConsistencyError(f"closed-form product of {p1}, {p2} is wrong")
    return result
