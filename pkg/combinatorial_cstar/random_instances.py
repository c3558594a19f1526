"""
Fixed-seed generator of small input documents and inverse semigroups.

Instances are drawn from four families: acyclic graphs with at most four
edges, rectangular and double-square 2-graphs, groups of order at most four,
and finite groupoids with at most six arrows.
"""

from itertools import product
from typing import Optional

import numpy as np

from combinatorial_cstar.default_config_file import default_cstar_config
from combinatorial_cstar.input_handler import INPUT_FORMAT, InputSpec, parse_input
from combinatorial_cstar.inverse_hull import ZERO, PartialBij, compose, inverse_of
from combinatorial_cstar.logger import logger

__all__ = ["FAMILIES", "GROUPS", "RandomInstances", "group_document", "grid_document"]

FAMILIES = ("graph", "kgraph", "group", "groupoid")

# multiplication tables as index arithmetic
GROUPS = {
    "Z1": (1, lambda i, j: 0),
    "Z2": (2, lambda i, j: (i + j) % 2),
    "Z3": (3, lambda i, j: (i + j) % 3),
    "Z4": (4, lambda i, j: (i + j) % 4),
    "V4": (4, lambda i, j: i ^ j),
}


def group_document(name: str) -> dict:
    order, op = GROUPS[name]
    elements = ["1"] + [f"g{i}" for i in range(1, order)]
    return {
        "format": INPUT_FORMAT,
        "kind": "monoid",
        "name": name,
        "elements": elements,
        "identity": "1",
        "table": [[elements[op(i, j)] for j in range(order)] for i in range(order)],
    }


def grid_document(width: int, height: int) -> dict:
    """
    The 2-graph of a width × height grid of commuting squares.

    Horizontal edges have degree (1, 0), vertical edges (0, 1).
    """
    vertices = [f"p{i}{j}" for i in range(width + 1) for j in range(height + 1)]
    edges = []
    for i, j in product(range(width + 1), range(height + 1)):
        if i < width:
            edges.append({"name": f"h{i}{j}", "range": f"p{i}{j}", "source": f"p{i + 1}{j}", "degree": [1, 0]})
        if j < height:
            edges.append({"name": f"v{i}{j}", "range": f"p{i}{j}", "source": f"p{i}{j + 1}", "degree": [0, 1]})
    squares = [
        [f"h{i}{j}", f"v{i + 1}{j}", f"v{i}{j}", f"h{i}{j + 1}"]
        for i in range(width)
        for j in range(height)
    ]
    return {
        "format": INPUT_FORMAT,
        "kind": "kgraph",
        "name": f"grid_{width}x{height}",
        "k": 2,
        "vertices": vertices,
        "edges": edges,
        "squares": squares,
    }


def double_square_document() -> dict:
    """Two squares sharing their corners; not singly aligned."""
    edges = [("a", "A", "B", [1, 0]), ("b", "A", "C", [0, 1])]
    edges += [(f"c{i}", "B", "D", [0, 1]) for i in (1, 2)]
    edges += [(f"d{i}", "C", "D", [1, 0]) for i in (1, 2)]
    return {
        "format": INPUT_FORMAT,
        "kind": "kgraph",
        "name": "double_square",
        "k": 2,
        "vertices": ["A", "B", "C", "D"],
        "edges": [{"name": n, "range": r, "source": s, "degree": d} for n, r, s, d in edges],
        "squares": [["a", "c1", "b", "d1"], ["a", "c2", "b", "d2"]],
    }


class RandomInstances:
    """
    Draw small instances from a fixed seed.

    Parameters
    ----------
    seed : int, optional
        Seed of the generator; defaults to the configured ``SEED``.
    """

    def __init__(self, seed: Optional[int] = None):
        self.seed = default_cstar_config["SEED"] if seed is None else seed
        self.rng = np.random.default_rng(self.seed)

    def graph_document(self, index: int) -> dict:
        n_vertices = int(self.rng.integers(1, 5))
        n_edges = int(self.rng.integers(0, 5)) if n_vertices > 1 else 0
        vertices = [f"x{i}" for i in range(n_vertices)]
        edges = []
        for k in range(n_edges):
            # range before source keeps the graph acyclic
            r, s = sorted(self.rng.choice(n_vertices, size=2, replace=False))
            edges.append({"name": f"e{k}", "range": vertices[r], "source": vertices[s]})
        return {
            "format": INPUT_FORMAT,
            "kind": "graph",
            "name": f"graph_{index}",
            "vertices": vertices,
            "edges": edges,
        }

    def kgraph_document(self, index: int) -> dict:
        shapes = [(1, 1), (1, 2), (2, 1), None]
        shape = shapes[int(self.rng.integers(len(shapes)))]
        doc = double_square_document() if shape is None else grid_document(*shape)
        doc["name"] = f"{doc['name']}_{index}"
        return doc

    def group_doc(self, index: int) -> dict:
        names = sorted(GROUPS)
        doc = group_document(names[int(self.rng.integers(len(names)))])
        doc["name"] = f"{doc['name']}_{index}"
        return doc

    def groupoid_document(self, index: int) -> dict:
        """
        A disjoint union of connected groupoids (pair groupoid × cyclic group)
        with at most six arrows in total.
        """
        objects, morphisms, compose_rows = [], [], []
        budget = 6
        component = 0
        while budget > 0:
            choices = [(n, h) for n in (1, 2) for h in (1, 2, 3) if n * n * h <= budget]
            if not choices or (component and self.rng.random() < 0.4):
                break
            n, h = choices[int(self.rng.integers(len(choices)))]
            budget -= n * n * h
            label = {}
            for i, j, g in product(range(n), range(n), range(h)):
                name = f"c{component}o{i}" if i == j and g == 0 else f"c{component}_{i}{j}g{g}"
                label[(i, j, g)] = name
                if i == j and g == 0:
                    objects.append(name)
            for i, j, g in product(range(n), range(n), range(h)):
                if not (i == j and g == 0):
                    morphisms.append(
                        {"name": label[(i, j, g)], "range": label[(i, i, 0)], "source": label[(j, j, 0)]}
                    )
            for (i, j, g), (j2, k, g2) in product(label, repeat=2):
                if j == j2:
                    compose_rows.append([label[(i, j, g)], label[(j, k, g2)], label[(i, k, (g + g2) % h)]])
            component += 1
        return {
            "format": INPUT_FORMAT,
            "kind": "category",
            "name": f"groupoid_{index}",
            "objects": objects,
            "morphisms": morphisms,
            "compose": compose_rows,
        }

    def document(self, index: int) -> dict:
        family = FAMILIES[int(self.rng.integers(len(FAMILIES)))]
        build = {
            "graph": self.graph_document,
            "kgraph": self.kgraph_document,
            "group": self.group_doc,
            "groupoid": self.groupoid_document,
        }[family]
        return build(index)

    def instances(self, n: Optional[int] = None) -> list[InputSpec]:
        """``n`` parsed instances; the sequence depends only on the seed."""
        n = default_cstar_config["RANDOM_INSTANCES"] if n is None else n
        logger.info(f"Generating {n} random instances with seed {self.seed}...")
        return [parse_input(self.document(i), require_cstar=True) for i in range(n)]

    def partial_bijection(self, size: int) -> PartialBij:
        domain_size = int(self.rng.integers(0, size + 1))
        domain = self.rng.choice(size, size=domain_size, replace=False)
        image = self.rng.choice(size, size=domain_size, replace=False)
        return PartialBij(tuple(zip(map(int, domain), map(int, image))))

    def inverse_subsemigroup(self, cap: int = 60) -> list[PartialBij]:
        """
        The inverse subsemigroup of I(X), |X| <= 5, generated by a few random
        partial bijections; regenerated with fewer generators past ``cap``.
        """
        size = int(self.rng.integers(1, 6))
        n_generators = int(self.rng.integers(1, 4))
        while True:
            generators = [self.partial_bijection(size) for _ in range(n_generators)]
            generators += [inverse_of(g) for g in generators]
            elements = {ZERO, *generators}
            frontier = list(elements)
            while frontier and len(elements) <= cap:
                grown = []
                for s in frontier:
                    for g in generators:
                        p = compose(s, g)
                        if p not in elements:
                            elements.add(p)
                            grown.append(p)
                frontier = grown
            if len(elements) <= cap:
                return sorted(elements, key=lambda s: s.sort_key)
            if n_generators == 1:
                size -= 1
            n_generators = max(1, n_generators - 1)
            logger.debug(f"Inverse subsemigroup of I({size}) exceeded {cap} elements; retrying")
