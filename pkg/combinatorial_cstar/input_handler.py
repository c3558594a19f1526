"""
Reading and writing input documents.

An input document is a JSON object with ``"format": "cstar-input/1"`` and a
``kind`` of ``category``, ``graph``, ``kgraph`` or ``monoid``. Graphs and
k-graphs are expanded to their path categories; monoids become one-object
categories.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import networkx as nx

from combinatorial_cstar.exceptions import InputError, InputSyntaxError
from combinatorial_cstar.lcsc_core import Lcsc
from combinatorial_cstar.logger import logger

__all__ = ["INPUT_FORMAT", "KINDS", "InputSpec", "parse_input", "serialize"]

INPUT_FORMAT = "cstar-input/1"
KINDS = ("category", "graph", "kgraph", "monoid")
PATH_SEPARATOR = "."


@dataclass
class InputSpec:
    """
    A parsed input document.

    Attributes
    ----------
    kind : str
        One of ``KINDS``.
    name : str
        Label used in logs and reports.
    body : dict
        The kind-specific tables, exactly as written in the document.
    options : dict
        Per-document options (``depth``, ``tolerance``, ``cap``).
    category : Lcsc
        The expanded category; not part of equality.
    edges : tuple of int, optional
        Morphism IDs of the edges, for graph inputs.
    """

    kind: str
    name: str
    body: dict
    options: dict = field(default_factory=dict)
    category: Optional[Lcsc] = field(default=None, compare=False, repr=False)
    edges: Optional[tuple[int, ...]] = field(default=None, compare=False, repr=False)

    @property
    def cyclic(self) -> bool:
        return self.category is not None and self.category.is_bounded


def _require(doc: dict, key: str, kind: str):
    if key not in doc:
        logger.error(f"{kind} document is missing the '{key}' field")
        raise InputError(f"missing field '{key}' for kind {kind}")
    return doc[key]


def _lookup(index: dict, label, what: str) -> int:
    try:
        return index[label]
    except (KeyError, TypeError):
        logger.error(f"Unknown {what} {label!r}")
        raise InputError(f"unknown {what} {label!r}") from None


def _category_from_tables(doc: dict, name: str) -> Lcsc:
    objects = _require(doc, "objects", "category")
    morphisms = _require(doc, "morphisms", "category")
    labels = list(objects) + [m["name"] for m in morphisms if m["name"] not in objects]
    if len(set(labels)) != len(labels):
        logger.error(f"Duplicate morphism names in {name}")
        raise InputError("morphism names must be unique")
    index = {label: i for i, label in enumerate(labels)}
    src = [index[x] for x in objects] + [0] * (len(labels) - len(objects))
    rng = list(src)
    for m in morphisms:
        i = index[m["name"]]
        src[i] = _lookup(index, m["source"], "object")
        rng[i] = _lookup(index, m["range"], "object")
    table = {}
    for entry in doc.get("compose", []):
        if len(entry) != 3:
            logger.error(f"Composition entry {entry} does not have three parts")
            raise InputError(f"composition entry {entry} must be [a, b, ab]")
        a, b, ab = (_lookup(index, x, "morphism") for x in entry)
        table[(a, b)] = ab
    degree = None
    if "degree" in doc:
        degree = tuple(
            tuple(doc["degree"][label]) if label in doc["degree"] else ()
            for label in labels
        )
    return Lcsc(
        names=tuple(labels),
        objects=frozenset(index[x] for x in objects),
        src=tuple(src),
        rng=tuple(rng),
        table=table,
        degree=degree,
        name=name,
    )


def _category_from_monoid(doc: dict, name: str) -> Lcsc:
    elements = list(_require(doc, "elements", "monoid"))
    identity = _require(doc, "identity", "monoid")
    rows = _require(doc, "table", "monoid")
    index = {label: i for i, label in enumerate(elements)}
    unit = _lookup(index, identity, "element")
    if len(rows) != len(elements) or any(len(row) != len(elements) for row in rows):
        logger.error(f"Monoid table of {name} is not {len(elements)} by {len(elements)}")
        raise InputError("monoid table must be square over the elements")
    table = {
        (i, j): _lookup(index, rows[i][j], "element")
        for i in range(len(elements))
        for j in range(len(elements))
    }
    n = len(elements)
    return Lcsc(
        names=tuple(elements),
        objects=frozenset({unit}),
        src=(unit,) * n,
        rng=(unit,) * n,
        table=table,
        name=name,
    )


def _edge_graph(doc: dict, kind: str) -> tuple[list, list, nx.MultiDiGraph]:
    vertices = list(_require(doc, "vertices", kind))
    edges = list(_require(doc, "edges", kind))
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(vertices)
    names = set(vertices)
    for e in edges:
        if e["name"] in names:
            logger.error(f"Edge name {e['name']!r} is used twice")
            raise InputError(f"duplicate name {e['name']!r}")
        names.add(e["name"])
        for end in ("range", "source"):
            if e[end] not in graph:
                logger.error(f"Edge {e['name']} has unknown {end} {e[end]!r}")
                raise InputError(f"unknown vertex {e[end]!r}")
        # paths are walked from range to source
        graph.add_edge(e["range"], e["source"], key=e["name"])
    return vertices, edges, graph


def _walk_paths(edges: list, graph: nx.MultiDiGraph, depth: Optional[int]) -> list[tuple[int, ...]]:
    position = {e["name"]: i for i, e in enumerate(edges)}
    paths = [(i,) for i in range(len(edges))]
    frontier = list(paths)
    length = 1
    while frontier and (depth is None or length < depth):
        grown = []
        for path in frontier:
            last = edges[path[-1]]
            following = sorted(position[key] for _, _, key in graph.out_edges(last["source"], keys=True))
            grown.extend(path + (i,) for i in following)
        paths.extend(grown)
        frontier = grown
        length += 1
    return sorted(paths, key=lambda p: (len(p), p))


def _square_moves(doc: dict, edges: list) -> dict[tuple[int, int], list[tuple[int, int]]]:
    position = {e["name"]: i for i, e in enumerate(edges)}
    moves: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for square in doc.get("squares", []):
        if len(square) != 4:
            logger.error(f"Square {square} does not list four edges")
            raise InputError(f"square {square} must list four edges x, y, z, w with xy = zw")
        x, y, z, w = (_lookup(position, label, "edge") for label in square)
        for p, q in ((x, y), (z, w)):
            if edges[p]["source"] != edges[q]["range"]:
                logger.error(f"Square {square}: {edges[p]['name']} and {edges[q]['name']} do not compose")
                raise InputError(f"square {square} has a non-composable side")
        if (edges[x]["range"], edges[y]["source"]) != (edges[z]["range"], edges[w]["source"]):
            logger.error(f"Square {square} has sides with different ends")
            raise InputError(f"square {square} does not close up")
        moves.setdefault((x, y), []).append((z, w))
        moves.setdefault((z, w), []).append((x, y))
    return moves


def _path_classes(paths: list, moves: dict) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Map every path to the least path equivalent to it under the squares."""
    known = set(paths)
    uf = nx.utils.UnionFind(paths)
    for path in paths:
        for i in range(len(path) - 1):
            for replacement in moves.get(path[i : i + 2], ()):
                other = path[:i] + replacement + path[i + 2 :]
                if other in known:
                    uf.union(path, other)
    representative = {}
    for cls in uf.to_sets():
        least = min(cls, key=lambda p: (len(p), p))
        for path in cls:
            representative[path] = least
    return representative


def _category_from_paths(
    doc: dict, kind: str, name: str, depth: Optional[int], require_cstar: bool
) -> tuple[Lcsc, tuple[int, ...]]:
    vertices, edges, graph = _edge_graph(doc, kind)
    if not nx.is_directed_acyclic_graph(graph):
        if require_cstar:
            logger.error(f"{name or kind} has cycles; C*-level commands need a finite category")
            raise InputError("cyclic graph cannot be used for C*-level commands")
        if depth is None:
            logger.error(f"{name or kind} has cycles and no depth bound")
            raise InputError("cyclic input needs a depth bound (--depth)")
    else:
        depth = None

    if kind == "kgraph":
        k = int(_require(doc, "k", kind))
        edge_degree = [tuple(_require(e, "degree", "kgraph edge")) for e in edges]
        if any(len(d) != k for d in edge_degree):
            logger.error(f"Edge degrees of length other than {k}")
            raise InputError(f"every edge degree must have {k} entries")
        moves = _square_moves(doc, edges)
    else:
        k = 1
        edge_degree = [(1,) for _ in edges]
        moves = {}

    paths = _walk_paths(edges, graph, depth)
    representative = _path_classes(paths, moves)
    classes = sorted(set(representative.values()), key=lambda p: (len(p), p))

    labels = list(vertices) + [
        PATH_SEPARATOR.join(edges[i]["name"] for i in path) for path in classes
    ]
    vertex_id = {v: i for i, v in enumerate(vertices)}
    path_id = {path: len(vertices) + i for i, path in enumerate(classes)}
    n = len(labels)
    src = list(range(len(vertices))) + [vertex_id[edges[p[-1]]["source"]] for p in classes]
    rng = list(range(len(vertices))) + [vertex_id[edges[p[0]]["range"]] for p in classes]
    zero = (0,) * k
    degree = [zero] * len(vertices) + [
        tuple(map(sum, zip(*(edge_degree[i] for i in p)))) for p in classes
    ]

    table = {}
    for x in range(len(vertices)):
        table[(x, x)] = x
    for path, a in path_id.items():
        table[(rng[a], a)] = a
        table[(a, src[a])] = a
        for other, b in path_id.items():
            if src[a] != rng[b]:
                continue
            joined = path + other
            if depth is not None and len(joined) > depth:
                continue
            table[(a, b)] = path_id[representative[joined]]

    cat = Lcsc(
        names=tuple(labels),
        objects=frozenset(range(len(vertices))),
        src=tuple(src),
        rng=tuple(rng),
        table=table,
        degree=tuple(degree),
        depth_bound=depth,
        name=name,
    )
    edge_ids = tuple(path_id[representative[(i,)]] for i in range(len(edges)))
    logger.debug(f"{name or kind}: {len(vertices)} vertices, {n - len(vertices)} paths")
    return cat, edge_ids


def _load(source: Union[str, Path, dict]) -> dict:
    if isinstance(source, dict):
        return source
    text = str(source)
    if isinstance(source, Path) or not text.lstrip().startswith("{"):
        path = Path(text)
        if not path.exists():
            logger.error(f"Input file {path} not found")
            raise InputError(f"input file {path} not found")
        logger.info(f"Reading input {path}...")
        text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        logger.error(f"Malformed input document: {err.msg} at line {err.lineno}")
        raise InputSyntaxError(err.msg, err.lineno, err.colno) from err
    if not isinstance(doc, dict):
        logger.error(f"Input document is a {type(doc).__name__}, not an object")
        raise InputError("input document must be a JSON object")
    return doc


def parse_input(
    source: Union[str, Path, dict],
    require_cstar: bool = False,
    depth: Optional[int] = None,
) -> InputSpec:
    """
    Parse an input document into an ``InputSpec``.

    Parameters
    ----------
    source : str, Path or dict
        A file path, JSON text, or an already loaded document.
    require_cstar : bool, optional
        Refuse inputs that cannot be used at the C*-level (cyclic graphs).
    depth : int, optional
        Path-length bound for cyclic graphs; overrides ``options.depth``.

    Returns
    -------
    InputSpec

    Raises
    ------
    InputSyntaxError
        If the text is not valid JSON; carries line and column.
    InputError
        For a wrong ``format`` tag, unknown kind or names, missing fields,
        cyclic graphs at C*-level or cyclic graphs without a depth bound.
    """
    doc = _load(source)
    if doc.get("format") != INPUT_FORMAT:
        logger.error(f"Unsupported input format {doc.get('format')!r}")
        raise InputError(f"input format must be {INPUT_FORMAT!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        logger.error(f"Unknown input kind {kind!r}")
        raise InputError(f"kind must be one of {', '.join(KINDS)}")
    name = str(doc.get("name", ""))
    options = dict(doc.get("options", {}))
    if depth is not None:
        options["depth"] = depth
    body = {
        key: value
        for key, value in doc.items()
        if key not in ("format", "kind", "name", "options")
    }

    edges = None
    try:
        if kind == "category":
            category = _category_from_tables(body, name)
        elif kind == "monoid":
            category = _category_from_monoid(body, name)
        else:
            category, ids = _category_from_paths(
                body, kind, name, options.get("depth"), require_cstar
            )
            if kind == "graph":
                edges = ids
    except (KeyError, TypeError) as err:
        logger.error(f"Malformed {kind} document: {err!r}")
        raise InputError(f"malformed {kind} document: {err!r}") from err

    logger.info(f"Parsed {kind} input {name!r} with {category.size} morphisms")
    return InputSpec(kind, name, body, options, category, edges)


def serialize(spec: InputSpec) -> str:
    """The document text of a spec; ``parse_input(serialize(s)) == s``."""
    doc = {"format": INPUT_FORMAT, "kind": spec.kind, "name": spec.name}
    doc.update(spec.body)
    if spec.options:
        doc["options"] = spec.options
    return json.dumps(doc, indent=2)
