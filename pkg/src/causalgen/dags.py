"""Labeled DAGs, structural relation queries, and exhaustive enumeration
of the non-isomorphic DAGs on a given number of nodes.
"""

from __future__ import annotations

import enum
import functools
import itertools
import string
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

DEFAULT_NAMES = tuple(string.ascii_uppercase)


def default_names(n: int) -> tuple[str, ...]:
    if n <= 26:
        return DEFAULT_NAMES[:n]
    return tuple(f"X{i}" for i in range(n))


class RelationKind(enum.Enum):
    """The six pairwise causal relations used for hypothesis generation.

    Ancestor and descendant are strict: they require an intermediate node,
    so a plain parent (or child) does not qualify.
    """

    IS_PARENT = "Is-Parent"
    IS_ANCESTOR = "Is-Ancestor"
    IS_CHILD = "Is-Child"
    IS_DESCENDANT = "Is-Descendant"
    HAS_COLLIDER = "Has-Collider"
    HAS_CONFOUNDER = "Has-Confounder"


@dataclass(frozen=True)
class Dag:
    """Immutable labeled DAG over nodes 0..n-1.

    Edges are stored as a sorted tuple of (parent, child) pairs.  Graphs
    produced by :func:`enumerate_dags` additionally satisfy parent < child
    for every edge (nodes in topological order).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one node")
        edges = tuple(sorted((int(i), int(j)) for i, j in self.edges))
        object.__setattr__(self, "edges", edges)
        seen = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        names = self.names or default_names(self.n)
        if len(names) != self.n or len(set(names)) != self.n:
            raise ValueError("need one distinct name per node")
        object.__setattr__(self, "names", tuple(names))
        if _descendant_masks(self.n, edges) is None:
            raise ValueError("graph contains a cycle")

    # -- structure accessors -------------------------------------------------

    def parent_mask(self, j: int) -> int:
        return _parent_masks(self.n, self.edges)[j]

    def child_mask(self, i: int) -> int:
        return _child_masks(self.n, self.edges)[i]

    def parents(self, j: int) -> tuple[int, ...]:
        return _mask_nodes(self.parent_mask(j))

    def children(self, i: int) -> tuple[int, ...]:
        return _mask_nodes(self.child_mask(i))

    def descendant_mask(self, i: int) -> int:
        """Bitmask of strict descendants of i."""
        masks = _descendant_masks(self.n, self.edges)
        assert masks is not None
        return masks[i]

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.child_mask(i) >> j & 1)

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        for i, j in self.edges:
            adj[i, j] = 1
        return adj

    def relabel(self, perm: tuple[int, ...]) -> "Dag":
        """New DAG where old node v becomes node perm[v]; names follow
        positions, so the result keeps names[0] at node 0."""
        return Dag(self.n, tuple((perm[i], perm[j]) for i, j in self.edges), self.names)

    def named_edges(self) -> list[tuple[str, str]]:
        return [(self.names[i], self.names[j]) for i, j in self.edges]


def _mask_nodes(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


@functools.lru_cache(maxsize=200000)
def _parent_masks(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[int, ...]:
    masks = [0] * n
    for i, j in edges:
        masks[j] |= 1 << i
    return tuple(masks)


@functools.lru_cache(maxsize=200000)
def _child_masks(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[int, ...]:
    masks = [0] * n
    for i, j in edges:
        masks[i] |= 1 << j
    return tuple(masks)


@functools.lru_cache(maxsize=200000)
def _descendant_masks(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[int, ...] | None:
    """Strict-descendant bitmasks, or None if the graph has a cycle."""
    children = _child_masks(n, edges)
    masks = list(children)
    for _ in range(n):
        changed = False
        for v in range(n):
            acc = masks[v]
            m = masks[v]
            w = 0
            while m:
                if m & 1:
                    acc |= masks[w]
                m >>= 1
                w += 1
            if acc != masks[v]:
                masks[v] = acc
                changed = True
        if not changed:
            break
    for v in range(n):
        if masks[v] >> v & 1:
            return None
    return tuple(masks)


def relation_holds(dag: Dag, rel: RelationKind, i: int, j: int) -> bool:
    """Whether the structural relation holds between nodes i and j.

    IS_ANCESTOR(i, j) requires a directed path of length >= 2 from i to j
    and that i is not a parent of j; IS_DESCENDANT mirrors it.  HAS_COLLIDER
    and HAS_CONFOUNDER ask for a common child / common parent.
    """
    if i == j:
        raise ValueError("relation requires two distinct nodes")
    if not (0 <= i < dag.n and 0 <= j < dag.n):
        raise IndexError(f"node index out of range for n={dag.n}")
    if rel is RelationKind.IS_PARENT:
        return dag.has_edge(i, j)
    if rel is RelationKind.IS_CHILD:
        return dag.has_edge(j, i)
    if rel is RelationKind.IS_ANCESTOR:
        return bool(dag.descendant_mask(i) >> j & 1) and not dag.has_edge(i, j)
    if rel is RelationKind.IS_DESCENDANT:
        return bool(dag.descendant_mask(j) >> i & 1) and not dag.has_edge(j, i)
    if rel is RelationKind.HAS_COLLIDER:
        return bool(dag.child_mask(i) & dag.child_mask(j))
    if rel is RelationKind.HAS_CONFOUNDER:
        return bool(dag.parent_mask(i) & dag.parent_mask(j))
    raise ValueError(f"unknown relation {rel!r}")


# ---------------------------------------------------------------------------
# canonicalization and enumeration
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _perm_gathers(n: int) -> np.ndarray:
    """For each permutation p, the flat-index gather such that
    (p applied to matrix M)[i, j] == M.flat[gather[i * n + j]]."""
    perms = list(itertools.permutations(range(n)))
    gathers = np.empty((len(perms), n * n), dtype=np.int64)
    for idx, p in enumerate(perms):
        for i in range(n):
            for j in range(n):
                gathers[idx, i * n + j] = p[i] * n + p[j]
    return gathers


@functools.lru_cache(maxsize=16)
def _bit_weights(n: int) -> np.ndarray:
    m = n * n
    return np.array([1 << (m - 1 - k) for k in range(m)], dtype=np.int64)


def _code_to_string(code: int, n: int) -> str:
    return format(code, f"0{n * n}b")


def canonical_form(dag: Dag) -> str:
    """Canonical string: the minimal row-major 0/1 adjacency encoding over
    all node permutations.  Two DAGs are isomorphic iff the strings match.
    """
    flat = dag.adjacency().reshape(1, -1)
    code = int(_kernels.min_perm_codes(flat, _perm_gathers(dag.n), _bit_weights(dag.n))[0])
    return _code_to_string(code, dag.n)


def _row_major_code(n: int, edges: tuple[tuple[int, int], ...]) -> int:
    code = 0
    for i, j in edges:
        code |= 1 << (n * n - 1 - (i * n + j))
    return code


@functools.lru_cache(maxsize=8)
def enumerate_dags(n: int) -> tuple[Dag, ...]:
    """All non-isomorphic DAGs on n nodes.

    Every returned graph has parent < child on each edge; order is
    lexicographic by canonical string.  The representative of each class is
    its member with the smallest row-major adjacency encoding.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if n == 1:
        return (Dag(1, ()),)

    pair_list = [(i, j) for i in range(n) for j in range(i + 1, n)]
    npairs = len(pair_list)
    count = 1 << npairs

    flats = np.zeros((count, n * n), dtype=np.uint8)
    for k, (i, j) in enumerate(pair_list):
        block = 1 << k
        sel = (np.arange(count) & block).astype(bool)
        flats[sel, i * n + j] = 1

    codes = _kernels.min_perm_codes(flats, _perm_gathers(n), _bit_weights(n))

    best_rep: dict[int, tuple[int, int]] = {}
    for mask in range(count):
        edges = tuple(pair_list[k] for k in range(npairs) if mask >> k & 1)
        rm = _row_major_code(n, edges)
        code = int(codes[mask])
        cur = best_rep.get(code)
        if cur is None or rm < cur[0]:
            best_rep[code] = (rm, mask)

    dags = []
    for code in sorted(best_rep):
        mask = best_rep[code][1]
        edges = tuple(pair_list[k] for k in range(npairs) if mask >> k & 1)
        dags.append(Dag(n, edges))
    return tuple(dags)
