"""D-separation, all-pairs independence structures, and Markov equivalence
classes of labeled DAGs.

The independence structure of a DAG records, for every unordered node pair,
the complete family of separating sets.  Two DAGs are Markov equivalent iff
their structures are equal; equivalence classes of the unlabeled enumeration
are formed by canonicalizing structures over node relabelings.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dags import Dag


class UnrealizableStructureError(ValueError):
    """The given independence facts are not induced by any DAG."""


@functools.lru_cache(maxsize=16)
def _pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@functools.lru_cache(maxsize=64)
def _others(n: int, i: int, j: int) -> tuple[int, ...]:
    return tuple(v for v in range(n) if v != i and v != j)


def _subset_index(others: tuple[int, ...], z: frozenset[int]) -> int:
    s = 0
    for t, v in enumerate(others):
        if v in z:
            s |= 1 << t
    return s


def _subset_from_index(others: tuple[int, ...], s: int) -> frozenset[int]:
    return frozenset(v for t, v in enumerate(others) if s >> t & 1)


@dataclass(frozen=True)
class IndependenceStructure:
    """All-pairs d-separation facts of a labeled DAG.

    ``sepset_masks`` holds one bitmask per node pair in lexicographic order:
    bit s is set iff the subset of the remaining nodes with compressed index
    s separates the pair.  A zero mask means the pair is directly correlated
    (no separating set exists).
    """

    n: int
    sepset_masks: tuple[int, ...]

    def __post_init__(self):
        if len(self.sepset_masks) != len(_pairs(self.n)):
            raise ValueError("one mask per node pair required")

    def is_directly_correlated(self, i: int, j: int) -> bool:
        return self.sepset_masks[self._pair_index(i, j)] == 0

    def is_separated_by(self, i: int, j: int, z: frozenset[int]) -> bool:
        others = _others(self.n, *sorted((i, j)))
        if not z <= set(others):
            raise ValueError("conditioning set must exclude the pair")
        mask = self.sepset_masks[self._pair_index(i, j)]
        return bool(mask >> _subset_index(others, frozenset(z)) & 1)

    def separating_sets(self, i: int, j: int) -> list[frozenset[int]]:
        """Full store for the pair, ordered by (cardinality, node indices)."""
        i, j = sorted((i, j))
        others = _others(self.n, i, j)
        mask = self.sepset_masks[self._pair_index(i, j)]
        sets = [
            _subset_from_index(others, s)
            for s in range(1 << len(others))
            if mask >> s & 1
        ]
        return sorted(sets, key=lambda z: (len(z), sorted(z)))

    def witness(self, i: int, j: int) -> frozenset[int] | None:
        """Displayed separating set: minimum cardinality, lexicographic
        tie-break; None when the pair is directly correlated."""
        sets = self.separating_sets(i, j)
        return sets[0] if sets else None

    def _pair_index(self, i: int, j: int) -> int:
        i, j = sorted((i, j))
        return _pairs(self.n).index((i, j))

    # -- canonicalization over node relabelings ------------------------------

    def _bits(self) -> np.ndarray:
        n = self.n
        width = 1 << max(n - 2, 0)
        bits = np.zeros(len(self.sepset_masks) * width, dtype=np.uint8)
        for p, mask in enumerate(self.sepset_masks):
            for s in range(width):
                if mask >> s & 1:
                    bits[p * width + s] = 1
        return bits

    def packed(self) -> bytes:
        """Deterministic serialization; equal iff the structures are equal."""
        return np.packbits(self._bits()).tobytes()

    def relabel(self, perm: tuple[int, ...]) -> "IndependenceStructure":
        """Structure of the relabeled DAG (old node v becomes perm[v])."""
        gather = _relabel_gathers(self.n)[_perm_index(self.n, perm)]
        bits = self._bits()[gather]
        return _structure_from_bits(self.n, bits)

    def canonical(self) -> tuple["IndependenceStructure", tuple[int, ...]]:
        """Lexicographically minimal labeled structure over all relabelings,
        plus one permutation that achieves it."""
        bits = self._bits()
        gathers = _relabel_gathers(self.n)
        packed = np.packbits(bits[gathers], axis=1)
        best_idx = 0
        best = packed[0].tobytes()
        for idx in range(1, packed.shape[0]):
            cand = packed[idx].tobytes()
            if cand < best:
                best = cand
                best_idx = idx
        perm = _all_perms(self.n)[best_idx]
        return _structure_from_bits(self.n, bits[gathers[best_idx]]), perm


def _structure_from_bits(n: int, bits: np.ndarray) -> IndependenceStructure:
    width = 1 << max(n - 2, 0)
    masks = []
    for p in range(len(_pairs(n))):
        mask = 0
        for s in range(width):
            if bits[p * width + s]:
                mask |= 1 << s
        masks.append(mask)
    return IndependenceStructure(n, tuple(masks))


@functools.lru_cache(maxsize=16)
def _all_perms(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.permutations(range(n)))


def _perm_index(n: int, perm: tuple[int, ...]) -> int:
    return _all_perms(n).index(tuple(perm))


@functools.lru_cache(maxsize=16)
def _relabel_gathers(n: int) -> np.ndarray:
    """gather[p][f'] = flat fact index in the original structure that lands
    at flat index f' after applying permutation p."""
    pairs = _pairs(n)
    width = 1 << max(n - 2, 0)
    perms = _all_perms(n)
    gathers = np.empty((len(perms), len(pairs) * width), dtype=np.int64)
    for pi, perm in enumerate(perms):
        inv = [0] * n
        for v, w in enumerate(perm):
            inv[w] = v
        for p_new, (i_new, j_new) in enumerate(pairs):
            i_old, j_old = sorted((inv[i_new], inv[j_new]))
            p_old = pairs.index((i_old, j_old))
            others_new = _others(n, i_new, j_new)
            others_old = _others(n, i_old, j_old)
            for s_new in range(width):
                z_new = _subset_from_index(others_new, s_new)
                z_old = frozenset(inv[v] for v in z_new)
                s_old = _subset_index(others_old, z_old)
                gathers[pi, p_new * width + s_new] = p_old * width + s_old
    return gathers


# ---------------------------------------------------------------------------
# d-separation
# ---------------------------------------------------------------------------


def is_d_separated(dag: Dag, i: int, j: int, z) -> bool:
    """Whether every path between i and j is blocked by the conditioning
    set z (fork/chain blocked when conditioned; collider open only when it
    or a descendant is conditioned).
    """
    n = dag.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range for n={n}")
    if i == j:
        raise ValueError("d-separation requires two distinct nodes")
    z = frozenset(z)
    if i in z or j in z:
        raise ValueError("conditioning set must exclude the queried pair")
    if not all(0 <= v < n for v in z):
        raise IndexError(f"conditioning node out of range for n={n}")
    pmasks = [dag.parent_mask(v) for v in range(n)]
    cmasks = [dag.child_mask(v) for v in range(n)]
    z_mask = 0
    for v in z:
        z_mask |= 1 << v
    reach = _kernels._reachable_mask(pmasks, cmasks, n, i, z_mask)
    return not reach >> j & 1


def independence_structure(dag: Dag) -> IndependenceStructure:
    """All-pairs independence facts of the DAG, with the complete family of
    separating sets per pair."""
    masks = _kernels.dsep_sepset_masks(dag.adjacency())
    return IndependenceStructure(dag.n, tuple(int(m) for m in masks))


# ---------------------------------------------------------------------------
# Markov equivalence classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mec:
    """One Markov equivalence class of the unlabeled enumeration.

    ``structure`` is the relabel-canonical (representative) independence
    structure; ``members`` are all labeled DAGs consistent with it;
    ``canonical_dags`` are the enumeration representatives that mapped to
    this class.
    """

    n: int
    structure: IndependenceStructure
    members: tuple[Dag, ...]
    canonical_dags: tuple[Dag, ...]

    @property
    def key(self) -> bytes:
        return self.structure.packed()


def _skeleton_and_vstructures(
    structure: IndependenceStructure,
) -> tuple[list[tuple[int, int]], list[tuple[int, int, int]]]:
    """Skeleton edges (pairs with no separating set) and v-structure triples
    (a, c, b): both a-c and b-c adjacent, a-b not, and c outside the pair's
    separating sets."""
    n = structure.n
    adj = [[False] * n for _ in range(n)]
    skeleton = []
    for i, j in _pairs(n):
        if structure.is_directly_correlated(i, j):
            adj[i][j] = adj[j][i] = True
            skeleton.append((i, j))
    vstructs = []
    for i, j in _pairs(n):
        if adj[i][j]:
            continue
        witness = structure.witness(i, j)
        if witness is None:
            raise UnrealizableStructureError(
                f"pair ({i}, {j}) is non-adjacent yet has no separating set"
            )
        for c in range(n):
            if c != i and c != j and adj[i][c] and adj[j][c] and c not in witness:
                vstructs.append((i, c, j))
    return skeleton, vstructs


@functools.lru_cache(maxsize=100000)
def mec_members(structure: IndependenceStructure) -> tuple[Dag, ...]:
    """All labeled DAGs whose independence structure equals the given one:
    acyclic orientations of the skeleton with identical v-structures."""
    n = structure.n
    skeleton, vstructs = _skeleton_and_vstructures(structure)
    skel_adj = np.zeros((n, n), dtype=np.uint8)
    for u, v in skeleton:
        skel_adj[u, v] = skel_adj[v, u] = 1
    edges = np.asarray(skeleton, dtype=np.int64).reshape(-1, 2)
    targets = np.asarray(vstructs, dtype=np.int64).reshape(-1, 3)
    masks = _kernels.matching_orientations(n, edges, skel_adj, targets)

    members = []
    for mask in masks:
        oriented = tuple(
            (v, u) if int(mask) >> k & 1 else (u, v)
            for k, (u, v) in enumerate(skeleton)
        )
        members.append(Dag(n, oriented))
    members.sort(key=lambda d: d.edges)
    if not members:
        raise UnrealizableStructureError("no DAG matches the given facts")
    if independence_structure(members[0]) != structure:
        raise UnrealizableStructureError("facts are not induced by any DAG")
    return tuple(members)


def cluster_mecs(dags) -> list[Mec]:
    """Group DAGs whose independence structures are equal up to node
    relabeling; deterministic order by representative serialization."""
    dags = list(dags)
    if not dags:
        return []
    n = dags[0].n
    if any(d.n != n for d in dags):
        raise ValueError("all DAGs must have the same node count")

    groups: dict[bytes, tuple[IndependenceStructure, list[Dag]]] = {}
    for dag in dags:
        rep, _ = independence_structure(dag).canonical()
        entry = groups.setdefault(rep.packed(), (rep, []))
        entry[1].append(dag)

    mecs = []
    for key in sorted(groups):
        rep, group = groups[key]
        mecs.append(
            Mec(
                n=n,
                structure=rep,
                members=mec_members(rep),
                canonical_dags=tuple(group),
            )
        )
    return mecs
