"""Hot numeric kernels, JIT-compiled with numba when available.

Three inner loops dominate the full 6-node pipeline: minimizing matrix
encodings over all node permutations (graph canonicalization), enumerating
separating sets for every node pair (independence structures), and filtering
skeleton orientations (equivalence-class members).  Each has a compiled
implementation and a plain python/numpy fallback with identical output.

Backend selection: set ``CAUSALGEN_BACKEND=numpy`` to force the fallback, or
``CAUSALGEN_BACKEND=numba`` to require the compiled path.  Default is numba
when importable, numpy otherwise.  ``benchmarks/bench_kernels.py`` compares
the two.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_VAR = "CAUSALGEN_BACKEND"


def _pick_backend() -> str:
    requested = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if requested == "numpy":
        return "numpy"
    if requested in ("auto", "numba"):
        try:
            import numba  # noqa: F401

            return "numba"
        except ImportError:
            if requested == "numba":
                raise ImportError(
                    f"{_ENV_VAR}=numba requested but numba is not installed"
                )
            return "numpy"
    raise ValueError(f"invalid {_ENV_VAR}={requested!r}; use 'numba' or 'numpy'")


BACKEND = _pick_backend()

# Directions for the active-trail walk.
_UP = 0
_DOWN = 1


# ---------------------------------------------------------------------------
# numpy / python fallbacks
# ---------------------------------------------------------------------------


def _min_perm_codes_numpy(values: np.ndarray, gathers: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per row of ``values``, the minimal weighted code over all gathers.

    values: (batch, m) small non-negative ints; gathers: (nperm, m) index
    arrays, one per node permutation; weights: (m,) int64 place values.
    """
    values = values.astype(np.int64, copy=False)
    best = values @ weights
    for g in gathers:
        np.minimum(best, values[:, g] @ weights, out=best)
    return best


def _reachable_mask(pmasks: list[int], cmasks: list[int], n: int, start: int, z_mask: int) -> int:
    """Nodes d-connected to ``start`` given the conditioning set ``z_mask``.

    Active-trail reachability over (node, direction) states; a collider opens
    only when it or one of its descendants is conditioned on, which is
    equivalent to the node being an ancestor of the conditioning set.
    """
    anc_z = z_mask
    while True:
        grown = anc_z
        for v in range(n):
            if cmasks[v] & anc_z:
                grown |= 1 << v
        if grown == anc_z:
            break
        anc_z = grown

    reachable = 0
    seen_up = 0
    seen_down = 0
    stack = [(start, _UP)]
    while stack:
        v, d = stack.pop()
        bit = 1 << v
        if d == _UP:
            if seen_up & bit:
                continue
            seen_up |= bit
        else:
            if seen_down & bit:
                continue
            seen_down |= bit
        if not z_mask & bit:
            reachable |= bit
        if d == _UP and not z_mask & bit:
            for p in range(n):
                if pmasks[v] >> p & 1:
                    stack.append((p, _UP))
            for c in range(n):
                if cmasks[v] >> c & 1:
                    stack.append((c, _DOWN))
        elif d == _DOWN:
            if not z_mask & bit:
                for c in range(n):
                    if cmasks[v] >> c & 1:
                        stack.append((c, _DOWN))
            if anc_z & bit:
                for p in range(n):
                    if pmasks[v] >> p & 1:
                        stack.append((p, _UP))
    return reachable


def _dsep_sepset_masks_numpy(adj: np.ndarray) -> np.ndarray:
    """Per node pair (lexicographic i<j order), the bitmask of separating sets.

    Bit s of entry for pair (i, j) is set iff the subset of the remaining
    nodes with compressed index s d-separates i from j.  Index s encodes
    membership of the remaining nodes in ascending node order.
    """
    n = adj.shape[0]
    pmasks = [0] * n
    cmasks = [0] * n
    for i in range(n):
        for j in range(n):
            if adj[i, j]:
                cmasks[i] |= 1 << j
                pmasks[j] |= 1 << i

    # One reachability walk per (source, conditioning set) covers all pairs.
    reach: list[dict[int, int]] = [dict() for _ in range(n)]
    for i in range(n):
        others = [v for v in range(n) if v != i]
        for s in range(1 << (n - 1)):
            z_mask = 0
            for t, v in enumerate(others):
                if s >> t & 1:
                    z_mask |= 1 << v
            reach[i][z_mask] = _reachable_mask(pmasks, cmasks, n, i, z_mask)

    npairs = n * (n - 1) // 2
    out = np.zeros(npairs, dtype=np.uint64)
    p = 0
    for i in range(n):
        for j in range(i + 1, n):
            rest = [v for v in range(n) if v != i and v != j]
            mask = 0
            for s in range(1 << len(rest)):
                z_mask = 0
                for t, v in enumerate(rest):
                    if s >> t & 1:
                        z_mask |= 1 << v
                if not reach[i][z_mask] >> j & 1:
                    mask |= 1 << s
            out[p] = mask
            p += 1
    return out


def _matching_orientations_numpy(
    n: int, edges: np.ndarray, skel_adj: np.ndarray, targets: np.ndarray
) -> np.ndarray:
    """Orientation bitmasks of the skeleton that are acyclic and reproduce
    exactly the target v-structures.

    edges: (m, 2) with u < v; bit k of a mask set means edge k is oriented
    v->u instead of u->v.  targets: (t, 3) rows (a, c, b) with a < b, both
    a->c and b->c present, and a, b non-adjacent in the skeleton.
    """
    m = edges.shape[0]
    ntargets = targets.shape[0]
    results = []
    for mask in range(1 << m):
        pmask = [0] * n
        for k in range(m):
            u, v = edges[k]
            if mask >> k & 1:
                pmask[u] |= 1 << v
            else:
                pmask[v] |= 1 << u

        # acyclicity: repeatedly remove nodes with no remaining parents
        alive = (1 << n) - 1
        for _ in range(n):
            removable = 0
            for v in range(n):
                if alive >> v & 1 and not pmask[v] & alive:
                    removable |= 1 << v
            alive &= ~removable
            if not alive:
                break
        if alive:
            continue

        nv = 0
        for c in range(n):
            pc = pmask[c]
            for a in range(n):
                if not pc >> a & 1:
                    continue
                for b in range(a + 1, n):
                    if pc >> b & 1 and not skel_adj[a, b]:
                        nv += 1
        if nv != ntargets:
            continue
        ok = True
        for t in range(ntargets):
            a, c, b = targets[t]
            if not (pmask[c] >> a & 1 and pmask[c] >> b & 1):
                ok = False
                break
        if ok:
            results.append(mask)
    return np.asarray(results, dtype=np.int64)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _min_perm_codes_numba(values, gathers, weights):  # pragma: no cover
        batch = values.shape[0]
        m = values.shape[1]
        nperm = gathers.shape[0]
        out = np.empty(batch, dtype=np.int64)
        for b in range(batch):
            best = np.int64(0x7FFFFFFFFFFFFFFF)
            for p in range(nperm):
                code = np.int64(0)
                for k in range(m):
                    code += np.int64(values[b, gathers[p, k]]) * weights[k]
                if code < best:
                    best = code
            out[b] = best
        return out

    @njit(cache=True)
    def _dsep_sepset_masks_numba(adj):  # pragma: no cover
        n = adj.shape[0]
        pmasks = np.zeros(n, dtype=np.int64)
        cmasks = np.zeros(n, dtype=np.int64)
        for i in range(n):
            for j in range(n):
                if adj[i, j]:
                    cmasks[i] |= np.int64(1) << j
                    pmasks[j] |= np.int64(1) << i

        npairs = n * (n - 1) // 2
        out = np.zeros(npairs, dtype=np.uint64)
        stack_node = np.empty(4 * n * n + 2, dtype=np.int64)
        stack_dir = np.empty(4 * n * n + 2, dtype=np.int64)

        p = 0
        for i in range(n):
            for j in range(i + 1, n):
                nrest = n - 2
                mask = np.uint64(0)
                for s in range(1 << nrest):
                    z_mask = np.int64(0)
                    t = 0
                    for v in range(n):
                        if v != i and v != j:
                            if s >> t & 1:
                                z_mask |= np.int64(1) << v
                            t += 1

                    anc_z = z_mask
                    grown = True
                    while grown:
                        grown = False
                        for v in range(n):
                            if not anc_z >> v & 1 and cmasks[v] & anc_z:
                                anc_z |= np.int64(1) << v
                                grown = True

                    reachable = np.int64(0)
                    seen_up = np.int64(0)
                    seen_down = np.int64(0)
                    top = 0
                    stack_node[top] = i
                    stack_dir[top] = _UP
                    top += 1
                    while top > 0:
                        top -= 1
                        v = stack_node[top]
                        d = stack_dir[top]
                        bit = np.int64(1) << v
                        if d == _UP:
                            if seen_up & bit:
                                continue
                            seen_up |= bit
                        else:
                            if seen_down & bit:
                                continue
                            seen_down |= bit
                        in_z = z_mask & bit != 0
                        if not in_z:
                            reachable |= bit
                        if d == _UP and not in_z:
                            for w in range(n):
                                if pmasks[v] >> w & 1:
                                    stack_node[top] = w
                                    stack_dir[top] = _UP
                                    top += 1
                                if cmasks[v] >> w & 1:
                                    stack_node[top] = w
                                    stack_dir[top] = _DOWN
                                    top += 1
                        elif d == _DOWN:
                            if not in_z:
                                for w in range(n):
                                    if cmasks[v] >> w & 1:
                                        stack_node[top] = w
                                        stack_dir[top] = _DOWN
                                        top += 1
                            if anc_z & bit:
                                for w in range(n):
                                    if pmasks[v] >> w & 1:
                                        stack_node[top] = w
                                        stack_dir[top] = _UP
                                        top += 1
                    if not reachable >> j & 1:
                        mask |= np.uint64(1) << np.uint64(s)
                out[p] = mask
                p += 1
        return out

    @njit(cache=True)
    def _matching_orientations_numba(n, edges, skel_adj, targets):  # pragma: no cover
        m = edges.shape[0]
        ntargets = targets.shape[0]
        buf = np.empty(1 << m, dtype=np.int64)
        count = 0
        pmask = np.zeros(n, dtype=np.int64)
        for mask in range(1 << m):
            for v in range(n):
                pmask[v] = 0
            for k in range(m):
                u = edges[k, 0]
                v = edges[k, 1]
                if mask >> k & 1:
                    pmask[u] |= np.int64(1) << v
                else:
                    pmask[v] |= np.int64(1) << u

            alive = np.int64((1 << n) - 1)
            for _ in range(n):
                removable = np.int64(0)
                for v in range(n):
                    if alive >> v & 1 and not pmask[v] & alive:
                        removable |= np.int64(1) << v
                alive &= ~removable
                if not alive:
                    break
            if alive:
                continue

            nv = 0
            for c in range(n):
                pc = pmask[c]
                for a in range(n):
                    if not pc >> a & 1:
                        continue
                    for b in range(a + 1, n):
                        if pc >> b & 1 and not skel_adj[a, b]:
                            nv += 1
            if nv != ntargets:
                continue
            ok = True
            for t in range(ntargets):
                a = targets[t, 0]
                c = targets[t, 1]
                b = targets[t, 2]
                if not (pmask[c] >> a & 1 and pmask[c] >> b & 1):
                    ok = False
                    break
            if ok:
                buf[count] = mask
                count += 1
        return buf[:count].copy()


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def min_perm_codes(values: np.ndarray, gathers: np.ndarray, weights: np.ndarray) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.uint8)
    gathers = np.ascontiguousarray(gathers, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.int64)
    if BACKEND == "numba":
        return _min_perm_codes_numba(values, gathers, weights)
    return _min_perm_codes_numpy(values, gathers, weights)


def dsep_sepset_masks(adj: np.ndarray) -> np.ndarray:
    adj = np.ascontiguousarray(adj, dtype=np.uint8)
    n = adj.shape[0]
    if n > 8:
        raise ValueError("separating-set enumeration supports at most 8 nodes")
    if BACKEND == "numba" and n >= 2:
        return _dsep_sepset_masks_numba(adj)
    if n < 2:
        return np.zeros(0, dtype=np.uint64)
    return _dsep_sepset_masks_numpy(adj)


def matching_orientations(
    n: int, edges: np.ndarray, skel_adj: np.ndarray, targets: np.ndarray
) -> np.ndarray:
    edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    skel_adj = np.ascontiguousarray(skel_adj, dtype=np.uint8)
    targets = np.ascontiguousarray(targets, dtype=np.int64).reshape(-1, 3)
    if edges.shape[0] == 0:
        return np.zeros(1, dtype=np.int64)
    if BACKEND == "numba":
        return _matching_orientations_numba(n, edges, skel_adj, targets)
    return _matching_orientations_numpy(n, edges, skel_adj, targets)
