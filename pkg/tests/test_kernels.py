"""Backend equivalence: the numba kernels and the python/numpy fallbacks
must produce identical outputs on identical inputs."""

import itertools
import random

import numpy as np
import pytest

from causalgen import _kernels
from causalgen.dags import Dag, _bit_weights, _perm_gathers, enumerate_dags


def random_adjacency(n: int, rng: random.Random) -> np.ndarray:
    adj = np.zeros((n, n), dtype=np.uint8)
    order = list(range(n))
    rng.shuffle(order)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.45:
                adj[order[a], order[b]] = 1
    return adj


def test_backend_is_valid():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_min_perm_codes_fallback_matches_active_backend():
    rng = random.Random(0)
    for n in (2, 3, 4, 5):
        batch = np.stack(
            [random_adjacency(n, rng).reshape(-1) for _ in range(30)]
        ).astype(np.uint8)
        gathers = _perm_gathers(n)
        weights = _bit_weights(n)
        active = _kernels.min_perm_codes(batch, gathers, weights)
        fallback = _kernels._min_perm_codes_numpy(batch, gathers, weights)
        assert np.array_equal(active, fallback)


def test_dsep_masks_fallback_matches_active_backend():
    rng = random.Random(1)
    for n in (2, 3, 4, 5, 6):
        for _ in range(8):
            adj = random_adjacency(n, rng)
            active = _kernels.dsep_sepset_masks(adj)
            fallback = _kernels._dsep_sepset_masks_numpy(adj)
            assert np.array_equal(active, fallback)


def test_matching_orientations_fallback_matches_active_backend():
    rng = random.Random(2)
    for dag in rng.sample(list(enumerate_dags(4)), 12) + list(enumerate_dags(3)):
        n = dag.n
        skeleton = sorted({tuple(sorted(e)) for e in dag.edges})
        skel_adj = np.zeros((n, n), dtype=np.uint8)
        for u, v in skeleton:
            skel_adj[u, v] = skel_adj[v, u] = 1
        # target v-structures of this dag
        targets = []
        for c in range(n):
            parents = dag.parents(c)
            for a, b in itertools.combinations(parents, 2):
                if not skel_adj[a, b]:
                    targets.append((a, c, b))
        edges = np.asarray(skeleton, dtype=np.int64).reshape(-1, 2)
        targets_arr = np.asarray(sorted(targets), dtype=np.int64).reshape(-1, 3)
        active = _kernels.matching_orientations(n, edges, skel_adj, targets_arr)
        fallback = _kernels._matching_orientations_numpy(n, edges, skel_adj, targets_arr)
        assert np.array_equal(np.sort(active), np.sort(fallback))
        assert len(active) >= 1  # the source orientation always matches


def test_min_perm_code_is_isomorphism_invariant_key():
    # two labeled copies of one unlabeled graph share the minimal code
    a = Dag(4, ((0, 1), (1, 2)))
    b = a.relabel((2, 3, 0, 1))
    batch = np.stack([a.adjacency().reshape(-1), b.adjacency().reshape(-1)])
    codes = _kernels.min_perm_codes(batch, _perm_gathers(4), _bit_weights(4))
    assert codes[0] == codes[1]


def test_requested_numpy_backend(monkeypatch):
    monkeypatch.setenv(_kernels._ENV_VAR, "numpy")
    assert _kernels._pick_backend() == "numpy"
    monkeypatch.setenv(_kernels._ENV_VAR, "auto")
    assert _kernels._pick_backend() in ("numba", "numpy")
    monkeypatch.setenv(_kernels._ENV_VAR, "weird")
    with pytest.raises(ValueError):
        _kernels._pick_backend()
