"""Independent brute-force oracles used to validate the library paths.

These deliberately avoid the library's algorithms: d-separation by explicit
path enumeration, equivalence classes by filtering all labeled DAGs, and
counterfactuals by exhaustive summation over the twin network.
"""

from __future__ import annotations

import itertools

from causalgen.cbn import ResponseFunctionScm
from causalgen.dags import Dag


def oracle_d_separated(dag: Dag, i: int, j: int, z) -> bool:
    """Enumerate every undirected simple path and apply the blocking rules
    directly: a non-collider blocks when conditioned on; a collider blocks
    unless it or one of its descendants is conditioned on."""
    n = dag.n
    z = set(z)
    adj: dict[int, set[int]] = {v: set() for v in range(n)}
    for a, b in dag.edges:
        adj[a].add(b)
        adj[b].add(a)
    desc = [dag.descendant_mask(v) for v in range(n)]

    def blocked(path) -> bool:
        for t in range(1, len(path) - 1):
            prev, node, nxt = path[t - 1], path[t], path[t + 1]
            collider = dag.has_edge(prev, node) and dag.has_edge(nxt, node)
            if collider:
                opened = node in z or any(desc[node] >> w & 1 for w in z)
                if not opened:
                    return True
            elif node in z:
                return True
        return False

    stack = [(i, (i,))]
    while stack:
        v, path = stack.pop()
        if v == j:
            if not blocked(path):
                return False
            continue
        for w in adj[v]:
            if w not in path:
                stack.append((w, path + (w,)))
    return True


def all_labeled_dags(n: int) -> list[Dag]:
    """Every labeled DAG on n nodes, by orienting or dropping each pair."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = []
    for orient in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (i, j), o in zip(pairs, orient):
            if o == 1:
                edges.append((i, j))
            elif o == 2:
                edges.append((j, i))
        try:
            out.append(Dag(n, tuple(edges)))
        except ValueError:
            continue
    return out


def twin_network_counterfactual(
    scm: ResponseFunctionScm,
    do_x: dict[int, int],
    target: dict[int, int],
    evidence: dict[int, int],
) -> float:
    """P(target in the intervened twin | evidence in the factual world) by
    summing the full twin-network joint: every response choice crossed with
    every factual and twin value assignment, weighted by consistency."""
    n = scm.n
    dag = scm.dag
    parent_lists = [dag.parents(v) for v in range(n)]
    num = 0.0
    den = 0.0
    for choice, prob in scm.iter_choices():
        fns = [scm.responses[v][choice[v]][0] for v in range(n)]
        for factual in itertools.product((0, 1), repeat=n):
            ok = True
            for v in range(n):
                cfg = 0
                for t, p in enumerate(parent_lists[v]):
                    cfg |= factual[p] << t
                if factual[v] != fns[v][cfg]:
                    ok = False
                    break
            if not ok:
                continue
            if any(factual[v] != val for v, val in evidence.items()):
                continue
            den += prob
            for twin in itertools.product((0, 1), repeat=n):
                ok = True
                for v in range(n):
                    if v in do_x:
                        if twin[v] != do_x[v]:
                            ok = False
                            break
                        continue
                    cfg = 0
                    for t, p in enumerate(parent_lists[v]):
                        cfg |= twin[p] << t
                    if twin[v] != fns[v][cfg]:
                        ok = False
                        break
                if not ok:
                    continue
                if all(twin[v] == val for v, val in target.items()):
                    num += prob
    if den == 0.0:
        raise ZeroDivisionError("evidence has probability zero")
    return num / den


def nested_counterfactual_mean(
    scm: ResponseFunctionScm,
    outcome: int,
    treatment: int,
    mediators: tuple[int, ...],
    x_outer: int,
    x_mediator: int,
) -> float:
    """E[Y_{X=x_outer, M=M_{X=x_mediator}}] by enumerating response choices:
    read the mediators off the world with X set to x_mediator, then force
    them alongside X=x_outer."""
    total = 0.0
    for choice, prob in scm.iter_choices():
        med_world = scm.world(choice, {treatment: x_mediator})
        forced = {m: med_world[m] for m in mediators}
        forced[treatment] = x_outer
        total += prob * scm.world(choice, forced)[outcome]
    return total
