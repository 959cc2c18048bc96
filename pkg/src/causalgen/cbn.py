"""Exact inference on Bernoulli causal Bayesian networks: observational
queries, interventions by truncated factorization, and counterfactuals via
response-function structural causal models.

Networks stay small (a handful of binary nodes) so everything enumerates the
full joint; no approximation anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .dags import Dag

PROB_TOL = 1e-12


class UndefinedConditionError(ValueError):
    """Conditioning (or evidence) event has probability zero."""


def _parent_config_index(parent_values: tuple[int, ...]) -> int:
    idx = 0
    for t, v in enumerate(parent_values):
        idx |= (v & 1) << t
    return idx


@dataclass(frozen=True)
class BernoulliCbn:
    """DAG plus one Bernoulli table per node.

    ``cpds[i]`` has one entry per configuration of node i's parents (sorted
    by node index); entry c is P(node i = 1 | parents in configuration c),
    where bit t of c is the value of the t-th parent.
    """

    dag: Dag
    cpds: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.cpds) != self.dag.n:
            raise ValueError("one table per node required")
        cpds = []
        for i in range(self.dag.n):
            table = tuple(float(p) for p in self.cpds[i])
            want = 1 << len(self.dag.parents(i))
            if len(table) != want:
                raise ValueError(
                    f"node {i} needs {want} table rows, got {len(table)}"
                )
            for p in table:
                if not (-PROB_TOL <= p <= 1 + PROB_TOL):
                    raise ValueError(f"probability {p} out of [0, 1]")
            cpds.append(table)
        object.__setattr__(self, "cpds", tuple(cpds))

    @property
    def n(self) -> int:
        return self.dag.n

    def node_prob(self, i: int, value: int, assignment) -> float:
        """P(node i = value | parents as in the full assignment)."""
        parents = self.dag.parents(i)
        idx = _parent_config_index(tuple(assignment[p] for p in parents))
        p1 = self.cpds[i][idx]
        return p1 if value == 1 else 1.0 - p1


def joint_prob(cbn: BernoulliCbn, assignment) -> float:
    """Probability of a full 0/1 assignment under the Markov factorization."""
    assignment = tuple(assignment)
    if len(assignment) != cbn.n:
        raise ValueError("assignment must cover all nodes")
    prob = 1.0
    for i in range(cbn.n):
        prob *= cbn.node_prob(i, assignment[i], assignment)
    return prob


def _event_prob(cbn: BernoulliCbn, fixed: dict[int, int]) -> float:
    free = [v for v in range(cbn.n) if v not in fixed]
    total = 0.0
    for values in itertools.product((0, 1), repeat=len(free)):
        assignment = [0] * cbn.n
        for v, val in fixed.items():
            assignment[v] = val
        for v, val in zip(free, values):
            assignment[v] = val
        total += joint_prob(cbn, assignment)
    return total


def query_prob(cbn: BernoulliCbn, target: dict[int, int], given: dict[int, int] | None = None) -> float:
    """Exact P(target | given) by enumerating the joint."""
    given = dict(given or {})
    target = dict(target)
    if set(target) & set(given):
        raise ValueError("target and conditioning sets must be disjoint")
    if not target:
        raise ValueError("empty target")
    denom = _event_prob(cbn, given) if given else 1.0
    if denom <= PROB_TOL:
        raise UndefinedConditionError(f"conditioning event {given} has probability 0")
    num = _event_prob(cbn, {**given, **target})
    return num / denom


def intervene(cbn: BernoulliCbn, do_assignment: dict[int, int]) -> BernoulliCbn:
    """Mutilated network: intervened nodes become parentless constants;
    every other mechanism is untouched (truncated factorization)."""
    do_assignment = dict(do_assignment)
    new_edges = tuple(e for e in cbn.dag.edges if e[1] not in do_assignment)
    new_dag = Dag(cbn.n, new_edges, cbn.dag.names)
    new_cpds = []
    for i in range(cbn.n):
        if i in do_assignment:
            new_cpds.append((1.0 if do_assignment[i] == 1 else 0.0,))
        else:
            new_cpds.append(cbn.cpds[i])
    return BernoulliCbn(new_dag, tuple(new_cpds))


# ---------------------------------------------------------------------------
# response-function SCMs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResponseFunctionScm:
    """SCM whose exogenous randomness is a distribution over deterministic
    response functions per node.

    ``responses[i]`` is a tuple of (function, probability) pairs; a function
    is a tuple giving the node's value for each parent configuration.  The
    induced conditionals must reproduce a Bernoulli network exactly.
    """

    dag: Dag
    responses: tuple[tuple[tuple[tuple[int, ...], float], ...], ...]

    def __post_init__(self):
        if len(self.responses) != self.dag.n:
            raise ValueError("one response family per node required")
        for i, family in enumerate(self.responses):
            want = 1 << len(self.dag.parents(i))
            total = 0.0
            for fn, p in family:
                if len(fn) != want:
                    raise ValueError(f"node {i} response has wrong arity")
                if p < -PROB_TOL:
                    raise ValueError("negative response probability")
                total += p
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"node {i} response probabilities sum to {total}")

    @property
    def n(self) -> int:
        return self.dag.n

    def induced_cbn(self) -> BernoulliCbn:
        """Marginalize response functions back to conditional tables."""
        cpds = []
        for i in range(self.n):
            want = 1 << len(self.dag.parents(i))
            table = []
            for cfg in range(want):
                table.append(sum(p for fn, p in self.responses[i] if fn[cfg] == 1))
            cpds.append(tuple(table))
        return BernoulliCbn(self.dag, tuple(cpds))

    def world(self, choice: tuple[int, ...], do: dict[int, int]) -> tuple[int, ...]:
        """Deterministic node values given one response choice per node and
        an intervention."""
        values = [0] * self.n
        order = _topological_order(self.dag)
        for v in order:
            if v in do:
                values[v] = do[v]
                continue
            parents = self.dag.parents(v)
            cfg = _parent_config_index(tuple(values[p] for p in parents))
            values[v] = self.responses[v][choice[v]][0][cfg]
        return tuple(values)

    def iter_choices(self):
        """All joint response choices with their prior probabilities."""
        index_families = [range(len(fam)) for fam in self.responses]
        for choice in itertools.product(*index_families):
            prob = 1.0
            for v, c in enumerate(choice):
                prob *= self.responses[v][c][1]
            if prob > 0.0:
                yield choice, prob


def _topological_order(dag: Dag) -> tuple[int, ...]:
    indeg = [len(dag.parents(v)) for v in range(dag.n)]
    order = []
    ready = [v for v in range(dag.n) if indeg[v] == 0]
    while ready:
        v = ready.pop()
        order.append(v)
        for c in dag.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return tuple(order)


def comonotone_scm(cbn: BernoulliCbn) -> ResponseFunctionScm:
    """Canonical response-function distribution: per node, couple all parent
    configurations through one shared uniform draw (maximally positively
    comonotone).  For a node with a single binary parent this is the usual
    {always-0, follow-parent, always-1} mixture ordered by p.
    """
    families = []
    for i in range(cbn.n):
        table = cbn.cpds[i]
        cuts = sorted(set(table))
        family = []
        prev = 0.0
        for cut in cuts:
            if cut > prev:
                fn = tuple(1 if p >= cut else 0 for p in table)
                family.append((fn, cut - prev))
                prev = cut
        if prev < 1.0:
            family.append((tuple(0 for _ in table), 1.0 - prev))
        families.append(tuple(family))
    return ResponseFunctionScm(cbn.dag, tuple(families))


def independent_scm(cbn: BernoulliCbn) -> ResponseFunctionScm:
    """Alternative CBN-consistent parameterization: every parent
    configuration draws its output independently."""
    families = []
    for i in range(cbn.n):
        table = cbn.cpds[i]
        family = []
        for fn in itertools.product((0, 1), repeat=len(table)):
            prob = 1.0
            for cfg, out in enumerate(fn):
                prob *= table[cfg] if out == 1 else 1.0 - table[cfg]
            if prob > 0.0:
                family.append((tuple(fn), prob))
        families.append(tuple(family))
    return ResponseFunctionScm(cbn.dag, tuple(families))


def counterfactual_prob(
    scm: ResponseFunctionScm,
    do_x: dict[int, int],
    target: dict[int, int],
    evidence: dict[int, int] | None = None,
) -> float:
    """P(target holds in the world mutilated by do_x | evidence held in the
    factual world): abduction over response choices, action, prediction.
    """
    evidence = dict(evidence or {})
    posterior_mass = 0.0
    target_mass = 0.0
    for choice, prob in scm.iter_choices():
        factual = scm.world(choice, {})
        if any(factual[v] != val for v, val in evidence.items()):
            continue
        posterior_mass += prob
        twin = scm.world(choice, do_x)
        if all(twin[v] == val for v, val in target.items()):
            target_mass += prob
    if posterior_mass <= PROB_TOL:
        raise UndefinedConditionError(f"evidence {evidence} has probability 0")
    return target_mass / posterior_mass
