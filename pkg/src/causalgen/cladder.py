"""Assemble natural-language causal question records: sample network
parameters, verbalize graph/data/query through the story bank, produce the
six-step explanation, and balance the dataset (exact 50% yes, rung ratios
5:5:6).
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass

from .cbn import BernoulliCbn, comonotone_scm, counterfactual_prob, independent_scm
from .corr2cause import derive_seed
from .engine import (
    COVERAGE,
    GRAPH_BANK,
    AmbiguousValueError,
    DegenerateDistributionError,
    Estimand,
    GraphSpec,
    Query,
    QueryKind,
    check_backdoor_set,
    data_values,
    derive_estimand,
    evaluate,
    evaluate_from_data,
    render_numeric,
    answer as engine_answer,
)
from .stories import SENSES, Story, pick_story

MAX_SAMPLE_ATTEMPTS = 1000
SCM_INVARIANCE_TOL = 1e-9


class GenerationError(RuntimeError):
    """Resampling budget exhausted while searching for an admissible network."""


@dataclass(frozen=True)
class CladderRecord:
    question: str
    answer: str
    explanation: str
    meta: dict

    def to_json_dict(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "explanation": self.explanation,
            "meta": self.meta,
        }


# ---------------------------------------------------------------------------
# parameter sampling
# ---------------------------------------------------------------------------


def _grid(rng: random.Random, lo: float = 0.05, hi: float = 0.95) -> float:
    return round(rng.uniform(lo, hi), 2)


def _raw_cbn(graph_id: str, rng: random.Random) -> BernoulliCbn:
    """Fresh parameter draw; every table entry lands on the verbalization
    grid (two decimals inside [0.05, 0.95]).

    The IV graph enforces equal instrument compliance across confounder
    strata so the Wald ratio coincides with the treatment effect.
    """
    spec = GRAPH_BANK[graph_id]
    dag = spec.dag()
    cpds: list[tuple[float, ...]] = []
    if graph_id == "IV":
        delta = _grid(rng, 0.05, 0.90)
        x_idx = spec.index("X")
        for i in range(dag.n):
            k = len(dag.parents(i))
            if i != x_idx:
                cpds.append(tuple(_grid(rng) for _ in range(1 << k)))
                continue
            # parents of X are (V1, V2); config bit order follows node order
            table = [0.0] * (1 << k)
            for v1 in (0, 1):
                base = _grid(rng, 0.05, round(0.95 - delta, 2))
                table[v1] = base                      # V2 = 0
                table[v1 | 2] = round(base + delta, 2)  # V2 = 1
            cpds.append(tuple(table))
        return BernoulliCbn(dag, tuple(cpds))
    for i in range(dag.n):
        k = len(dag.parents(i))
        cpds.append(tuple(_grid(rng) for _ in range(1 << k)))
    return BernoulliCbn(dag, tuple(cpds))


def _counterfactual_invariant(cbn: BernoulliCbn, query: Query, value: float) -> bool:
    """The counterfactual answer must not depend on which CBN-consistent
    response parameterization is assumed."""
    spec = GRAPH_BANK[query.graph_id]
    x = spec.index(spec.treatment)
    y = spec.index(spec.outcome)
    do = {x: query.counterfactual_value}
    evidence = {x: 1 - query.counterfactual_value}
    target = {y: 1}
    p_a = counterfactual_prob(comonotone_scm(cbn), do, target, evidence)
    p_b = counterfactual_prob(independent_scm(cbn), do, target, evidence)
    return (
        abs(p_a - p_b) <= SCM_INVARIANCE_TOL
        and abs(p_a - value) <= SCM_INVARIANCE_TOL
    )


def _admissible_bundle(query: Query, rng: random.Random):
    """Sample until the query clears the ambiguity gate on both the exact
    value and the rounded verbalized data, plus kind-specific checks."""
    for _ in range(MAX_SAMPLE_ATTEMPTS):
        cbn = _raw_cbn(query.graph_id, rng)
        estimand = derive_estimand(query.graph_id, query)
        try:
            values = data_values(estimand, cbn)
            v_exact = evaluate(estimand, cbn)
            if estimand.expr is None:
                return cbn, estimand, values, v_exact, v_exact
            v_data = evaluate_from_data(estimand, values)
            if query.kind is not QueryKind.COLLIDER_BIAS:
                if engine_answer(query, v_exact) != engine_answer(query, v_data):
                    continue
            if query.kind is QueryKind.COUNTERFACTUAL:
                if not _counterfactual_invariant(cbn, query, v_exact):
                    continue
        except (AmbiguousValueError, DegenerateDistributionError):
            continue
        return cbn, estimand, values, v_exact, v_data
    raise GenerationError(
        f"no admissible parameters for {query.kind.value} on {query.graph_id} "
        f"after {MAX_SAMPLE_ATTEMPTS} attempts"
    )


def sample_cbn(graph_id: str, rng: random.Random, query: Query | None = None) -> BernoulliCbn:
    """One admissible network draw; ungated when no query is pending."""
    if query is None:
        return _raw_cbn(graph_id, rng)
    return _admissible_bundle(query, rng)[0]


# ---------------------------------------------------------------------------
# verbalization
# ---------------------------------------------------------------------------


def _cap(s: str) -> str:
    return s[0].upper() + s[1:] if s else s


def _pct(p: float) -> str:
    return f"{int(round(p * 100))}%"


def _join_and(parts) -> str:
    parts = list(parts)
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def _graph_sentences(spec: GraphSpec, story: Story) -> list[str]:
    sentences = []
    dag = spec.dag()
    for i, name in enumerate(spec.nodes):
        children = dag.children(i)
        if not children:
            continue
        child_names = _join_and(story.var(spec.nodes[c]).overall for c in children)
        sentences.append(f"{_cap(story.var(name).overall)} has a direct effect on {child_names}.")
    return sentences


def _data_sentence(spec: GraphSpec, story: Story, term, value: float) -> str:
    target = story.var(term.var).noun[1]
    if not term.conds:
        return f"The overall probability of {story.var(term.var).attr[1]} is {_pct(value)}."
    conds = _join_and(story.var(v).attr[x] for v, x in term.conds)
    return f"For {conds}, the probability of {target} is {_pct(value)}."


def _query_sentence(spec: GraphSpec, story: Story, query: Query) -> str:
    x, y = spec.treatment, spec.outcome
    sx, sy = story.var(x), story.var(y)
    k = query.kind
    if k is QueryKind.MARGINAL:
        return f"Is the overall likelihood of {sy.noun[query.target_value]} greater than chance?"
    if k is QueryKind.CONDITIONAL:
        return f"Is the chance of {sy.noun[query.target_value]} larger when observing {sx.noun[1]}?"
    if k is QueryKind.EXPLAINING_AWAY:
        word = "larger" if query.polarity == "increase" else "smaller"
        collider = story.var(spec.collider)
        return (
            f"For {collider.attr[query.condition_value]}, is the chance of "
            f"{sy.noun[1]} {word} when observing {sx.noun[1]}?"
        )
    if k is QueryKind.BACKDOOR_ADJUSTMENT_SET:
        cand = _join_and(story.var(v).overall for v in query.candidate_set)
        return (
            f"To understand how {sx.overall} affects {sy.overall}, should we "
            f"look directly at how {sx.overall} correlates with {sy.overall} "
            f"in general, or this correlation case by case according to {cand}?"
        )
    if k is QueryKind.ATE:
        word = "increase" if query.polarity == "increase" else "decrease"
        return f"Will {sx.noun[1]} {word} the chance of {sy.noun[1]}?"
    if k is QueryKind.COLLIDER_BIAS:
        word = "increase" if query.polarity == "increase" else "decrease"
        collider = story.var(spec.collider)
        return (
            f"If we look at {collider.attr[query.condition_value]}, does "
            f"{sx.noun[1]} {word} the chance of {sy.noun[1]}?"
        )
    if k is QueryKind.COUNTERFACTUAL:
        xv = query.counterfactual_value
        return (
            f"Can we infer that {sy.sent[query.target_value]} had it been that "
            f"{sx.cond[xv]} instead of {sx.cond[1 - xv]}?"
        )
    if k is QueryKind.ATT:
        word = "less" if query.polarity == "increase" else "more"
        return (
            f"For {sx.attr[1]}, would it be {word} likely to see {sy.noun[1]} "
            f"if {sx.cond[0]}?"
        )
    if k is QueryKind.NDE:
        word = "positively" if query.polarity == "increase" else "negatively"
        med = _join_and(story.var(v).overall for v in (spec.mediators or spec.others()))
        return (
            f"If we disregard the mediation effect through {med}, would "
            f"{sx.noun[1]} still {word} affect {sy.noun[1]}?"
        )
    if k is QueryKind.NIE:
        word = "positively" if query.polarity == "increase" else "negatively"
        med = _join_and(story.var(v).overall for v in spec.mediators)
        return f"Does {sx.overall} {word} affect {sy.overall} through {med}?"
    raise ValueError(f"unknown kind {k!r}")


def verbalize_question(spec: GraphSpec, story: Story, data_items, query: Query) -> str:
    """Graph block, optional unobserved notes, one sentence per available
    data term, and the query sentence."""
    sentences = _graph_sentences(spec, story)
    mentioned = {t.var for t, _ in data_items}
    mentioned |= {v for t, _ in data_items for v, _ in t.conds}
    mentioned |= set(query.candidate_set)
    for v in spec.narratively_unobserved:
        if v not in mentioned:
            sentences.append(f"{_cap(story.var(v).overall)} is unobserved.")
    for term, value in data_items:
        sentences.append(_data_sentence(spec, story, term, value))
    sentences.append(_query_sentence(spec, story, query))
    return " ".join(sentences)


def generate_explanation(
    spec: GraphSpec,
    query: Query,
    estimand: Estimand,
    data_items,
    value: float,
    final_answer: str,
) -> str:
    """Fixed six-step template: graph, query type, symbolic form, data,
    estimand, arithmetic."""
    graph_str = ", ".join(f"{a} -> {b}" for a, b in spec.edges)
    data_str = "; ".join(f"{t.render()}={v:.2f}" for t, v in data_items)
    est_str = estimand.render()
    if estimand.expr is None:
        arithmetic = f"{value:.4f}"
    else:
        arithmetic = f"{render_numeric(estimand, dict(data_items))} = {value:.4f}"
    steps = [
        f'Step 1) Extract the causal graph: The causal graph expressed in the context is: "{graph_str}".',
        f'Step 2) Identify the query type: The query type of the above question is "{query.kind.value}".',
        f'Step 3) Formulate the query to its symbolic form: The formal form of the query is "{estimand.symbolic}".',
        f'Step 4) Collect all the available data: The available data are: "{data_str}".',
        f'Step 5) Derive the estimand: Based on the graph structure and causal query, the question can be simplified into estimand "{est_str}".',
        f'Step 6) Solve for the estimand: Plug in the available data "{data_str}" into "{est_str}".\n'
        f"{arithmetic}\n"
        f"Since the estimate for the estimand is {value:.4f}, the overall answer to the question is {final_answer}.",
    ]
    return "\n".join(steps)


# ---------------------------------------------------------------------------
# record assembly
# ---------------------------------------------------------------------------


def _query_meta(query: Query) -> dict:
    return {
        "kind": query.kind.value,
        "polarity": query.polarity,
        "target_value": query.target_value,
        "condition_value": query.condition_value,
        "counterfactual_value": query.counterfactual_value,
        "candidate_set": list(query.candidate_set),
    }


def query_from_meta(meta: dict) -> Query:
    kinds = {k.value: k for k in QueryKind}
    return Query(
        kind=kinds[meta["query"]["kind"]],
        graph_id=meta["graph"],
        polarity=meta["query"]["polarity"],
        target_value=meta["query"]["target_value"],
        condition_value=meta["query"]["condition_value"],
        counterfactual_value=meta["query"]["counterfactual_value"],
        candidate_set=tuple(meta["query"]["candidate_set"]),
    )


def cbn_from_meta(meta: dict) -> BernoulliCbn:
    spec = GRAPH_BANK[meta["graph"]]
    cpds = tuple(tuple(meta["cpds"][name]) for name in spec.nodes)
    return BernoulliCbn(spec.dag(), cpds)


def rederive_answer(meta: dict) -> str:
    """Recompute the answer from the embedded network alone (round-trip)."""
    query = query_from_meta(meta)
    estimand = derive_estimand(meta["graph"], query)
    value = evaluate(estimand, cbn_from_meta(meta))
    return engine_answer(query, value)


def _build_record(
    spec: GraphSpec,
    story: Story,
    query: Query,
    cbn: BernoulliCbn,
    estimand: Estimand,
    values: dict,
    v_data: float,
) -> CladderRecord:
    data_items = list(values.items())
    ans = engine_answer(query, v_data)
    question = verbalize_question(spec, story, data_items, query)
    explanation = generate_explanation(spec, query, estimand, data_items, v_data, ans)
    meta = {
        "graph": spec.graph_id,
        "query": _query_meta(query),
        "rung": query.rung,
        "story": story.story_id,
        "sense": story.sense,
        "cpds": {name: list(cbn.cpds[i]) for i, name in enumerate(spec.nodes)},
        "estimand": estimand.render(),
        "value": round(v_data, 6),
    }
    if query.kind is QueryKind.COUNTERFACTUAL:
        # generation rejects parameterization-sensitive draws, and the yes/no
        # semantics compare the counterfactual probability against 0.5
        meta["scm_invariant"] = True
        meta["counterfactual_semantics"] = "probability > 0.5"
    return CladderRecord(question, ans, explanation, meta)


def _candidate_sets(spec: GraphSpec) -> tuple[list[tuple[str, ...]], list[tuple[str, ...]]]:
    """(valid, invalid) nonempty candidate adjustment sets."""
    others = spec.others()
    valid, invalid = [], []
    for mask in range(1, 1 << len(others)):
        cand = tuple(v for t, v in enumerate(others) if mask >> t & 1)
        if check_backdoor_set(spec, spec.treatment, spec.outcome, cand):
            valid.append(cand)
        else:
            invalid.append(cand)
    return valid, invalid


_ADJ_SETS = {g: _candidate_sets(spec) for g, spec in GRAPH_BANK.items()}
_ADJ_MIXED = tuple(g for g, (v, i) in _ADJ_SETS.items() if v and i)
_ADJ_YES_ONLY = tuple(g for g, (v, i) in _ADJ_SETS.items() if v and not i)
_ADJ_NO_ONLY = tuple(g for g, (v, i) in _ADJ_SETS.items() if i and not v)


def _story_for(spec: GraphSpec, sense: str, rng: random.Random) -> Story:
    return pick_story(
        spec.graph_id, spec.nodes, spec.treatment, spec.outcome, sense, rng
    )


def _flip(query: Query) -> Query:
    k = query.kind
    if k in (QueryKind.MARGINAL, QueryKind.CONDITIONAL, QueryKind.COUNTERFACTUAL):
        return Query(
            k,
            query.graph_id,
            polarity=query.polarity,
            target_value=1 - query.target_value,
            condition_value=query.condition_value,
            counterfactual_value=query.counterfactual_value,
        )
    flipped = "decrease" if query.polarity == "increase" else "increase"
    return Query(
        k,
        query.graph_id,
        polarity=flipped,
        target_value=query.target_value,
        condition_value=query.condition_value,
        counterfactual_value=query.counterfactual_value,
        candidate_set=query.candidate_set,
    )


def _self_pair(kind: QueryKind, graph_id: str, sense: str, rng: random.Random) -> list[CladderRecord]:
    spec = GRAPH_BANK[graph_id]
    base = Query(
        kind,
        graph_id,
        polarity="increase",
        target_value=1,
        condition_value=rng.randint(0, 1),
        counterfactual_value=rng.randint(0, 1),
    )
    cbn, estimand, values, v_exact, v_data = _admissible_bundle(base, rng)
    story = _story_for(spec, sense, rng)
    flipped = _flip(base)
    est_flip = derive_estimand(graph_id, flipped)
    recs = [
        _build_record(spec, story, base, cbn, estimand, values, v_data),
        _build_record(spec, story, flipped, cbn, est_flip, values, v_data),
    ]
    assert {r.answer for r in recs} == {"yes", "no"}
    return recs


def _adjust_record(graph_id: str, candidate, sense: str, rng: random.Random) -> CladderRecord:
    spec = GRAPH_BANK[graph_id]
    query = Query(
        QueryKind.BACKDOOR_ADJUSTMENT_SET, graph_id, candidate_set=tuple(candidate)
    )
    cbn = _raw_cbn(graph_id, rng)
    estimand = derive_estimand(graph_id, query)
    value = evaluate(estimand, cbn)
    story = _story_for(spec, sense, rng)
    return _build_record(spec, story, query, cbn, estimand, {}, value)


def _forced_ate_yes(graph_id: str, sense: str, rng: random.Random) -> CladderRecord:
    """ATE record phrased so its answer is yes, used to balance always-no
    cells."""
    spec = GRAPH_BANK[graph_id]
    probe = Query(QueryKind.ATE, graph_id, polarity="increase")
    cbn, estimand, values, v_exact, v_data = _admissible_bundle(probe, rng)
    polarity = "increase" if v_data > 0 else "decrease"
    query = Query(QueryKind.ATE, graph_id, polarity=polarity)
    story = _story_for(spec, sense, rng)
    rec = _build_record(spec, story, query, cbn, estimand, values, v_data)
    assert rec.answer == "yes"
    return rec


def _collider_bias_record(sense: str, rng: random.Random) -> CladderRecord:
    spec = GRAPH_BANK["collision"]
    query = Query(
        QueryKind.COLLIDER_BIAS,
        "collision",
        polarity=("increase", "decrease")[rng.randint(0, 1)],
        condition_value=rng.randint(0, 1),
    )
    cbn, estimand, values, v_exact, v_data = _admissible_bundle(query, rng)
    story = _story_for(spec, sense, rng)
    return _build_record(spec, story, query, cbn, estimand, values, v_data)


def _pair_generators() -> dict[int, list]:
    """Per rung, the cycle of pair builders; each builder yields exactly one
    yes and one no record."""
    r1 = [("self", QueryKind.MARGINAL, g) for g in COVERAGE[QueryKind.MARGINAL]]
    r1 += [("self", QueryKind.CONDITIONAL, g) for g in COVERAGE[QueryKind.CONDITIONAL]]
    r1 += [("self", QueryKind.EXPLAINING_AWAY, g) for g in COVERAGE[QueryKind.EXPLAINING_AWAY]]

    r2 = [("self", QueryKind.ATE, g) for g in COVERAGE[QueryKind.ATE]]
    r2 += [("adjust_mixed", g) for g in _ADJ_MIXED]
    yes_cycle = _ADJ_YES_ONLY
    for t, g_no in enumerate(_ADJ_NO_ONLY):
        r2.append(("adjust_cross", yes_cycle[t % len(yes_cycle)], g_no))
    r2.append(("collider_donor",))

    r3 = [("self", QueryKind.COUNTERFACTUAL, g) for g in COVERAGE[QueryKind.COUNTERFACTUAL]]
    r3 += [("self", QueryKind.ATT, g) for g in COVERAGE[QueryKind.ATT]]
    r3 += [("self", QueryKind.NDE, g) for g in COVERAGE[QueryKind.NDE]]
    r3 += [("self", QueryKind.NIE, g) for g in COVERAGE[QueryKind.NIE]]
    return {1: r1, 2: r2, 3: r3}


def _make_pair(gen, sense: str, k: int, rng: random.Random) -> list[CladderRecord]:
    if gen[0] == "self":
        return _self_pair(gen[1], gen[2], sense, rng)
    if gen[0] == "adjust_mixed":
        graph_id = gen[1]
        valid, invalid = _ADJ_SETS[graph_id]
        yes = _adjust_record(graph_id, valid[k % len(valid)], sense, rng)
        no = _adjust_record(graph_id, invalid[k % len(invalid)], sense, rng)
        return [yes, no]
    if gen[0] == "adjust_cross":
        g_yes, g_no = gen[1], gen[2]
        valid = _ADJ_SETS[g_yes][0]
        invalid = _ADJ_SETS[g_no][1]
        yes = _adjust_record(g_yes, valid[k % len(valid)], sense, rng)
        no = _adjust_record(g_no, invalid[k % len(invalid)], sense, rng)
        return [yes, no]
    if gen[0] == "collider_donor":
        no = _collider_bias_record(sense, rng)
        donors = COVERAGE[QueryKind.ATE]
        yes = _forced_ate_yes(donors[k % len(donors)], sense, rng)
        return [no, yes]
    raise ValueError(f"unknown generator {gen!r}")


def _rung_pair_quotas(size: int) -> tuple[int, dict[int, int]]:
    """Pairs per rung via largest-remainder rounding of the 5:5:6 ratios."""
    pairs_total = size // 2
    weights = {1: 5 / 16, 2: 5 / 16, 3: 6 / 16}
    quotas = {r: int(pairs_total * w) for r, w in weights.items()}
    leftover = pairs_total - sum(quotas.values())
    fractions = sorted(
        weights, key=lambda r: (pairs_total * weights[r]) % 1, reverse=True
    )
    for r in fractions[:leftover]:
        quotas[r] += 1
    return pairs_total, quotas


def assemble_dataset(size: int, seed: int) -> list[CladderRecord]:
    """Deterministic record list: exactly 50% yes answers, rung sizes on the
    published 5:5:6 ratios, coverage-respecting (kind, graph) cells, stories
    cycling through the three sensicalness levels."""
    if size <= 0:
        raise ValueError("size must be positive")
    pairs_total, quotas = _rung_pair_quotas(size)
    if 2 * pairs_total < size:
        warnings.warn(
            f"size {size} is odd; generating {2 * pairs_total} records to keep "
            "the yes/no balance exact",
            stacklevel=2,
        )
    gens = _pair_generators()
    records: list[CladderRecord] = []
    for rung in (1, 2, 3):
        cycle = gens[rung]
        for p in range(quotas[rung]):
            gen = cycle[p % len(cycle)]
            k = p // len(cycle)
            rng = random.Random(derive_seed(seed, "cladder", rung, p))
            sense = SENSES[k % len(SENSES)]
            records.extend(_make_pair(gen, sense, k, rng))
    return records
