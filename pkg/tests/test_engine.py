import random

import pytest

from causalgen.cbn import comonotone_scm, intervene, query_prob
from causalgen.cladder import _raw_cbn
from causalgen.engine import (
    COVERAGE,
    EPSILON,
    GRAPH_BANK,
    AmbiguousValueError,
    CoverageError,
    DegenerateDistributionError,
    Query,
    QueryKind,
    answer,
    check_backdoor_set,
    data_values,
    derive_estimand,
    evaluate,
    evaluate_from_data,
    explaining_away_delta,
    required_data,
)
from causalgen.cbn import BernoulliCbn
from oracles import nested_counterfactual_mean, twin_network_counterfactual


def ground_truth_ate(spec, cbn):
    x, y = spec.index(spec.treatment), spec.index(spec.outcome)
    return query_prob(intervene(cbn, {x: 1}), {y: 1}) - query_prob(
        intervene(cbn, {x: 0}), {y: 1}
    )


def test_graph_bank_shapes():
    assert len(GRAPH_BANK) == 10
    sizes = [len(g.nodes) for g in GRAPH_BANK.values()]
    assert sum(sizes) / len(sizes) == 3.5
    for spec in GRAPH_BANK.values():
        dag = spec.dag()  # validates acyclicity and names
        assert spec.treatment in spec.nodes and spec.outcome in spec.nodes
        assert dag.n == len(spec.nodes)


def test_backdoor_textbook_cases():
    conf = GRAPH_BANK["confounding"]
    assert check_backdoor_set(conf, "X", "Y", ("V1",))
    assert not check_backdoor_set(conf, "X", "Y", ())
    med = GRAPH_BANK["mediation"]
    assert check_backdoor_set(med, "X", "Y", ())
    assert not check_backdoor_set(med, "X", "Y", ("V2",))  # descendant
    coll = GRAPH_BANK["collision"]
    assert check_backdoor_set(coll, "X", "Y", ())
    assert not check_backdoor_set(coll, "X", "Y", ("V2",))
    iv = GRAPH_BANK["IV"]
    assert check_backdoor_set(iv, "X", "Y", ("V1",))
    assert not check_backdoor_set(iv, "X", "Y", ("V2",))
    fd = GRAPH_BANK["frontdoor"]
    assert check_backdoor_set(fd, "X", "Y", ("V1",))
    assert not check_backdoor_set(fd, "X", "Y", ("V3",))


def test_backdoor_errors():
    conf = GRAPH_BANK["confounding"]
    with pytest.raises(ValueError):
        check_backdoor_set(conf, "X", "X", ())
    with pytest.raises(ValueError):
        check_backdoor_set(conf, "X", "Y", ("X",))


def test_coverage_table():
    assert COVERAGE[QueryKind.NDE] == ("IV", "arrowhead", "confounding", "mediation", "diamondcut")
    assert COVERAGE[QueryKind.NIE] == ("mediation", "frontdoor", "arrowhead", "diamond", "chain")
    assert COVERAGE[QueryKind.COLLIDER_BIAS] == ("collision",)
    assert "collision" not in COVERAGE[QueryKind.ATE]
    assert "IV" not in COVERAGE[QueryKind.ATT]
    with pytest.raises(CoverageError):
        Query(QueryKind.NIE, "confounding")


def test_required_data_backdoor_ate():
    est = derive_estimand("confounding", Query(QueryKind.ATE, "confounding"))
    rendered = [t.render() for t in required_data(est)]
    assert rendered == [
        "P(V1=1)",
        "P(Y=1 | V1=1, X=1)",
        "P(Y=1 | V1=1, X=0)",
        "P(Y=1 | V1=0, X=1)",
        "P(Y=1 | V1=0, X=0)",
    ]


def test_required_data_marginal_and_frontdoor():
    est = derive_estimand("chain", Query(QueryKind.MARGINAL, "chain"))
    assert [t.render() for t in required_data(est)] == [
        "P(X=1)",
        "P(Y=1 | X=1)",
        "P(Y=1 | X=0)",
    ]
    fd = derive_estimand("frontdoor", Query(QueryKind.ATE, "frontdoor"))
    rendered = {t.render() for t in required_data(fd)}
    assert "P(V3=1 | X=1)" in rendered and "P(V3=1 | X=0)" in rendered
    assert "P(Y=1 | V3=1, X=0)" in rendered and "P(X=1)" in rendered


def test_evaluate_requires_matching_graph():
    est = derive_estimand("chain", Query(QueryKind.ATE, "chain"))
    cbn = _raw_cbn("confounding", random.Random(0))
    with pytest.raises(ValueError):
        evaluate(est, cbn)


@pytest.mark.parametrize("graph_id", COVERAGE[QueryKind.ATE])
def test_ate_estimand_matches_truncated_factorization(graph_id):
    rng = random.Random(len(graph_id) * 7)
    spec = GRAPH_BANK[graph_id]
    est = derive_estimand(graph_id, Query(QueryKind.ATE, graph_id))
    for _ in range(100):
        cbn = _raw_cbn(graph_id, rng)
        assert abs(evaluate(est, cbn) - ground_truth_ate(spec, cbn)) < 1e-10


@pytest.mark.parametrize("graph_id", COVERAGE[QueryKind.ATT])
def test_att_estimand_matches_counterfactual_route(graph_id):
    rng = random.Random(len(graph_id))
    spec = GRAPH_BANK[graph_id]
    est = derive_estimand(graph_id, Query(QueryKind.ATT, graph_id))
    x, y = spec.index(spec.treatment), spec.index(spec.outcome)
    for _ in range(25):
        cbn = _raw_cbn(graph_id, rng)
        scm = comonotone_scm(cbn)
        e_y1 = twin_network_counterfactual(scm, {x: 1}, {y: 1}, {x: 1})
        e_y0 = twin_network_counterfactual(scm, {x: 0}, {y: 1}, {x: 1})
        assert abs(evaluate(est, cbn) - (e_y1 - e_y0)) < 1e-10


@pytest.mark.parametrize("graph_id", COVERAGE[QueryKind.NDE])
def test_nde_estimand_matches_nested_counterfactual(graph_id):
    rng = random.Random(2 + len(graph_id))
    spec = GRAPH_BANK[graph_id]
    est = derive_estimand(graph_id, Query(QueryKind.NDE, graph_id))
    y = spec.index(spec.outcome)
    x = spec.index(spec.treatment)
    meds = tuple(spec.index(m) for m in spec.mediators)
    for _ in range(12):
        cbn = _raw_cbn(graph_id, rng)
        scm = comonotone_scm(cbn)
        truth = nested_counterfactual_mean(scm, y, x, meds, 1, 0) - nested_counterfactual_mean(
            scm, y, x, meds, 0, 0
        )
        assert abs(evaluate(est, cbn) - truth) < 1e-10


@pytest.mark.parametrize("graph_id", COVERAGE[QueryKind.NIE])
def test_nie_estimand_matches_nested_counterfactual(graph_id):
    rng = random.Random(3 + len(graph_id))
    spec = GRAPH_BANK[graph_id]
    est = derive_estimand(graph_id, Query(QueryKind.NIE, graph_id))
    y = spec.index(spec.outcome)
    x = spec.index(spec.treatment)
    meds = tuple(spec.index(m) for m in spec.mediators)
    for _ in range(12):
        cbn = _raw_cbn(graph_id, rng)
        scm = comonotone_scm(cbn)
        truth = nested_counterfactual_mean(scm, y, x, meds, 0, 1) - nested_counterfactual_mean(
            scm, y, x, meds, 0, 0
        )
        assert abs(evaluate(est, cbn) - truth) < 1e-10


@pytest.mark.parametrize("graph_id", COVERAGE[QueryKind.COUNTERFACTUAL])
def test_counterfactual_estimand_matches_scm(graph_id):
    rng = random.Random(4 + len(graph_id))
    spec = GRAPH_BANK[graph_id]
    x, y = spec.index(spec.treatment), spec.index(spec.outcome)
    for x_val in (0, 1):
        q = Query(QueryKind.COUNTERFACTUAL, graph_id, counterfactual_value=x_val)
        est = derive_estimand(graph_id, q)
        for _ in range(10):
            cbn = _raw_cbn(graph_id, rng)
            scm = comonotone_scm(cbn)
            truth = twin_network_counterfactual(scm, {x: x_val}, {y: 1}, {x: 1 - x_val})
            assert abs(evaluate(est, cbn) - truth) < 1e-10


def test_deterministic_chain_ate_is_one():
    spec = GRAPH_BANK["chain"]
    # Y copies V2 copies X
    cbn = BernoulliCbn(spec.dag(), ((0.5,), (0.0, 1.0), (0.0, 1.0)))
    est = derive_estimand("chain", Query(QueryKind.ATE, "chain"))
    assert evaluate(est, cbn) == 1.0


def test_rung1_estimands():
    rng = random.Random(21)
    for graph_id in COVERAGE[QueryKind.CONDITIONAL]:
        spec = GRAPH_BANK[graph_id]
        x, y = spec.index(spec.treatment), spec.index(spec.outcome)
        cbn = _raw_cbn(graph_id, rng)
        marg = evaluate(derive_estimand(graph_id, Query(QueryKind.MARGINAL, graph_id)), cbn)
        assert abs(marg - query_prob(cbn, {y: 1})) < 1e-10
        cond = evaluate(derive_estimand(graph_id, Query(QueryKind.CONDITIONAL, graph_id)), cbn)
        assert abs(cond - (query_prob(cbn, {y: 1}, {x: 1}) - query_prob(cbn, {y: 1}))) < 1e-10


def test_explaining_away_or_gate():
    # X, Y fair coins, V2 = OR(X, Y): observing X=1 given V2=1 drops P(Y=1)
    spec = GRAPH_BANK["collision"]
    cbn = BernoulliCbn(spec.dag(), ((0.5,), (0.5,), (0.0, 1.0, 1.0, 1.0)))
    delta = explaining_away_delta(cbn, 1)
    assert abs(delta - (0.5 - 2 / 3)) < 1e-12
    # AND gate at V2=1 pins both parents: zero delta
    cbn_and = BernoulliCbn(spec.dag(), ((0.5,), (0.5,), (0.0, 0.0, 0.0, 1.0)))
    assert abs(explaining_away_delta(cbn_and, 1)) < 1e-12
    # degenerate V2 independent of X: zero delta
    cbn_ind = BernoulliCbn(spec.dag(), ((0.5,), (0.5,), (0.4, 0.4, 0.4, 0.4)))
    assert abs(explaining_away_delta(cbn_ind, 1)) < 1e-12


def test_collider_bias_is_always_zero():
    rng = random.Random(31)
    q = Query(QueryKind.COLLIDER_BIAS, "collision")
    est = derive_estimand("collision", q)
    spec = GRAPH_BANK["collision"]
    x, y = spec.index("X"), spec.index("Y")
    for _ in range(30):
        cbn = _raw_cbn("collision", rng)
        assert evaluate(est, cbn) == 0.0
        truth = query_prob(intervene(cbn, {x: 1}), {y: 1}) - query_prob(
            intervene(cbn, {x: 0}), {y: 1}
        )
        assert abs(truth) < 1e-12
        assert answer(q, evaluate(est, cbn)) == "no"


def test_mediation_telescoping_identity():
    rng = random.Random(41)
    spec = GRAPH_BANK["mediation"]
    ate = derive_estimand("mediation", Query(QueryKind.ATE, "mediation"))
    nde = derive_estimand("mediation", Query(QueryKind.NDE, "mediation"))
    x, m, y = (spec.index(v) for v in ("X", "V2", "Y"))
    for _ in range(50):
        cbn = _raw_cbn("mediation", rng)
        # complementary indirect effect at treated baseline
        tie = sum(
            (query_prob(cbn, {m: mv}, {x: 1}) - query_prob(cbn, {m: mv}, {x: 0}))
            * query_prob(cbn, {y: 1}, {x: 1, m: mv})
            for mv in (0, 1)
        )
        assert abs(evaluate(ate, cbn) - (evaluate(nde, cbn) + tie)) < 1e-12


def test_required_data_is_sufficient():
    rng = random.Random(51)
    for kind in QueryKind:
        if kind in (QueryKind.BACKDOOR_ADJUSTMENT_SET, QueryKind.COLLIDER_BIAS):
            continue
        for graph_id in COVERAGE[kind]:
            q = Query(kind, graph_id)
            est = derive_estimand(graph_id, q)
            cbn = _raw_cbn(graph_id, rng)
            exact = {t: v for t, v in data_values(est, cbn, ndigits=12).items()}
            assert abs(evaluate_from_data(est, exact) - evaluate(est, cbn)) < 1e-9


def test_answer_semantics():
    ate_inc = Query(QueryKind.ATE, "chain", polarity="increase")
    ate_dec = Query(QueryKind.ATE, "chain", polarity="decrease")
    assert answer(ate_inc, 0.13) == "yes"
    assert answer(ate_dec, 0.13) == "no"
    assert answer(ate_inc, -0.13) == "no"
    assert answer(ate_dec, -0.13) == "yes"
    with pytest.raises(AmbiguousValueError):
        answer(ate_inc, EPSILON / 2)
    marg1 = Query(QueryKind.MARGINAL, "chain", target_value=1)
    marg0 = Query(QueryKind.MARGINAL, "chain", target_value=0)
    assert answer(marg1, 0.7) == "yes"
    assert answer(marg0, 0.7) == "no"
    with pytest.raises(AmbiguousValueError):
        answer(marg1, 0.5)
    adj = Query(QueryKind.BACKDOOR_ADJUSTMENT_SET, "confounding", candidate_set=("V1",))
    assert answer(adj, 1.0) == "yes"
    assert answer(adj, 0.0) == "no"
    with pytest.raises(ValueError):
        answer(ate_inc, float("nan"))


def test_answer_scale_invariance():
    q = Query(QueryKind.NDE, "mediation", polarity="increase")
    for scale in (1.0, 3.7, 100.0):
        assert answer(q, 0.02 * scale) == "yes"
        assert answer(q, -0.02 * scale) == "no"


def test_wald_requires_nondegenerate_instrument():
    spec = GRAPH_BANK["IV"]
    # zero compliance: X ignores V2 entirely
    cpds = ((0.5,), (0.5,), (0.3, 0.3, 0.3, 0.3), (0.2, 0.8, 0.4, 0.9))
    cbn = BernoulliCbn(spec.dag(), cpds)
    est = derive_estimand("IV", Query(QueryKind.ATE, "IV"))
    with pytest.raises(DegenerateDistributionError):
        evaluate(est, cbn)
