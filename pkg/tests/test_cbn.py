import itertools
import random

import pytest

from causalgen.cbn import (
    BernoulliCbn,
    ResponseFunctionScm,
    UndefinedConditionError,
    comonotone_scm,
    counterfactual_prob,
    independent_scm,
    intervene,
    joint_prob,
    query_prob,
)
from causalgen.dags import Dag
from oracles import twin_network_counterfactual

TOL = 1e-12


def random_cbn(dag: Dag, rng: random.Random) -> BernoulliCbn:
    cpds = []
    for i in range(dag.n):
        k = len(dag.parents(i))
        cpds.append(tuple(round(rng.uniform(0.05, 0.95), 2) for _ in range(1 << k)))
    return BernoulliCbn(dag, tuple(cpds))


CHAIN2 = Dag(2, ((0, 1),))
CONFOUNDER3 = Dag(3, ((0, 1), (0, 2), (1, 2)))


def test_cbn_validation():
    with pytest.raises(ValueError):
        BernoulliCbn(CHAIN2, ((0.5,),))  # missing a table
    with pytest.raises(ValueError):
        BernoulliCbn(CHAIN2, ((0.5,), (0.7,)))  # wrong row count
    with pytest.raises(ValueError):
        BernoulliCbn(CHAIN2, ((1.5,), (0.2, 0.7)))


def test_joint_prob_product():
    cbn = BernoulliCbn(CHAIN2, ((0.5,), (0.2, 0.7)))
    assert abs(joint_prob(cbn, (1, 1)) - 0.35) < TOL
    assert abs(joint_prob(cbn, (0, 1)) - 0.5 * 0.2) < TOL


def test_joint_normalizes():
    rng = random.Random(4)
    for dag in (CHAIN2, CONFOUNDER3, Dag(4, ((0, 1), (0, 2), (1, 3), (2, 3)))):
        cbn = random_cbn(dag, rng)
        total = sum(
            joint_prob(cbn, a) for a in itertools.product((0, 1), repeat=dag.n)
        )
        assert abs(total - 1.0) < TOL


def test_hand_multiplied_confounder_joint():
    # Z=node0, X=node1, Y=node2 with Z->X, Z->Y, X->Y
    cbn = BernoulliCbn(
        CONFOUNDER3,
        ((0.3,), (0.2, 0.9), (0.1, 0.5, 0.4, 0.8)),
    )
    # P(Z=1, X=0, Y=1): 0.3 * (1-0.9) * P(Y=1|X=0,Z=1)
    # Y's parents are (0, 1) = (Z, X); config Z=1,X=0 -> index 0b01 = 1
    assert abs(joint_prob(cbn, (1, 0, 1)) - 0.3 * 0.1 * 0.5) < TOL


def test_query_prob_examples():
    cbn = BernoulliCbn(CHAIN2, ((0.5,), (0.2, 0.7)))
    assert abs(query_prob(cbn, {0: 1}) - 0.5) < TOL
    assert abs(query_prob(cbn, {1: 1}, {0: 1}) - 0.7) < TOL
    # Bayes: P(X=1 | Y=1) = 0.35 / (0.35 + 0.10)
    assert abs(query_prob(cbn, {0: 1}, {1: 1}) - 0.35 / 0.45) < TOL


def test_query_prob_complement_sums_to_one():
    rng = random.Random(5)
    cbn = random_cbn(CONFOUNDER3, rng)
    for given in ({}, {0: 1}, {0: 0, 1: 1}):
        assert (
            abs(
                query_prob(cbn, {2: 0}, given)
                + query_prob(cbn, {2: 1}, given)
                - 1.0
            )
            < TOL
        )


def test_query_prob_zero_condition():
    cbn = BernoulliCbn(CHAIN2, ((1.0,), (0.2, 0.7)))
    with pytest.raises(UndefinedConditionError):
        query_prob(cbn, {1: 1}, {0: 0})


def test_markov_screening():
    rng = random.Random(6)
    dag = Dag(4, ((0, 1), (1, 2), (0, 3)))
    cbn = random_cbn(dag, rng)
    # node 2's parent is 1; node 3 is a non-descendant of 2
    base = query_prob(cbn, {2: 1}, {1: 1})
    screened = query_prob(cbn, {2: 1}, {1: 1, 3: 1})
    assert abs(base - screened) < TOL


def test_intervene_examples():
    cbn = BernoulliCbn(CHAIN2, ((0.5,), (0.2, 0.7)))
    m = intervene(cbn, {0: 1})
    assert m.dag.edges == ((0, 1),)
    assert abs(query_prob(m, {1: 1}) - 0.7) < TOL
    # intervening on a leaf leaves other marginals unchanged
    m2 = intervene(cbn, {1: 0})
    assert abs(query_prob(m2, {0: 1}) - 0.5) < TOL
    assert m2.dag.edges == ()


def test_intervene_on_root_equals_conditioning():
    rng = random.Random(7)
    cbn = random_cbn(CONFOUNDER3, rng)
    for val in (0, 1):
        m = intervene(cbn, {0: val})
        for target in ((1,), (2,)):
            t = {target[0]: 1}
            assert abs(query_prob(m, t) - query_prob(cbn, t, {0: val})) < TOL


def test_intervention_matches_backdoor_adjustment():
    rng = random.Random(8)
    cbn = random_cbn(CONFOUNDER3, rng)
    m = intervene(cbn, {1: 1})
    adjusted = sum(
        query_prob(cbn, {0: z}) * query_prob(cbn, {2: 1}, {1: 1, 0: z})
        for z in (0, 1)
    )
    assert abs(query_prob(m, {2: 1}) - adjusted) < 1e-10


@pytest.mark.parametrize("build", [comonotone_scm, independent_scm])
def test_scm_marginalizes_back_to_cbn(build):
    rng = random.Random(9)
    for dag in (CHAIN2, CONFOUNDER3):
        cbn = random_cbn(dag, rng)
        induced = build(cbn).induced_cbn()
        for i in range(dag.n):
            for a, b in zip(induced.cpds[i], cbn.cpds[i]):
                assert abs(a - b) < TOL


def test_comonotone_single_parent_support():
    cbn = BernoulliCbn(CHAIN2, ((0.5,), (0.2, 0.7)))
    scm = comonotone_scm(cbn)
    family = dict()
    for fn, p in scm.responses[1]:
        family[fn] = p
    # mass on always-1, follow-parent, always-0 ordered by the table
    assert abs(family[(1, 1)] - 0.2) < TOL
    assert abs(family[(0, 1)] - 0.5) < TOL
    assert abs(family[(0, 0)] - 0.3) < TOL


def test_scm_validation():
    with pytest.raises(ValueError):
        ResponseFunctionScm(CHAIN2, ((((0,), 0.5), ((1,), 0.4)), ((((0, 0), 1.0),))))


def test_counterfactual_deterministic():
    det = BernoulliCbn(CHAIN2, ((0.5,), (0.0, 1.0)))  # Y := X
    scm = comonotone_scm(det)
    p = counterfactual_prob(scm, {0: 1}, {1: 1}, {0: 0, 1: 0})
    assert abs(p - 1.0) < TOL


def test_counterfactual_without_evidence_is_interventional():
    rng = random.Random(10)
    for dag in (CHAIN2, CONFOUNDER3):
        cbn = random_cbn(dag, rng)
        scm = comonotone_scm(cbn)
        y = dag.n - 1
        for x_val in (0, 1):
            p_cf = counterfactual_prob(scm, {0: x_val}, {y: 1}, {})
            p_do = query_prob(intervene(cbn, {0: x_val}), {y: 1})
            assert abs(p_cf - p_do) < 1e-10


def test_counterfactual_zero_probability_evidence():
    det = BernoulliCbn(CHAIN2, ((0.5,), (0.0, 1.0)))
    scm = comonotone_scm(det)
    with pytest.raises(UndefinedConditionError):
        counterfactual_prob(scm, {0: 1}, {1: 1}, {0: 0, 1: 1})


@pytest.mark.parametrize("build", [comonotone_scm, independent_scm])
def test_counterfactual_matches_twin_network_oracle(build):
    rng = random.Random(11)
    shapes = [CHAIN2, Dag(3, ((0, 1), (1, 2))), CONFOUNDER3, Dag(3, ((0, 2), (1, 2)))]
    for _ in range(25):
        dag = shapes[rng.randrange(len(shapes))]
        scm = build(random_cbn(dag, rng))
        y = dag.n - 1
        x_val = rng.randint(0, 1)
        evidence = {0: 1 - x_val}
        p = counterfactual_prob(scm, {0: x_val}, {y: 1}, evidence)
        q = twin_network_counterfactual(scm, {0: x_val}, {y: 1}, evidence)
        assert abs(p - q) < 1e-10
