"""The causal inference engine: map (graph, query type) to a closed-form
estimand over observable probability terms, list the data it needs, evaluate
it exactly on a Bernoulli network, and turn the value into a yes/no answer.

Estimands come from a hand-built rule table keyed by (graph, query kind);
every covered combination is identifiable by construction and the estimand
contains no do-operator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .cbn import BernoulliCbn, query_prob
from .dags import Dag
from .independence import is_d_separated

EPSILON = 0.005


class AmbiguousValueError(ValueError):
    """Effect too close to the decision boundary for a crisp yes/no."""


class DegenerateDistributionError(ZeroDivisionError):
    """A ratio estimand hit a zero denominator; caller should resample."""


class CoverageError(KeyError):
    """(graph, query) combination outside the coverage table."""


# ---------------------------------------------------------------------------
# graph bank
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphSpec:
    """One causal graph with its treatment-effect pair."""

    graph_id: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    treatment: str = "X"
    outcome: str = "Y"
    mediators: tuple[str, ...] = ()
    instrument: str | None = None
    narratively_unobserved: tuple[str, ...] = ()
    collider: str | None = None

    def index(self, name: str) -> int:
        return self.nodes.index(name)

    def dag(self) -> Dag:
        idx = {name: i for i, name in enumerate(self.nodes)}
        return Dag(
            len(self.nodes),
            tuple((idx[a], idx[b]) for a, b in self.edges),
            self.nodes,
        )

    def parents_of(self, name: str) -> tuple[str, ...]:
        dag = self.dag()
        return tuple(self.nodes[p] for p in dag.parents(self.index(name)))

    def others(self) -> tuple[str, ...]:
        return tuple(
            v for v in self.nodes if v not in (self.treatment, self.outcome)
        )


GRAPH_BANK: dict[str, GraphSpec] = {
    g.graph_id: g
    for g in (
        GraphSpec("chain", ("X", "V2", "Y"), (("X", "V2"), ("V2", "Y")), mediators=("V2",)),
        GraphSpec("collision", ("X", "Y", "V2"), (("X", "V2"), ("Y", "V2")), collider="V2"),
        GraphSpec("confounding", ("V1", "X", "Y"), (("V1", "X"), ("V1", "Y"), ("X", "Y"))),
        GraphSpec("mediation", ("X", "V2", "Y"), (("X", "V2"), ("X", "Y"), ("V2", "Y")), mediators=("V2",)),
        GraphSpec("triangle_collision", ("X", "Y", "V2"), (("X", "Y"), ("X", "V2"), ("Y", "V2")), collider="V2"),
        GraphSpec("diamond", ("X", "V2", "V3", "Y"), (("X", "V2"), ("X", "V3"), ("V2", "Y"), ("V3", "Y")), mediators=("V2", "V3")),
        GraphSpec("diamondcut", ("V1", "X", "V2", "Y"), (("V1", "X"), ("V1", "V2"), ("X", "Y"), ("V2", "Y"))),
        GraphSpec("IV", ("V1", "V2", "X", "Y"), (("V1", "X"), ("V1", "Y"), ("V2", "X"), ("X", "Y")), instrument="V2", narratively_unobserved=("V1",)),
        GraphSpec("arrowhead", ("X", "V2", "V3", "Y"), (("X", "V3"), ("X", "Y"), ("V2", "V3"), ("V2", "Y"), ("V3", "Y")), mediators=("V3",), narratively_unobserved=("V2",)),
        GraphSpec("frontdoor", ("V1", "X", "V3", "Y"), (("V1", "X"), ("V1", "Y"), ("X", "V3"), ("V3", "Y")), mediators=("V3",), narratively_unobserved=("V1",)),
    )
}


# ---------------------------------------------------------------------------
# query kinds
# ---------------------------------------------------------------------------


class QueryKind(enum.Enum):
    MARGINAL = "marginal probability"
    CONDITIONAL = "conditional probability"
    EXPLAINING_AWAY = "explaining away effect"
    BACKDOOR_ADJUSTMENT_SET = "backdoor adjustment set"
    ATE = "average treatment effect"
    COLLIDER_BIAS = "collider bias"
    COUNTERFACTUAL = "normal counterfactual question"
    ATT = "average treatment effect on treated"
    NDE = "natural direct effect"
    NIE = "natural indirect effect"


RUNG: dict[QueryKind, int] = {
    QueryKind.MARGINAL: 1,
    QueryKind.CONDITIONAL: 1,
    QueryKind.EXPLAINING_AWAY: 1,
    QueryKind.BACKDOOR_ADJUSTMENT_SET: 2,
    QueryKind.ATE: 2,
    QueryKind.COLLIDER_BIAS: 2,
    QueryKind.COUNTERFACTUAL: 3,
    QueryKind.ATT: 3,
    QueryKind.NDE: 3,
    QueryKind.NIE: 3,
}

_ALL = tuple(GRAPH_BANK)
_NO_COLLISION = tuple(g for g in _ALL if g != "collision")

COVERAGE: dict[QueryKind, tuple[str, ...]] = {
    QueryKind.MARGINAL: _ALL,
    QueryKind.CONDITIONAL: _NO_COLLISION,
    QueryKind.EXPLAINING_AWAY: ("collision",),
    QueryKind.BACKDOOR_ADJUSTMENT_SET: _ALL,
    QueryKind.ATE: _NO_COLLISION,
    QueryKind.COLLIDER_BIAS: ("collision",),
    QueryKind.COUNTERFACTUAL: _NO_COLLISION,
    QueryKind.ATT: tuple(g for g in _ALL if g not in ("collision", "IV")),
    QueryKind.NDE: ("IV", "arrowhead", "confounding", "mediation", "diamondcut"),
    QueryKind.NIE: ("mediation", "frontdoor", "arrowhead", "diamond", "chain"),
}

# sign-valued kinds answered through increase/decrease phrasing
SIGN_KINDS = (
    QueryKind.EXPLAINING_AWAY,
    QueryKind.ATE,
    QueryKind.COLLIDER_BIAS,
    QueryKind.ATT,
    QueryKind.NDE,
    QueryKind.NIE,
    QueryKind.CONDITIONAL,
)


@dataclass(frozen=True)
class Query:
    """A fully parameterized causal question against one bank graph."""

    kind: QueryKind
    graph_id: str
    polarity: str = "increase"        # increase | decrease, for sign kinds
    target_value: int = 1             # queried outcome value (marginal/conditional/counterfactual)
    condition_value: int = 1          # conditioned collider value (explaining away / collider bias)
    counterfactual_value: int = 1     # the do() value x in P(Y_x = y | X = 1 - x)
    candidate_set: tuple[str, ...] = ()  # adjustment-set question candidate

    def __post_init__(self):
        if self.graph_id not in GRAPH_BANK:
            raise CoverageError(f"unknown graph {self.graph_id!r}")
        if self.graph_id not in COVERAGE[self.kind]:
            raise CoverageError(f"{self.kind.value!r} not covered on {self.graph_id!r}")
        if self.polarity not in ("increase", "decrease"):
            raise ValueError("polarity must be 'increase' or 'decrease'")
        if self.kind is QueryKind.BACKDOOR_ADJUSTMENT_SET:
            spec = GRAPH_BANK[self.graph_id]
            if not self.candidate_set:
                raise ValueError("adjustment-set query needs a candidate set")
            bad = set(self.candidate_set) - set(spec.others())
            if bad:
                raise ValueError(f"candidate set may not contain {sorted(bad)}")

    @property
    def rung(self) -> int:
        return RUNG[self.kind]


# ---------------------------------------------------------------------------
# estimand expression tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """P(var = value | conds); value and condition values are 0/1 literals
    or names of symbols bound by an enclosing Sum."""

    var: str
    value: object = 1
    conds: tuple[tuple[str, object], ...] = ()

    def render(self) -> str:
        head = f"{self.var}={_sym(self.value)}"
        if not self.conds:
            return f"P({head})"
        tail = ", ".join(f"{v}={_sym(x)}" for v, x in self.conds)
        return f"P({head} | {tail})"


@dataclass(frozen=True)
class Const:
    value: float

    def render(self) -> str:
        return _fmt(self.value)


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: object
    right: object

    def render(self) -> str:
        left = self.left.render()
        right = self.right.render()
        if self.op in "+-":
            return f"{left} {self.op} {right}"
        left = f"[{left}]" if isinstance(self.left, (BinOp, Sum)) else left
        right = f"[{right}]" if isinstance(self.right, (BinOp, Sum)) else right
        return f"{left}{self.op}{right}"


@dataclass(frozen=True)
class Sum:
    """Sum of the body over the bound symbol taking values 0 and 1."""

    var: str
    symbol: str
    body: object

    def render(self) -> str:
        body = self.body.render()
        return f"\\sum_{{{self.var}={self.symbol}}} {body}"


def _sym(v) -> str:
    return str(v)


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".") if x != int(x) else str(int(x))


def _sub(a, b):
    return BinOp("-", a, b)


def _add(a, b):
    return BinOp("+", a, b)


def _mul(a, b):
    return BinOp("*", a, b)


def _div(a, b):
    return BinOp("/", a, b)


@dataclass(frozen=True)
class DataTerm:
    """One observable probability the question must supply: P(var=1 | conds)."""

    var: str
    conds: tuple[tuple[str, int], ...] = ()

    def render(self) -> str:
        if not self.conds:
            return f"P({self.var}=1)"
        tail = ", ".join(f"{v}={x}" for v, x in self.conds)
        return f"P({self.var}=1 | {tail})"


@dataclass(frozen=True)
class Estimand:
    """Reduced expression for one (graph, query) pair.

    For backdoor-adjustment-set queries the 'expression' is the graphical
    criterion itself; expr is None and evaluation returns 1 or 0.
    """

    graph_id: str
    query: Query
    expr: object | None
    symbolic: str

    def render(self) -> str:
        if self.expr is None:
            spec = GRAPH_BANK[self.graph_id]
            cand = "{" + ", ".join(self.query.candidate_set) + "}"
            return (
                f"1 if {cand} satisfies the backdoor criterion for "
                f"({spec.treatment}, {spec.outcome}) else 0"
            )
        return self.expr.render()


# ---------------------------------------------------------------------------
# backdoor criterion
# ---------------------------------------------------------------------------


def check_backdoor_set(spec: GraphSpec, x: str, y: str, z) -> bool:
    """Valid iff no member of z is a descendant of x and z d-separates x
    from y in the graph with x's outgoing edges removed."""
    z = tuple(z)
    if x == y or x in z or y in z:
        raise ValueError("treatment, outcome, and candidate set must be disjoint")
    dag = spec.dag()
    xi, yi = spec.index(x), spec.index(y)
    zi = frozenset(spec.index(v) for v in z)
    desc = dag.descendant_mask(xi)
    if any(desc >> v & 1 for v in zi):
        return False
    stripped = Dag(dag.n, tuple(e for e in dag.edges if e[0] != xi), dag.names)
    return is_d_separated(stripped, xi, yi, zi)


# ---------------------------------------------------------------------------
# rule table
# ---------------------------------------------------------------------------


def _p(var, value=1, conds=()):
    return Term(var, value, tuple(conds))


def _marginal_expr(spec: GraphSpec, target: int = 1):
    x, y = spec.treatment, spec.outcome
    base = Sum("X", "x", _mul(_p(x, "x"), _p(y, 1, ((x, "x"),))))
    return base if target == 1 else _sub(Const(1.0), base)


def _conditional_expr(spec: GraphSpec, target: int = 1):
    """P(Y=t | X=1) - P(Y=t), expanded through the treatment."""
    x, y = spec.treatment, spec.outcome
    cond = _p(y, 1, ((x, 1),))
    marg = _marginal_expr(spec)
    return _sub(cond, marg) if target == 1 else _sub(marg, cond)


def _plain_diff(spec: GraphSpec):
    x, y = spec.treatment, spec.outcome
    return _sub(_p(y, 1, ((x, 1),)), _p(y, 1, ((x, 0),)))


def _backdoor_ate(spec: GraphSpec, adjust: str):
    x, y = spec.treatment, spec.outcome
    return Sum(
        adjust,
        "v",
        _mul(
            _p(adjust, "v"),
            _sub(_p(y, 1, ((x, 1), (adjust, "v"))), _p(y, 1, ((x, 0), (adjust, "v")))),
        ),
    )


def _wald_ratio(spec: GraphSpec):
    x, y, z = spec.treatment, spec.outcome, spec.instrument
    return _div(
        _sub(_p(y, 1, ((z, 1),)), _p(y, 1, ((z, 0),))),
        _sub(_p(x, 1, ((z, 1),)), _p(x, 1, ((z, 0),))),
    )


def _frontdoor_ate(spec: GraphSpec):
    x, y = spec.treatment, spec.outcome
    m = spec.mediators[0]
    inner = Sum("X", "x", _mul(_p(x, "x"), _p(y, 1, ((x, "x"), (m, "m")))))
    return Sum(m, "m", _mul(_sub(_p(m, "m", ((x, 1),)), _p(m, "m", ((x, 0),))), inner))


def _ate_expr(spec: GraphSpec):
    if spec.graph_id == "IV":
        return _wald_ratio(spec)
    if spec.graph_id in ("confounding", "diamondcut"):
        return _backdoor_ate(spec, "V1")
    if spec.graph_id == "frontdoor":
        return _frontdoor_ate(spec)
    return _plain_diff(spec)


def _att_expr(spec: GraphSpec):
    x, y = spec.treatment, spec.outcome
    if spec.graph_id in ("confounding", "diamondcut"):
        adjust = "V1"
        return Sum(
            adjust,
            "v",
            _mul(
                _p(adjust, "v", ((x, 1),)),
                _sub(_p(y, 1, ((x, 1), (adjust, "v"))), _p(y, 1, ((x, 0), (adjust, "v")))),
            ),
        )
    if spec.graph_id == "frontdoor":
        m = spec.mediators[0]
        had_not = Sum(m, "m", _mul(_p(m, "m", ((x, 0),)), _p(y, 1, ((x, 1), (m, "m")))))
        return _sub(_p(y, 1, ((x, 1),)), had_not)
    return _plain_diff(spec)


def _counterfactual_expr(spec: GraphSpec, x_value: int, target: int = 1):
    """P(Y_{X=x} = target | X = 1-x), reduced to observable terms."""
    x, y = spec.treatment, spec.outcome
    evidence = 1 - x_value
    if spec.graph_id in ("confounding", "diamondcut", "IV"):
        base = Sum(
            "V1",
            "v",
            _mul(_p("V1", "v", ((x, evidence),)), _p(y, 1, ((x, x_value), ("V1", "v")))),
        )
    elif spec.graph_id == "frontdoor":
        m = spec.mediators[0]
        base = Sum(
            m,
            "m",
            _mul(_p(m, "m", ((x, x_value),)), _p(y, 1, ((x, evidence), (m, "m")))),
        )
    else:
        # treatment is a root: the counterfactual outcome is independent of X
        base = _p(y, 1, ((x, x_value),))
    return base if target == 1 else _sub(Const(1.0), base)


def _nde_expr(spec: GraphSpec):
    x, y = spec.treatment, spec.outcome
    if spec.graph_id == "mediation":
        m = spec.mediators[0]
        return Sum(
            m,
            "m",
            _mul(
                _p(m, "m", ((x, 0),)),
                _sub(_p(y, 1, ((x, 1), (m, "m"))), _p(y, 1, ((x, 0), (m, "m")))),
            ),
        )
    if spec.graph_id == "arrowhead":
        m = spec.mediators[0]
        inner = Sum(
            m,
            "m",
            _mul(
                _p(m, "m", ((x, 0), ("V2", "w"))),
                _sub(
                    _p(y, 1, ((x, 1), (m, "m"), ("V2", "w"))),
                    _p(y, 1, ((x, 0), (m, "m"), ("V2", "w"))),
                ),
            ),
        )
        return Sum("V2", "w", _mul(_p("V2", "w"), inner))
    # no mediator between treatment and outcome: direct effect is the ATE
    return _ate_expr(spec)


def _nie_expr(spec: GraphSpec):
    x, y = spec.treatment, spec.outcome
    if spec.graph_id == "chain":
        m = spec.mediators[0]
        return Sum(
            m,
            "m",
            _mul(_sub(_p(m, "m", ((x, 1),)), _p(m, "m", ((x, 0),))), _p(y, 1, ((m, "m"),))),
        )
    if spec.graph_id == "mediation":
        m = spec.mediators[0]
        return Sum(
            m,
            "m",
            _mul(
                _sub(_p(m, "m", ((x, 1),)), _p(m, "m", ((x, 0),))),
                _p(y, 1, ((x, 0), (m, "m"))),
            ),
        )
    if spec.graph_id == "frontdoor":
        return _frontdoor_ate(spec)
    if spec.graph_id == "diamond":
        inner = _p(y, 1, (("V2", "a"), ("V3", "b")))
        weight_diff = _sub(
            _mul(_p("V2", "a", ((x, 1),)), _p("V3", "b", ((x, 1),))),
            _mul(_p("V2", "a", ((x, 0),)), _p("V3", "b", ((x, 0),))),
        )
        return Sum("V2", "a", Sum("V3", "b", _mul(weight_diff, inner)))
    if spec.graph_id == "arrowhead":
        m = spec.mediators[0]
        inner = Sum(
            m,
            "m",
            _mul(
                _sub(_p(m, "m", ((x, 1), ("V2", "w"))), _p(m, "m", ((x, 0), ("V2", "w")))),
                _p(y, 1, ((x, 0), (m, "m"), ("V2", "w"))),
            ),
        )
        return Sum("V2", "w", _mul(_p("V2", "w"), inner))
    raise CoverageError(f"NIE not covered on {spec.graph_id!r}")


def _explaining_away_expr(spec: GraphSpec, z_value: int):
    x, y, c = spec.treatment, spec.outcome, spec.collider
    return _sub(_p(y, 1, ((x, 1), (c, z_value))), _p(y, 1, ((c, z_value),)))


def _symbolic_form(query: Query, spec: GraphSpec) -> str:
    x, y = spec.treatment, spec.outcome
    k = query.kind
    if k is QueryKind.MARGINAL:
        return f"P({y})"
    if k is QueryKind.CONDITIONAL:
        return f"P({y}|{x})"
    if k is QueryKind.EXPLAINING_AWAY:
        c, z = spec.collider, query.condition_value
        return f"P({y}=1|{x}=1,{c}={z}) - P({y}=1|{c}={z})"
    if k is QueryKind.BACKDOOR_ADJUSTMENT_SET:
        cand = "{" + ", ".join(query.candidate_set) + "}"
        return f"is_adjustment_set({cand}; {x} -> {y})"
    if k is QueryKind.ATE:
        return f"E[{y}|do({x}=1)]-E[{y}|do({x}=0)]"
    if k is QueryKind.COLLIDER_BIAS:
        c, z = spec.collider, query.condition_value
        return f"E[{y}=1|do({x}=1),{c}={z}] - E[{y}=1|do({x}=0),{c}={z}]"
    if k is QueryKind.COUNTERFACTUAL:
        xv = query.counterfactual_value
        return f"P({y}_{{{x}={xv}}}={query.target_value} | {x}={1-xv})"
    if k is QueryKind.ATT:
        return f"E[{y}_{{{x}=1}} - {y}_{{{x}=0}} | {x}=1]"
    m = ",".join(spec.mediators) if spec.mediators else "M"
    if k is QueryKind.NDE:
        return f"E[{y}_{{{x}=1,{m}={m}_{{{x}=0}}}} - {y}_{{{x}=0,{m}={m}_{{{x}=0}}}}]"
    if k is QueryKind.NIE:
        return f"E[{y}_{{{x}=0,{m}={m}_{{{x}=1}}}} - {y}_{{{x}=0,{m}={m}_{{{x}=0}}}}]"
    raise CoverageError(f"unknown kind {k!r}")


def derive_estimand(graph_id: str, query: Query) -> Estimand:
    """Closed-form estimand from the per-(graph, query) rule table."""
    if graph_id != query.graph_id:
        raise ValueError("query was built for a different graph")
    spec = GRAPH_BANK[graph_id]
    k = query.kind
    if k is QueryKind.MARGINAL:
        expr = _marginal_expr(spec, query.target_value)
    elif k is QueryKind.CONDITIONAL:
        expr = _conditional_expr(spec, query.target_value)
    elif k is QueryKind.EXPLAINING_AWAY:
        expr = _explaining_away_expr(spec, query.condition_value)
    elif k is QueryKind.BACKDOOR_ADJUSTMENT_SET:
        expr = None
    elif k is QueryKind.ATE:
        expr = _ate_expr(spec)
    elif k is QueryKind.COLLIDER_BIAS:
        expr = Const(0.0)
    elif k is QueryKind.COUNTERFACTUAL:
        expr = _counterfactual_expr(spec, query.counterfactual_value, query.target_value)
    elif k is QueryKind.ATT:
        expr = _att_expr(spec)
    elif k is QueryKind.NDE:
        expr = _nde_expr(spec)
    elif k is QueryKind.NIE:
        expr = _nie_expr(spec)
    else:
        raise CoverageError(f"unknown kind {k!r}")
    return Estimand(graph_id, query, expr, _symbolic_form(query, spec))


# ---------------------------------------------------------------------------
# data extraction and evaluation
# ---------------------------------------------------------------------------


def _walk_leaves(node, env, out):
    if isinstance(node, Term):
        conds = tuple((v, env[x] if isinstance(x, str) else x) for v, x in node.conds)
        out.append(DataTerm(node.var, tuple(sorted(conds))))
    elif isinstance(node, Const):
        pass
    elif isinstance(node, BinOp):
        _walk_leaves(node.left, env, out)
        _walk_leaves(node.right, env, out)
    elif isinstance(node, Sum):
        for v in (1, 0):
            _walk_leaves(node.body, {**env, node.symbol: v}, out)
    else:
        raise TypeError(f"unknown node {node!r}")


def required_data(estimand: Estimand) -> list[DataTerm]:
    """The estimand's leaf probability terms, normalized to value-1 targets,
    deduplicated, in deterministic traversal order."""
    if estimand.expr is None:
        return []
    raw: list[DataTerm] = []
    _walk_leaves(estimand.expr, {}, raw)
    seen = set()
    out = []
    for t in raw:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _eval_node(node, env, lookup):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Term):
        value = env[node.value] if isinstance(node.value, str) else node.value
        conds = tuple(
            sorted((v, env[x] if isinstance(x, str) else x) for v, x in node.conds)
        )
        p1 = lookup(DataTerm(node.var, conds))
        return p1 if value == 1 else 1.0 - p1
    if isinstance(node, BinOp):
        left = _eval_node(node.left, env, lookup)
        right = _eval_node(node.right, env, lookup)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if abs(right) < 1e-12:
            raise DegenerateDistributionError("zero denominator in estimand")
        return left / right
    if isinstance(node, Sum):
        return sum(
            _eval_node(node.body, {**env, node.symbol: v}, lookup) for v in (0, 1)
        )
    raise TypeError(f"unknown node {node!r}")


def _cbn_lookup(estimand: Estimand, cbn: BernoulliCbn):
    spec = GRAPH_BANK[estimand.graph_id]
    if cbn.dag.names != spec.nodes or set(cbn.dag.edges) != {
        (spec.index(a), spec.index(b)) for a, b in spec.edges
    }:
        raise ValueError("network graph does not match the estimand's graph")

    def lookup(term: DataTerm) -> float:
        target = {spec.index(term.var): 1}
        given = {spec.index(v): x for v, x in term.conds}
        return query_prob(cbn, target, given)

    return lookup


def evaluate(estimand: Estimand, cbn: BernoulliCbn) -> float:
    """Exact numeric value of the estimand on the network."""
    if estimand.expr is None:
        spec = GRAPH_BANK[estimand.graph_id]
        ok = check_backdoor_set(
            spec, spec.treatment, spec.outcome, estimand.query.candidate_set
        )
        return 1.0 if ok else 0.0
    return _eval_node(estimand.expr, {}, _cbn_lookup(estimand, cbn))


def evaluate_from_data(estimand: Estimand, data: dict[DataTerm, float]) -> float:
    """Re-evaluate using only the supplied observable terms."""
    if estimand.expr is None:
        raise ValueError("adjustment-set estimands carry no numeric data")
    return _eval_node(estimand.expr, {}, lambda t: data[t])


def data_values(estimand: Estimand, cbn: BernoulliCbn, ndigits: int = 2) -> dict[DataTerm, float]:
    """Exact values of the estimand's required terms, rounded the way they
    are verbalized so question text and ground truth agree."""
    lookup = _cbn_lookup(estimand, cbn)
    return {t: round(lookup(t), ndigits) for t in required_data(estimand)}


def _render_numeric(node, env, data: dict) -> str:
    if isinstance(node, Const):
        return _fmt(node.value)
    if isinstance(node, Term):
        value = env[node.value] if isinstance(node.value, str) else node.value
        conds = tuple(
            sorted((v, env[x] if isinstance(x, str) else x) for v, x in node.conds)
        )
        p1 = data[DataTerm(node.var, conds)]
        return f"{p1:.2f}" if value == 1 else f"(1 - {p1:.2f})"
    if isinstance(node, BinOp):
        left = _render_numeric(node.left, env, data)
        right = _render_numeric(node.right, env, data)
        if node.op in "+-":
            return f"{left} {node.op} {right}"
        if isinstance(node.left, (BinOp, Sum)):
            left = f"[{left}]"
        if isinstance(node.right, (BinOp, Sum)):
            right = f"[{right}]"
        return f"{left}{node.op}{right}"
    if isinstance(node, Sum):
        parts = [
            _render_numeric(node.body, {**env, node.symbol: v}, data) for v in (0, 1)
        ]
        return " + ".join(f"({p})" for p in parts)
    raise TypeError(f"unknown node {node!r}")


def render_numeric(estimand: Estimand, data: dict[DataTerm, float]) -> str:
    """The estimand with the available data substituted in."""
    if estimand.expr is None:
        raise ValueError("adjustment-set estimands carry no numeric data")
    return _render_numeric(estimand.expr, {}, data)


def explaining_away_delta(cbn: BernoulliCbn, z_value: int) -> float:
    """P(Y=1 | X=1, collider=z) - P(Y=1 | collider=z) on the collision graph."""
    spec = GRAPH_BANK["collision"]
    query = Query(QueryKind.EXPLAINING_AWAY, "collision", condition_value=z_value)
    return evaluate(derive_estimand("collision", query), cbn)


def answer(query: Query, value: float) -> str:
    """Map the evaluated estimand to 'yes'/'no' per the query's phrasing.

    Raises AmbiguousValueError when the value sits within EPSILON of the
    decision boundary; collider-bias questions are always 'no' (the effect
    is identically zero by construction).
    """
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError("value must be finite")
    k = query.kind
    if k is QueryKind.COLLIDER_BIAS:
        return "no"
    if k is QueryKind.BACKDOOR_ADJUSTMENT_SET:
        return "yes" if value > 0.5 else "no"
    if k in (QueryKind.MARGINAL, QueryKind.COUNTERFACTUAL):
        # value is the probability of the asked outcome
        if abs(value - 0.5) < EPSILON:
            raise AmbiguousValueError(f"probability {value} too close to 0.5")
        return "yes" if value > 0.5 else "no"
    # sign-valued kinds; the estimand is already signed for the asked target
    if abs(value) < EPSILON:
        raise AmbiguousValueError(f"effect {value} too close to 0")
    signed = -value if query.polarity == "decrease" else value
    return "yes" if signed > 0 else "no"
