"""causalgen: generators for two causal-reasoning benchmarks plus the exact
inference engine that grounds them.

Submodules
----------
dags            labeled DAGs, relation queries, non-isomorphic enumeration
independence    d-separation, independence structures, Markov equivalence
corr2cause      correlation-premise / causal-hypothesis dataset generator
cbn             exact inference on Bernoulli causal Bayesian networks
engine          estimand derivation and evaluation across all three rungs
cladder         natural-language causal question generator
cli             command-line entry point
"""

__version__ = "0.1.0"
