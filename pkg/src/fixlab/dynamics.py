"""One-step update kernels for per-vertex mutant probabilities.

Each kernel is a linear row-stochastic map applied synchronously: the
whole next vector is computed from the whole previous vector. Constant
vectors are fixed points, convex combinations are preserved, and under
the birth-death kernel the running minimum never decreases while the
running maximum never increases.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix, identity

from .graphs import check_config


class Rule(enum.Enum):
    """Update rules: who is drawn first and where fitness enters.

    BD picks the reproducing vertex first, DB picks the dying vertex
    first, LD picks an edge. The -B / -D suffix marks whether fitness
    biases the birth draw or the death draw; the plain names are the
    neutral (fitness 1) kernels. LD has a single biased form because
    biasing either draw yields the same process.
    """

    BD = "bd"
    DB = "db"
    LD = "ld"
    BD_B = "bd-b"
    BD_D = "bd-d"
    DB_B = "db-b"
    DB_D = "db-d"

    def __str__(self):
        return self.value


NEUTRAL_RULES = (Rule.BD, Rule.DB, Rule.LD)
BIASED_RULES = (Rule.BD_B, Rule.BD_D, Rule.DB_B, Rule.DB_D, Rule.LD)

_NEUTRAL_OF = {
    Rule.BD: Rule.BD, Rule.DB: Rule.DB, Rule.LD: Rule.LD,
    Rule.BD_B: Rule.BD, Rule.BD_D: Rule.BD,
    Rule.DB_B: Rule.DB, Rule.DB_D: Rule.DB,
}


def parse_rule(name):
    try:
        return Rule(str(name).lower())
    except ValueError:
        raise ValueError(
            f"unknown rule {name!r}; choose from "
            + ", ".join(r.value for r in Rule)
        ) from None


def neutral_part(rule):
    """The neutral kernel a biased rule collapses to at fitness 1."""
    if not isinstance(rule, Rule):
        rule = parse_rule(rule)
    return _NEUTRAL_OF[rule]


@dataclass(frozen=True)
class ProbabilityVector:
    """Per-vertex mutant probabilities after t update steps."""

    values: np.ndarray
    t: int = 0


def init_vector(graph, config):
    """Indicator vector of the initial mutant set, at step 0."""
    members = check_config(graph, config)
    values = np.zeros(graph.n)
    for v in members:
        values[v] = 1.0
    return ProbabilityVector(values=values, t=0)


def kernel_matrix(graph, rule):
    """The sparse row-stochastic operator of one update step."""
    rule = neutral_part(rule)
    key = ("kernel", rule)
    if key in graph._ops:
        return graph._ops[key]
    n = graph.n
    if rule is Rule.BD:
        win = graph.incoming_matrix(weighted=True)
        op = identity(n, format="csr") + (win - _diag(graph.temperatures)) / n
    elif rule is Rule.DB:
        if (graph.k_in == 0).any():
            missing = np.flatnonzero(graph.k_in == 0).tolist()
            raise ValueError(
                f"death-birth step undefined: vertices {missing} have no incoming edges"
            )
        uin = graph.incoming_matrix(weighted=False)
        scale = 1.0 / (n * graph.k_in)
        op = _diag(np.full(n, 1.0 - 1.0 / n)) + _scale_rows(uin, scale)
    elif rule is Rule.LD:
        m = len(graph.edges)
        if m == 0:
            raise ValueError("link-dynamics step undefined on an edgeless graph")
        uin = graph.incoming_matrix(weighted=False)
        op = _diag(1.0 - graph.k_in / m) + uin / m
    else:  # pragma: no cover
        raise ValueError(f"no deterministic kernel for {rule}")
    op = op.tocsr()
    graph._ops[key] = op
    return op


def _diag(values):
    n = len(values)
    return csr_matrix((np.asarray(values, dtype=float), (np.arange(n), np.arange(n))), shape=(n, n))


def _scale_rows(m, scale):
    return _diag(scale) @ m


def step_values(graph, rule, values):
    """Fast path: one update step on a raw array, returning a new array."""
    out = kernel_matrix(graph, rule) @ values
    np.clip(out, 0.0, 1.0, out=out)
    return out


def _step(graph, rule, pv):
    if len(pv.values) != graph.n:
        raise ValueError(f"vector length {len(pv.values)} != population size {graph.n}")
    return ProbabilityVector(values=step_values(graph, rule, pv.values), t=pv.t + 1)


def step_bd(graph, pv):
    """Birth-death step: mass flows along incoming edges at rate w/N."""
    return _step(graph, Rule.BD, pv)


def step_db(graph, pv):
    """Death-birth step: each vertex keeps its value with weight 1 - 1/N
    and otherwise averages its incoming neighbors uniformly. Requires
    every vertex to have at least one incoming edge."""
    return _step(graph, Rule.DB, pv)


def step_ld(graph, pv):
    """Link-dynamics step: every directed edge fires with equal weight."""
    return _step(graph, Rule.LD, pv)


def step(graph, rule, pv):
    return _step(graph, rule, pv)


def expected_mutants(pv):
    """Expected mutant count: the sum of the vector's entries."""
    values = pv.values if isinstance(pv, ProbabilityVector) else pv
    return float(np.sum(values))


def expected_mutants_step_residual(graph, prev, nxt):
    """Consistency residual of the birth-death mutant-count recurrence.

    For one birth-death step, the next expected count must equal
    Ex + Ex/N - (1/N) * sum_i T_i * P_i evaluated on the previous
    vector, where T is the vertex temperature. Holds to float rounding
    (about 1e-12 * N) on any graph where every vertex has at least one
    outgoing edge; strong connectivity is not needed.
    """
    p = prev.values if isinstance(prev, ProbabilityVector) else np.asarray(prev, dtype=float)
    q = nxt.values if isinstance(nxt, ProbabilityVector) else np.asarray(nxt, dtype=float)
    ex = float(np.sum(p))
    predicted = ex + ex / graph.n - float(graph.temperatures @ p) / graph.n
    return abs(float(np.sum(q)) - predicted)
