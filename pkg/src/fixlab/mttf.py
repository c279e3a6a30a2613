"""Mean time to fixation: an iterative lower bound plus exact reference.

The probability that fixation has already happened by step t never
exceeds the smallest vertex probability at step t. Charging each step
its increment of that minimum therefore undercounts the true expected
fixation time, and dividing the accumulated sum by the final average
vertex probability (the best fixation estimate at termination) yields
a lower bound on the conditional mean. Under the birth-death kernel
the minimum never decreases, so truncating the sum early still leaves
a valid bound.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dynamics import Rule, init_vector, step_values
from .graphs import check_config, is_strongly_connected
from .oracle import build_chain, mean_times_exact
from .solver import NotStronglyConnected

STOP_STDEV = 2.5e-6


@dataclass(frozen=True)
class MttfReport:
    lower_bound: float
    partial_sum: float
    normalizer: float
    iterations: int
    truncated: bool
    negative_increments: int
    trace: "MttfTrace | None" = None


@dataclass(frozen=True)
class MttfTrace:
    t: np.ndarray
    p_min: np.ndarray
    increment: np.ndarray
    running_sum: np.ndarray

    def write_csv(self, target):
        close = False
        if isinstance(target, (str, bytes)):
            fh = open(target, "w", newline="")
            close = True
        else:
            fh = target
        try:
            writer = csv.writer(fh)
            writer.writerow(["t", "P_min", "increment", "running_sum"])
            for k in range(len(self.t)):
                writer.writerow([
                    int(self.t[k]), repr(float(self.p_min[k])),
                    repr(float(self.increment[k])), repr(float(self.running_sum[k])),
                ])
        finally:
            if close:
                fh.close()


def mttf_lower_bound(
    graph, config, rule=Rule.BD,
    stop_stdev=STOP_STDEV, max_iters=10_000_000, record=False,
):
    """Accumulate t * (increment of the vector minimum) until consensus.

    Stops when the standard deviation of the vertex probabilities falls
    to ``stop_stdev``; the bound is the accumulated sum divided by the
    average vertex probability at that point. Hitting ``max_iters``
    sets ``truncated`` (the partial value is still a valid bound for
    the birth-death kernel). For death-birth and link dynamics the
    minimum is not guaranteed monotone; any negative increments are
    counted in the report instead of being silently absorbed.
    """
    members = check_config(graph, config)
    if not members:
        raise ValueError("empty configuration never fixates; no time to bound")
    if len(members) == graph.n:
        return MttfReport(0.0, 0.0, 1.0, 0, False, 0,
                          trace=_empty_trace() if record else None)
    if not is_strongly_connected(graph):
        raise NotStronglyConnected("mean time to fixation")

    p = init_vector(graph, members).values
    total = 0.0
    t = 0
    negatives = 0
    rows = [] if record else None
    while float(np.std(p)) > stop_stdev and t < max_iters:
        q = p
        p = step_values(graph, rule, q)
        t += 1
        inc = t * float(p.min() - q.min())
        if inc < 0:
            negatives += 1
        total += inc
        if record:
            rows.append((t, float(p.min()), inc, total))
    truncated = float(np.std(p)) > stop_stdev
    normalizer = float(np.mean(p))
    bound = total / normalizer if normalizer > 0 else 0.0
    trace = None
    if record:
        arr = np.array(rows, dtype=float) if rows else np.zeros((0, 4))
        trace = MttfTrace(
            t=arr[:, 0].astype(np.int64), p_min=arr[:, 1],
            increment=arr[:, 2], running_sum=arr[:, 3],
        )
    return MttfReport(
        lower_bound=bound, partial_sum=total, normalizer=normalizer,
        iterations=t, truncated=truncated, negative_increments=negatives,
        trace=trace,
    )


def _empty_trace():
    z = np.zeros(0)
    return MttfTrace(t=z.astype(np.int64), p_min=z, increment=z, running_sum=z)


def mttf_exact(graph, config, rule=Rule.BD, r=1.0, cap=16):
    """Exact conditional mean times from the full configuration chain."""
    chain = build_chain(graph, rule=rule, r=r, cap=cap)
    return mean_times_exact(chain, config)
