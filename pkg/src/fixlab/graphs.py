"""Directed weighted population graphs.

A population structure is a digraph on vertices 0..n-1 with weight
matrix W = [w_ij]. Outgoing weights of every reproducing vertex must
sum to one (row stochastic), an edge exists exactly where its weight
is positive, and self-loops are not allowed. Update kernels read the
incoming side of each vertex; stochastic simulation reads the
outgoing side, so both adjacency directions are indexed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

ROW_SUM_TOL = 1e-9

GENERATOR_KINDS = ("preferential_attachment", "erdos_renyi", "small_world")


def validate(n, edges):
    """Check raw edge data against the model constraints.

    Parameters
    ----------
    n : int
        Number of vertices; ids must lie in 0..n-1.
    edges : iterable of (int, int, float)
        Directed edges (source, target, weight).

    Returns
    -------
    list of str
        Human-readable violations; empty means the data is valid.
    """
    problems = []
    if n < 1:
        problems.append(f"population size must be at least 1, got {n}")
        return problems
    seen = set()
    row_sums = {}
    for src, dst, w in edges:
        if not (0 <= src < n) or not (0 <= dst < n):
            problems.append(f"edge ({src},{dst}) uses a vertex id outside 0..{n - 1}")
            continue
        if src == dst:
            problems.append(f"vertex {src} has a self-loop")
            continue
        if w <= 0:
            problems.append(f"edge ({src},{dst}) has non-positive weight {w}")
            continue
        if (src, dst) in seen:
            problems.append(f"edge ({src},{dst}) appears more than once")
            continue
        seen.add((src, dst))
        row_sums[src] = row_sums.get(src, 0.0) + w
    for src in sorted(row_sums):
        total = row_sums[src]
        if abs(total - 1.0) > ROW_SUM_TOL:
            problems.append(
                f"outgoing weights of vertex {src} sum to {total:.12g}, expected 1"
            )
    return problems


class EvolutionaryGraph:
    """Immutable directed weighted graph with row-stochastic weights.

    Rows are renormalized exactly on ingest when they are within
    ``ROW_SUM_TOL`` of one; anything farther off is rejected. Both
    adjacency directions are stored in CSR-style arrays so kernels and
    samplers can slice neighborhoods without building Python lists.
    """

    __slots__ = (
        "n", "edges",
        "out_ptr", "out_dst", "out_w", "out_cum",
        "in_ptr", "in_src", "in_w",
        "k_in", "k_out", "temperatures",
        "_ops",
    )

    def __init__(self, n, edges):
        edges = [(int(s), int(d), float(w)) for s, d, w in edges]
        problems = validate(n, edges)
        if problems:
            raise ValueError("invalid graph: " + "; ".join(problems))
        self.n = int(n)
        edges.sort(key=lambda e: (e[0], e[1]))

        row_sums = np.zeros(n)
        for s, _, w in edges:
            row_sums[s] += w
        edges = [
            (s, d, w / row_sums[s]) for s, d, w in edges
        ]
        self.edges = tuple(edges)

        m = len(edges)
        src = np.fromiter((e[0] for e in edges), dtype=np.int64, count=m)
        dst = np.fromiter((e[1] for e in edges), dtype=np.int64, count=m)
        wgt = np.fromiter((e[2] for e in edges), dtype=np.float64, count=m)

        self.k_out = np.bincount(src, minlength=n).astype(np.int64)
        self.k_in = np.bincount(dst, minlength=n).astype(np.int64)

        # edges are sorted by source, so the outgoing CSR is direct
        self.out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.k_out, out=self.out_ptr[1:])
        self.out_dst = dst
        self.out_w = wgt
        self.out_cum = np.copy(wgt)
        for v in range(n):
            lo, hi = self.out_ptr[v], self.out_ptr[v + 1]
            np.cumsum(wgt[lo:hi], out=self.out_cum[lo:hi])

        order = np.lexsort((src, dst))
        self.in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.k_in, out=self.in_ptr[1:])
        self.in_src = src[order]
        self.in_w = wgt[order]

        self.temperatures = np.zeros(n)
        np.add.at(self.temperatures, dst, wgt)

        self._ops = {}

    def out_neighbors(self, i):
        """Arrays (targets, weights) of the outgoing edges of vertex i."""
        lo, hi = self.out_ptr[i], self.out_ptr[i + 1]
        return self.out_dst[lo:hi], self.out_w[lo:hi]

    def in_neighbors(self, i):
        """Arrays (sources, weights) of the incoming edges of vertex i."""
        lo, hi = self.in_ptr[i], self.in_ptr[i + 1]
        return self.in_src[lo:hi], self.in_w[lo:hi]

    def incoming_matrix(self, weighted=True):
        """Sparse operator B with B[i, j] = w_ji (or 1) for each edge (j, i)."""
        key = ("in", weighted)
        if key not in self._ops:
            rows = np.repeat(np.arange(self.n), np.diff(self.in_ptr))
            data = self.in_w if weighted else np.ones_like(self.in_w)
            self._ops[key] = csr_matrix(
                (data, (rows, self.in_src)), shape=(self.n, self.n)
            )
        return self._ops[key]

    def to_json(self):
        return {"n": self.n, "edges": [[s, d, w] for s, d, w in self.edges]}

    def __repr__(self):
        return f"EvolutionaryGraph(n={self.n}, edges={len(self.edges)})"


def check_config(graph, config):
    """Normalize a mutant configuration to a frozenset of valid vertex ids."""
    members = frozenset(int(v) for v in config)
    for v in members:
        if not (0 <= v < graph.n):
            raise ValueError(f"configuration vertex {v} outside 0..{graph.n - 1}")
    return members


def is_strongly_connected(graph):
    """True iff every vertex reaches every other along directed edges."""
    if graph.n == 1:
        return True
    adj = csr_matrix(
        (np.ones(len(graph.edges)),
         ([e[0] for e in graph.edges], [e[1] for e in graph.edges])),
        shape=(graph.n, graph.n),
    )
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    return ncomp == 1


def reaches_all(graph, config):
    """True iff every vertex outside the configuration is reachable from it."""
    members = check_config(graph, config)
    if len(members) == graph.n:
        return True
    seen = np.zeros(graph.n, dtype=bool)
    stack = list(members)
    for v in stack:
        seen[v] = True
    while stack:
        v = stack.pop()
        targets, _ = graph.out_neighbors(v)
        for u in targets:
            if not seen[u]:
                seen[u] = True
                stack.append(int(u))
    return bool(seen.all())


@dataclass(frozen=True)
class GraphStats:
    temperatures: np.ndarray
    in_degrees: np.ndarray
    out_degrees: np.ndarray
    is_unweighted: bool
    is_undirected: bool
    is_strongly_connected: bool
    mean_inverse_degree: float | None


def stats(graph):
    """Structural summary: temperatures, degrees, and shape flags.

    The mean inverse degree is defined only for graphs that are both
    undirected (edge set symmetric) and unweighted (each outgoing
    weight equals one over the out-degree); otherwise it is None.
    """
    unweighted = True
    for v in range(graph.n):
        lo, hi = graph.out_ptr[v], graph.out_ptr[v + 1]
        if hi > lo and not np.allclose(graph.out_w[lo:hi], 1.0 / (hi - lo), rtol=0, atol=1e-12):
            unweighted = False
            break
    pairs = {(s, d) for s, d, _ in graph.edges}
    undirected = all((d, s) in pairs for s, d in pairs)
    mean_inv = None
    if unweighted and undirected and (graph.k_out > 0).all():
        mean_inv = float(np.mean(1.0 / graph.k_out))
    return GraphStats(
        temperatures=graph.temperatures.copy(),
        in_degrees=graph.k_in.copy(),
        out_degrees=graph.k_out.copy(),
        is_unweighted=unweighted,
        is_undirected=undirected,
        is_strongly_connected=is_strongly_connected(graph),
        mean_inverse_degree=mean_inv,
    )


def _derived_seed(seed, *key):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _assign_weights(n, undirected_edges, weighting, rng):
    neighbor_sets = [[] for _ in range(n)]
    for u, v in undirected_edges:
        neighbor_sets[u].append(v)
        neighbor_sets[v].append(u)
    edges = []
    for v in range(n):
        targets = sorted(neighbor_sets[v])
        if not targets:
            continue
        if weighting == "unweighted":
            w = np.full(len(targets), 1.0 / len(targets))
        elif weighting == "random":
            # uniform over (0, 1] keeps every weight strictly positive
            w = 1.0 - rng.random(len(targets))
            w /= w.sum()
        else:
            raise ValueError(f"unknown weighting {weighting!r}")
        edges.extend((v, t, float(wi)) for t, wi in zip(targets, w))
    return edges


def generate(kind, n, *, seed, weighting="random", m=1, p=0.5, k=2, retries=100):
    """Build a strongly connected directed graph from an undirected growth model.

    Parameters
    ----------
    kind : str
        One of ``preferential_attachment`` (scale-free growth with ``m``
        edges per new vertex), ``erdos_renyi`` (independent edges with
        probability ``p``), or ``small_world`` (ring of degree ``k``
        plus random shortcuts with probability ``p``; shortcuts are
        added, never rewired).
    n : int
        Number of vertices, at least 2.
    seed : int
        Master seed; the same arguments always produce the same graph.
    weighting : str
        ``unweighted`` sets every outgoing weight to 1/out-degree;
        ``random`` draws each outgoing weight uniformly from (0, 1] and
        normalizes per vertex.

    Every undirected edge of the growth model becomes two directed
    edges, so connectivity of the grown graph gives strong
    connectivity of the result. Disconnected draws are retried with
    derived seeds up to ``retries`` times and then reported.
    """
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    if kind == "preferential_attachment":
        if not (1 <= m < n):
            raise ValueError(f"attachment count m={m} must satisfy 1 <= m < n")
    elif kind == "erdos_renyi":
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"edge probability p={p} must lie in [0, 1]")
    elif kind == "small_world":
        if not (1 <= k < n):
            raise ValueError(f"ring degree k={k} must satisfy 1 <= k < n")
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"shortcut probability p={p} must lie in [0, 1]")
    else:
        raise ValueError(f"unknown generator kind {kind!r}; choose from {GENERATOR_KINDS}")

    for attempt in range(retries):
        grow_seed = _derived_seed(seed, attempt)
        if kind == "preferential_attachment":
            g = nx.barabasi_albert_graph(n, m, seed=grow_seed)
        elif kind == "erdos_renyi":
            g = nx.gnp_random_graph(n, p, seed=grow_seed)
        else:
            g = nx.newman_watts_strogatz_graph(n, k, p, seed=grow_seed)
        if g.number_of_edges() > 0 and nx.is_connected(g):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=int(seed), spawn_key=(attempt, 1))
            )
            edges = _assign_weights(n, sorted(g.edges()), weighting, rng)
            return EvolutionaryGraph(n, edges)
    raise RuntimeError(
        f"{kind} generator produced no connected graph in {retries} attempts "
        f"(n={n}, m={m}, p={p}, k={k})"
    )


@dataclass(frozen=True)
class FeederExperiment:
    graph: EvolutionaryGraph
    feeder_mutant: int
    feeder_resident: int
    target_mutant: int
    target_resident: int


def feeder_pair_graph(core_n, *, seed, p=0.5, relation="equal", retries=100):
    """Random core plus two one-way feeder vertices.

    Builds an undirected unweighted Erdős–Rényi core of ``core_n``
    vertices, then appends vertex ``core_n`` and vertex ``core_n + 1``,
    each with a single outgoing edge (weight 1) into the core and no
    incoming edges. The first feeder is meant to hold a permanent
    mutant and the second a permanent resident, so the overall graph is
    deliberately not strongly connected.

    ``relation`` controls the core degrees of the two attachment
    targets: ``equal``, ``mutant_lower``, or ``mutant_higher``.
    """
    if core_n < 3:
        raise ValueError("core needs at least 3 vertices")
    for attempt in range(retries):
        core = generate(
            "erdos_renyi", core_n,
            seed=_derived_seed(seed, 7, attempt), weighting="unweighted", p=p,
        )
        deg = core.k_out
        order = np.argsort(deg, kind="stable")
        pair = None
        if relation == "equal":
            for a, b in zip(order[:-1], order[1:]):
                if deg[a] == deg[b]:
                    pair = (int(a), int(b))
                    break
        elif relation == "mutant_lower":
            lo, hi = int(order[0]), int(order[-1])
            if deg[lo] < deg[hi]:
                pair = (lo, hi)
        elif relation == "mutant_higher":
            lo, hi = int(order[0]), int(order[-1])
            if deg[lo] < deg[hi]:
                pair = (hi, lo)
        else:
            raise ValueError(f"unknown relation {relation!r}")
        if pair is None:
            continue
        t_mut, t_res = pair
        fm, fr = core_n, core_n + 1
        edges = list(core.edges)
        edges.append((fm, t_mut, 1.0))
        edges.append((fr, t_res, 1.0))
        return FeederExperiment(
            graph=EvolutionaryGraph(core_n + 2, edges),
            feeder_mutant=fm, feeder_resident=fr,
            target_mutant=t_mut, target_resident=t_res,
        )
    raise RuntimeError(f"no attachment pair with relation {relation!r} in {retries} attempts")


def load_graph(path):
    """Read a graph from JSON {"n": ..., "edges": [[i, j, w], ...]} or
    from a plain-text edge list with one "i j w" triple per line (vertex
    count inferred as max id + 1)."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        return EvolutionaryGraph(payload["n"], payload["edges"])
    edges = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{line_no}: expected 'source target weight'")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if not edges:
        raise ValueError(f"{path}: no edges found")
    n = 1 + max(max(s, d) for s, d, _ in edges)
    return EvolutionaryGraph(n, edges)


def save_graph(graph, path):
    with open(path, "w") as fh:
        json.dump(graph.to_json(), fh, indent=1)
        fh.write("\n")
