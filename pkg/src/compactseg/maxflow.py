"""Exact minimisation of submodular binary pairwise energies by min-cut.

The max-flow solver follows Boykov & Kolmogorov's dual search-tree
augmenting-path scheme (growth, augmentation, adoption with the
timestamp/distance heuristic), compiled with numba.

Label convention: ``y_i = 1`` iff node ``i`` lies on the source side of
the minimum cut, i.e. is reachable from the source in the final residual
graph. Nodes reachable from neither terminal get 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .errors import InputError
from .grid import WeightedGraph

_TERMINAL = -1
_FREE = -2
_ORPHAN = -3
_INF_DIST = 1 << 60


@numba.njit(cache=True)
def _grow_push(queue, in_queue, state, node):
    # state: [head, count]
    if in_queue[node]:
        return
    n = queue.shape[0]
    queue[(state[0] + state[1]) % n] = node
    state[1] += 1
    in_queue[node] = True


@numba.njit(cache=True)
def _orphan_push_front(orphans, ostate, node):
    n = orphans.shape[0]
    ostate[0] = (ostate[0] - 1) % n
    orphans[ostate[0]] = node
    ostate[1] += 1


@numba.njit(cache=True)
def _orphan_push_back(orphans, ostate, node):
    n = orphans.shape[0]
    orphans[(ostate[0] + ostate[1]) % n] = node
    ostate[1] += 1


@numba.njit(cache=True)
def _bk_maxflow(first, head, sister, rcap, tr_cap):
    """Run max-flow in place on residual capacities; returns (flow, source_side)."""
    n = tr_cap.shape[0]
    parent = np.full(n, _FREE, np.int64)
    is_sink = np.zeros(n, np.bool_)
    ts = np.zeros(n, np.int64)
    dist = np.zeros(n, np.int64)
    queue = np.empty(max(n, 1), np.int64)
    in_queue = np.zeros(n, np.bool_)
    qstate = np.zeros(2, np.int64)
    orphans = np.empty(max(n, 1), np.int64)
    ostate = np.zeros(2, np.int64)

    for i in range(n):
        if tr_cap[i] > 0:
            parent[i] = _TERMINAL
            dist[i] = 1
            _grow_push(queue, in_queue, qstate, i)
        elif tr_cap[i] < 0:
            parent[i] = _TERMINAL
            is_sink[i] = True
            dist[i] = 1
            _grow_push(queue, in_queue, qstate, i)

    flow = 0.0
    time = 0
    current = -1
    while True:
        i = current
        if i != -1 and parent[i] == _FREE:
            i = -1
        if i == -1:
            while qstate[1] > 0:
                i = queue[qstate[0]]
                qstate[0] = (qstate[0] + 1) % n
                qstate[1] -= 1
                in_queue[i] = False
                if parent[i] != _FREE:
                    break
                i = -1
            if i == -1:
                break

        # growth
        middle = -1
        if not is_sink[i]:
            for a in range(first[i], first[i + 1]):
                if rcap[a] > 0:
                    j = head[a]
                    if parent[j] == _FREE:
                        is_sink[j] = False
                        parent[j] = sister[a]
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        _grow_push(queue, in_queue, qstate, j)
                    elif is_sink[j]:
                        middle = a
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = sister[a]
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
        else:
            for a in range(first[i], first[i + 1]):
                if rcap[sister[a]] > 0:
                    j = head[a]
                    if parent[j] == _FREE:
                        is_sink[j] = True
                        parent[j] = sister[a]
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        _grow_push(queue, in_queue, qstate, j)
                    elif not is_sink[j]:
                        middle = sister[a]
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = sister[a]
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1

        time += 1
        if middle == -1:
            current = -1
            continue
        current = i

        # augmentation along source tree -> middle arc -> sink tree
        bottleneck = rcap[middle]
        k = head[sister[middle]]
        while parent[k] != _TERMINAL:
            pa = parent[k]
            if rcap[sister[pa]] < bottleneck:
                bottleneck = rcap[sister[pa]]
            k = head[pa]
        if tr_cap[k] < bottleneck:
            bottleneck = tr_cap[k]
        k = head[middle]
        while parent[k] != _TERMINAL:
            pa = parent[k]
            if rcap[pa] < bottleneck:
                bottleneck = rcap[pa]
            k = head[pa]
        if -tr_cap[k] < bottleneck:
            bottleneck = -tr_cap[k]

        rcap[sister[middle]] += bottleneck
        rcap[middle] -= bottleneck
        k = head[sister[middle]]
        while parent[k] != _TERMINAL:
            pa = parent[k]
            rcap[pa] += bottleneck
            rcap[sister[pa]] -= bottleneck
            nxt = head[pa]
            if rcap[sister[pa]] <= 0:
                rcap[sister[pa]] = 0.0
                parent[k] = _ORPHAN
                _orphan_push_front(orphans, ostate, k)
            k = nxt
        tr_cap[k] -= bottleneck
        if tr_cap[k] <= 0:
            tr_cap[k] = 0.0
            parent[k] = _ORPHAN
            _orphan_push_front(orphans, ostate, k)
        k = head[middle]
        while parent[k] != _TERMINAL:
            pa = parent[k]
            rcap[sister[pa]] += bottleneck
            rcap[pa] -= bottleneck
            nxt = head[pa]
            if rcap[pa] <= 0:
                rcap[pa] = 0.0
                parent[k] = _ORPHAN
                _orphan_push_front(orphans, ostate, k)
            k = nxt
        tr_cap[k] += bottleneck
        if tr_cap[k] >= 0:
            tr_cap[k] = 0.0
            parent[k] = _ORPHAN
            _orphan_push_front(orphans, ostate, k)
        flow += bottleneck

        # adoption
        while ostate[1] > 0:
            o = orphans[ostate[0]]
            ostate[0] = (ostate[0] + 1) % n
            ostate[1] -= 1
            sink_side = is_sink[o]
            d_min = _INF_DIST
            a_min = -1
            for a0 in range(first[o], first[o + 1]):
                usable = rcap[a0] > 0 if sink_side else rcap[sister[a0]] > 0
                if not usable:
                    continue
                j = head[a0]
                if is_sink[j] != sink_side or parent[j] == _FREE:
                    continue
                # trace j back to a terminal
                d = 0
                while True:
                    if ts[j] == time:
                        d += dist[j]
                        break
                    a = parent[j]
                    d += 1
                    if a == _TERMINAL:
                        ts[j] = time
                        dist[j] = 1
                        break
                    if a == _ORPHAN:
                        d = _INF_DIST
                        break
                    j = head[a]
                if d < _INF_DIST:
                    if d < d_min:
                        a_min = a0
                        d_min = d
                    j = head[a0]
                    while ts[j] != time:
                        ts[j] = time
                        dist[j] = d
                        d -= 1
                        j = head[parent[j]]
            if a_min != -1:
                parent[o] = a_min
                ts[o] = time
                dist[o] = d_min + 1
                continue
            parent[o] = _FREE
            for a0 in range(first[o], first[o + 1]):
                j = head[a0]
                if is_sink[j] != sink_side or parent[j] == _FREE:
                    continue
                usable = rcap[a0] > 0 if sink_side else rcap[sister[a0]] > 0
                if usable:
                    _grow_push(queue, in_queue, qstate, j)
                a = parent[j]
                if a != _TERMINAL and a != _ORPHAN and head[a] == o:
                    parent[j] = _ORPHAN
                    _orphan_push_back(orphans, ostate, j)

    source_side = np.zeros(n, np.uint8)
    for i in range(n):
        if parent[i] != _FREE and not is_sink[i]:
            source_side[i] = 1
    return flow, source_side


@dataclass(frozen=True, eq=False)
class FlowTopology:
    """Arc layout of a lattice graph: CSR adjacency with paired reverse arcs."""

    first: np.ndarray
    head: np.ndarray
    sister: np.ndarray
    edge_of_arc: np.ndarray


@lru_cache(maxsize=16)
def _topology(graph: WeightedGraph) -> FlowTopology:
    m = graph.n_edges
    n = graph.domain.size
    tail = np.empty(2 * m, np.int64)
    head = np.empty(2 * m, np.int64)
    tail[0::2], head[0::2] = graph.i, graph.j
    tail[1::2], head[1::2] = graph.j, graph.i
    order = np.argsort(tail, kind="stable")
    pos = np.empty(2 * m, np.int64)
    pos[order] = np.arange(2 * m)
    raw_sister = np.arange(2 * m) ^ 1
    sister = pos[raw_sister[order]]
    first = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(tail, minlength=n), out=first[1:])
    return FlowTopology(first, head[order], sister, order // 2)


@dataclass(frozen=True)
class PairwiseProblem:
    """``sum_i theta_i y_i + pair_weight * sum_edges w_ij |y_i - y_j|``."""

    theta: np.ndarray
    pair_weight: float
    graph: WeightedGraph

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        self.graph.domain.check_vector(theta, "theta")
        if not np.all(np.isfinite(theta)):
            raise InputError("theta must be finite")
        if not (np.isfinite(self.pair_weight) and self.pair_weight >= 0):
            raise InputError(f"pair_weight must be finite and >= 0, got {self.pair_weight}")
        object.__setattr__(self, "theta", theta)

    def value(self, y) -> float:
        y = np.asarray(y, dtype=np.float64)
        g = self.graph
        return float(
            np.dot(self.theta, y) + self.pair_weight * np.dot(g.w, np.abs(y[g.i] - y[g.j]))
        )


@dataclass(frozen=True)
class CutResult:
    labels: np.ndarray
    value: float
    flow: float


def min_cut(problem: PairwiseProblem) -> CutResult:
    """Global minimiser of a submodular pairwise problem.

    ``value`` is the energy of the returned labeling; ``flow`` is the
    max-flow value plus the constant ``sum_i min(theta_i, 0)``, which must
    agree with ``value`` up to rounding.
    """
    topo = _topology(problem.graph)
    theta = problem.theta
    rcap = problem.pair_weight * problem.graph.w[topo.edge_of_arc]
    tr_cap = -theta.copy()
    flow, labels = _bk_maxflow(topo.first, topo.head, topo.sister, rcap, tr_cap)
    offset = float(np.minimum(theta, 0.0).sum())
    return CutResult(labels=labels, value=problem.value(labels), flow=flow + offset)


def y_update(u, q, gamma: float, mu1: float, graph: WeightedGraph) -> np.ndarray:
    """Binary labeling minimising ``u.y + gamma y^T L y + mu1/2 ||y - q||^2``.

    Uses ``y_i**2 = y_i`` to fold the proximal term into the unaries
    ``theta_i = u_i + mu1 * (1/2 - q_i)``.
    """
    if gamma < 0:
        raise InputError(f"gamma must be >= 0, got {gamma}")
    if not mu1 > 0:
        raise InputError(f"mu1 must be > 0, got {mu1}")
    u = np.asarray(u, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    theta = u + mu1 * (0.5 - q)
    return min_cut(PairwiseProblem(theta, float(gamma), graph)).labels
