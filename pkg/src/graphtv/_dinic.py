"""Dinic max-flow kernels over a reusable paired-arc structure.

Two interchangeable backends run the same algorithm:

* a pure-Python implementation on arbitrary-precision integers, and
* a numba int64 kernel used when a certified bound shows every
  intermediate value fits comfortably in int64.

Arcs come in pairs (reverse of arc a is a ^ 1).  Both backends return
the same flow value and the same canonical minimal source-side cut
(residual reachability from the source), which is unique across all
maximum flows, so the backend choice never changes results.
"""

from __future__ import annotations

import os
from collections import deque

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


# int64 kernel is certified safe when max(2*max_cap, source_out) stays below
INT64_SAFE_BOUND = 1 << 62


class ArcStructure:
    """Fixed arc topology reused across capacity assignments.

    Parameters
    ----------
    n_nodes : int
        Node count including source and sink.
    tails, heads : int64 arrays of length 2k
        Paired arcs; arc a runs tails[a] -> heads[a], reverse is a ^ 1.
    source, sink : int
    """

    def __init__(self, n_nodes: int, tails, heads, source: int, sink: int):
        if source == sink:
            raise ValueError("source and sink must differ")
        self.n_nodes = int(n_nodes)
        self.tails = np.asarray(tails, dtype=np.int64)
        self.heads = np.asarray(heads, dtype=np.int64)
        if len(self.tails) != len(self.heads) or len(self.tails) % 2:
            raise ValueError("arcs must come in pairs")
        self.source = int(source)
        self.sink = int(sink)
        counts = np.bincount(self.tails, minlength=self.n_nodes)
        self.adj_start = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=self.adj_start[1:])
        self.adj_arc = np.argsort(self.tails, kind="stable").astype(np.int64)

    def run(self, caps, bound: int):
        """Max-flow for one capacity assignment.

        Parameters
        ----------
        caps : list of int or int64 ndarray
            Nonnegative capacities per arc slot.
        bound : int
            Certified upper bound on max(2 * max capacity, total
            capacity leaving the source); decides the backend.

        Returns
        -------
        flow : int
        reach : bool ndarray of length n_nodes
            Canonical minimal source-side set.
        """
        forced = os.environ.get("GRAPHTV_FLOW_BACKEND", "")
        use_numba = HAVE_NUMBA and bound < INT64_SAFE_BOUND
        if forced == "python":
            use_numba = False
        elif forced == "numba":
            if not (HAVE_NUMBA and bound < INT64_SAFE_BOUND):
                raise RuntimeError("numba backend forced but not certified safe")
            use_numba = True
        if use_numba:
            caps64 = (
                caps.astype(np.int64, copy=True)
                if isinstance(caps, np.ndarray)
                else np.asarray(caps, dtype=np.int64)
            )
            flow, reach = _dinic_numba(
                self.n_nodes,
                self.adj_start,
                self.adj_arc,
                self.heads,
                caps64,
                self.source,
                self.sink,
            )
            return int(flow), reach.astype(bool)
        caps_list = caps.tolist() if isinstance(caps, np.ndarray) else list(caps)
        return _dinic_python(
            self.n_nodes,
            self.adj_start,
            self.adj_arc,
            self.heads,
            caps_list,
            self.source,
            self.sink,
        )


def _dinic_python(n, adj_start, adj_arc, arc_to, caps, s, t):
    """Blocking-flow Dinic on Python integers; mutates ``caps``."""
    adj_start = adj_start.tolist()
    adj_arc = adj_arc.tolist()
    arc_to = arc_to.tolist()
    flow = 0
    while True:
        level = [-1] * n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            nxt = level[u] + 1
            for p in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[p]
                if caps[a] > 0:
                    v = arc_to[a]
                    if level[v] < 0:
                        level[v] = nxt
                        queue.append(v)
        if level[t] < 0:
            break
        ptr = adj_start[:n]
        path: list[int] = []
        u = s
        while True:
            if u == t:
                aug = min(caps[a] for a in path)
                flow += aug
                retreat = 0
                for a in path:
                    caps[a] -= aug
                    caps[a ^ 1] += aug
                for i, a in enumerate(path):
                    if caps[a] == 0:
                        retreat = i
                        break
                u = arc_to[path[retreat] ^ 1]
                del path[retreat:]
                continue
            pu = ptr[u]
            end = adj_start[u + 1]
            lu = level[u] + 1
            a = -1
            while pu < end:
                a = adj_arc[pu]
                if caps[a] > 0 and level[arc_to[a]] == lu:
                    break
                pu += 1
            ptr[u] = pu
            if pu < end:
                path.append(a)
                u = arc_to[a]
            else:
                if u == s:
                    break
                level[u] = -2
                back = path.pop()
                u = arc_to[back ^ 1]
                ptr[u] += 1
    reach = np.zeros(n, dtype=bool)
    reach[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for p in range(adj_start[u], adj_start[u + 1]):
            a = adj_arc[p]
            if caps[a] > 0:
                v = arc_to[a]
                if not reach[v]:
                    reach[v] = True
                    queue.append(v)
    return flow, reach


@njit(cache=True, nogil=True)
def _dinic_numba(n, adj_start, adj_arc, arc_to, caps, s, t):  # pragma: no cover
    flow = np.int64(0)
    level = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    ptr = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    while True:
        level[:] = -1
        level[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            nxt = level[u] + 1
            for p in range(adj_start[u], adj_start[u + 1]):
                a = adj_arc[p]
                if caps[a] > 0:
                    v = arc_to[a]
                    if level[v] < 0:
                        level[v] = nxt
                        queue[tail] = v
                        tail += 1
        if level[t] < 0:
            break
        for i in range(n):
            ptr[i] = adj_start[i]
        depth = 0
        u = s
        while True:
            if u == t:
                aug = caps[path[0]]
                for i in range(1, depth):
                    c = caps[path[i]]
                    if c < aug:
                        aug = c
                flow += aug
                retreat = 0
                for i in range(depth):
                    a = path[i]
                    caps[a] -= aug
                    caps[a ^ 1] += aug
                for i in range(depth):
                    if caps[path[i]] == 0:
                        retreat = i
                        break
                u = arc_to[path[retreat] ^ 1]
                depth = retreat
                continue
            pu = ptr[u]
            end = adj_start[u + 1]
            lu = level[u] + 1
            a = np.int64(-1)
            while pu < end:
                a = adj_arc[pu]
                if caps[a] > 0 and level[arc_to[a]] == lu:
                    break
                pu += 1
            ptr[u] = pu
            if pu < end:
                path[depth] = a
                depth += 1
                u = arc_to[a]
            else:
                if u == s:
                    break
                level[u] = -2
                depth -= 1
                back = path[depth]
                u = arc_to[back ^ 1]
                ptr[u] += 1
    reach = np.zeros(n, dtype=np.uint8)
    reach[s] = 1
    queue[0] = s
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for p in range(adj_start[u], adj_start[u + 1]):
            a = adj_arc[p]
            if caps[a] > 0:
                v = arc_to[a]
                if reach[v] == 0:
                    reach[v] = 1
                    queue[tail] = v
                    tail += 1
    return flow, reach
