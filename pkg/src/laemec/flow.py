"""Minimum-cost maximum-flow on small graphs.

Successive shortest augmenting paths with Johnson potentials; arc costs
must be nonnegative (integers recommended for exact arithmetic).
"""

import heapq

INF = float("inf")


class MinCostMaxFlow:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.to = []
        self.cap = []
        self.cost = []
        self.head = [[] for _ in range(n_nodes)]

    def add_edge(self, u: int, v: int, cap: int, cost) -> int:
        """Add arc u->v; returns a handle usable with flow_on()."""
        if cost < 0:
            raise ValueError("arc costs must be nonnegative")
        handle = len(self.to)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.head[u].append(handle)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        self.head[v].append(handle + 1)
        return handle

    def flow_on(self, handle: int) -> int:
        """Flow currently routed through the arc with this handle."""
        return self.cap[handle ^ 1]

    def max_flow(self, source: int, sink: int):
        """Push the maximum flow at minimum cost; returns (flow, cost)."""
        flow = 0
        total_cost = 0
        potential = [0] * self.n
        while True:
            dist = [INF] * self.n
            dist[source] = 0
            parent_arc = [-1] * self.n
            heap = [(0, source)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for h in self.head[u]:
                    if self.cap[h] <= 0:
                        continue
                    v = self.to[h]
                    nd = d + self.cost[h] + potential[u] - potential[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent_arc[v] = h
                        heapq.heappush(heap, (nd, v))
            if dist[sink] == INF:
                return flow, total_cost
            for v in range(self.n):
                if dist[v] < INF:
                    potential[v] += dist[v]
            bottleneck = INF
            v = sink
            while v != source:
                h = parent_arc[v]
                bottleneck = min(bottleneck, self.cap[h])
                v = self.to[h ^ 1]
            v = sink
            while v != source:
                h = parent_arc[v]
                self.cap[h] -= bottleneck
                self.cap[h ^ 1] += bottleneck
                total_cost += bottleneck * self.cost[h]
                v = self.to[h ^ 1]
            flow += bottleneck
