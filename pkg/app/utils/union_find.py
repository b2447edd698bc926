# https://en.wikipedia.org/wiki/Disjoint-set_data_structure

import collections


class DisjointSet:
    """Union-find over hashable state ids, used to identify states during a merge."""

    def __init__(self):
        self.parent = {}
        self.rank = {}

    def make_set(self, e):
        if e in self.parent:
            return
        self.parent[e] = e
        self.rank[e] = 0

    # find with path compression
    def find(self, e):
        self.make_set(e)
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    # union by rank; returns the surviving representative
    def union(self, x, y):
        x_root = self.find(x)
        y_root = self.find(y)
        if x_root == y_root:
            return x_root
        if self.rank[x_root] < self.rank[y_root]:
            x_root, y_root = y_root, x_root
        self.parent[y_root] = x_root
        if self.rank[x_root] == self.rank[y_root]:
            self.rank[x_root] += 1
        return x_root

    def same(self, x, y):
        return self.find(x) == self.find(y)

    def sets(self):
        groups = collections.defaultdict(set)
        for e in self.parent:
            groups[self.find(e)].add(e)
        return frozenset(frozenset(s) for s in groups.values())
