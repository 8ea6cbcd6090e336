#!/usr/bin/env python3
"""Generate the bundled stand-in covert-network edgelists.

The original UCINET covert-network files are not redistributed here. Each
stand-in is a simple graph without isolated nodes whose node count, edge count and
triangle count equal the published summary for that network. Graphs are
found by a seeded search: start from a random spanning tree plus random
edges, then move single edges between dyads (never isolating a node) while
the triangle count approaches the target, restarting on stalls.

Usage: python3 scripts/make_standins.py crates/core/data
"""
import itertools
import random
import sys
from pathlib import Path

TARGETS = [
    ("christmas_eve2000", 14, 16, 5),
    ("bali2002", 15, 24, 22),
    ("australian_embassy2004", 10, 15, 8),
    ("bali2005", 9, 15, 11),
    ("hamburg_cell", 12, 23, 23),
    ("london_gang", 50, 85, 46),
]
SEED = 20240101


def triangles(n, adj):
    return sum(
        1
        for u, v, w in itertools.combinations(range(n), 3)
        if v in adj[u] and w in adj[u] and w in adj[v]
    )


def no_isolates(adj):
    return all(adj)


def search(n, m, t, rng):
    adj = [set() for _ in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        adj[u].add(v)
        adj[v].add(u)
    pairs = [(u, v) for u, v in itertools.combinations(range(n), 2)]
    while sum(len(a) for a in adj) // 2 < m:
        u, v = rng.choice(pairs)
        adj[u].add(v)
        adj[v].add(u)
    cur = triangles(n, adj)
    for _ in range(20000):
        if cur == t:
            return adj
        edges = [(u, v) for u, v in pairs if v in adj[u]]
        non = [(u, v) for u, v in pairs if v not in adj[u]]
        a, b = rng.choice(edges)
        c, d = rng.choice(non)
        adj[a].discard(b); adj[b].discard(a)
        adj[c].add(d); adj[d].add(c)
        new = triangles(n, adj)
        if no_isolates(adj) and (
            abs(new - t) <= abs(cur - t) or rng.random() < 0.05
        ):
            cur = new
        else:
            adj[c].discard(d); adj[d].discard(c)
            adj[a].add(b); adj[b].add(a)
    return None


def main(out):
    rng = random.Random(SEED)
    for key, n, m, t in TARGETS:
        adj = None
        while adj is None:
            adj = search(n, m, t, rng)
        width = len(str(n))
        lines = [
            f"# {key}: stand-in graph, {n} nodes, {m} edges, {t} triangles",
            "# generated by scripts/make_standins.py; not the UCINET original",
        ]
        for u, v in itertools.combinations(range(n), 2):
            if v in adj[u]:
                lines.append(f"v{u + 1:0{width}d} v{v + 1:0{width}d}")
        Path(out, f"{key}.edgelist").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data")
