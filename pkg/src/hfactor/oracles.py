"""Independent reference implementations used to cross-check the fast paths.

Everything here is deliberately naive: permutation scans and direct
partition enumeration, sharing no code with the exact-cover solver or
the profile enumerator. Intended for small instances in tests and for
the acceptance harness.
"""

from __future__ import annotations

from itertools import combinations, permutations

from .graphs import Graph


def hosts_pattern(h: Graph, g: Graph, verts: tuple[int, ...]) -> bool:
    """True iff the host set carries h under some vertex bijection (permutation scan)."""
    if len(verts) != h.n:
        return False
    pattern_edges = [(u, v) for u in range(h.n) for v in range(u + 1, h.n) if (h.adj[u] >> v) & 1]
    for perm in permutations(verts):
        if all((g.adj[perm[u]] >> perm[v]) & 1 for u, v in pattern_edges):
            return True
    return False


def brute_force_perfect_packing(h: Graph, g: Graph) -> bool:
    """Decide a perfect packing by enumerating all block partitions of V(G)."""
    if g.n % h.n:
        return False

    def extend(remaining: tuple[int, ...]) -> bool:
        if not remaining:
            return True
        v, rest = remaining[0], remaining[1:]
        for others in combinations(rest, h.n - 1):
            block = (v,) + others
            if hosts_pattern(h, g, block):
                leftover = tuple(x for x in rest if x not in others)
                if extend(leftover):
                    return True
        return False

    return extend(tuple(range(g.n)))


def brute_force_max_packing(h: Graph, g: Graph) -> int:
    """Maximum number of disjoint copies, by exhaustive block selection."""
    hosting = [
        verts for verts in combinations(range(g.n), h.n) if hosts_pattern(h, g, verts)
    ]

    def extend(used: int, start: int) -> int:
        best = 0
        for i in range(start, len(hosting)):
            mask = 0
            for v in hosting[i]:
                mask |= 1 << v
            if mask & used:
                continue
            best = max(best, 1 + extend(used | mask, i + 1))
        return best

    return extend(0, 0)


def brute_force_copy_sets(h: Graph, g: Graph) -> set[tuple[int, ...]]:
    """All hosting vertex sets, by raw subset scan."""
    return {
        verts for verts in combinations(range(g.n), h.n) if hosts_pattern(h, g, verts)
    }
