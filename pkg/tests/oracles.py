"""Independent reference implementations used only by the tests.

Each oracle takes the slow, obvious route (explicit graphs, full
enumeration, closed-form queueing) so it shares no code path with the
package under test.
"""
from __future__ import annotations

import itertools


def gop_references(n: int, m: int) -> dict[int, list[int]]:
    """Display position -> reference positions for one closed GOP."""
    types = ["I" if p == 0 else ("P" if p % m == 0 else "B") for p in range(n)]
    refs_at = [p for p, t in enumerate(types) if t != "B"]
    deps: dict[int, list[int]] = {}
    for p, t in enumerate(types):
        if t == "I":
            deps[p] = []
        elif t == "P":
            deps[p] = [max(r for r in refs_at if r < p)]
        else:
            before = [r for r in refs_at if r < p]
            after = [r for r in refs_at if r > p]
            deps[p] = [max(before)] + ([min(after)] if after else [])
    return deps


def brute_force_decodable(received: list[bool], n: int, m: int) -> list[bool]:
    """Decodable iff received and every frame reachable through references is."""
    deps = gop_references(n, m)

    def closure(p, seen):
        for d in deps[p]:
            if d not in seen:
                seen.add(d)
                closure(d, seen)
        return seen

    return [received[p] and all(received[d] for d in closure(p, set())) for p in range(n)]


def mann_whitney_enumeration(n: int, m: int) -> list[int]:
    """Null counts of U over every assignment of ranks to the first sample."""
    counts = [0] * (n * m + 1)
    for picked in itertools.combinations(range(n + m), n):
        chosen = set(picked)
        u = sum(1 for i in picked for j in range(n + m) if j not in chosen and j < i)
        counts[u] += 1
    return counts


def hodges_lehmann_enumeration(c, r) -> float:
    diffs = []
    for x in c:
        for y in r:
            diffs.append(x - y)
    diffs.sort()
    k = len(diffs)
    if k % 2:
        return diffs[k // 2]
    return (diffs[k // 2 - 1] + diffs[k // 2]) / 2


def md1_wait(rho: float, service: float) -> float:
    """Mean waiting time in queue of M/D/1 (Pollaczek-Khinchine)."""
    return rho * service / (2 * (1 - rho))


def welch_oracle(c, r):
    """Welch t (for difference c - r) and its df, from scipy."""
    from scipy import stats
    res = stats.ttest_ind(c, r, equal_var=False)
    return float(res.statistic), float(res.df)
