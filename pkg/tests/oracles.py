"""Independent reference computations used by the tests.

Nothing here imports the solvers; only plain Python and the standard library.
"""

import math
from fractions import Fraction
from itertools import combinations


def adjacency_sets(n, edges):
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    return adj


def size_histogram(n, edges):
    """hist[k] = number of independent sets of size k, by plain DFS enumeration."""
    adj = adjacency_sets(n, edges)
    hist = [0] * (n + 1)

    def rec(v, chosen, size):
        if v == n:
            hist[size] += 1
            return
        rec(v + 1, chosen, size)
        if not (adj[v] & chosen):
            chosen.add(v)
            rec(v + 1, chosen, size + 1)
            chosen.discard(v)

    rec(0, set(), 0)
    return hist


def census(n, edges):
    hist = size_histogram(n, edges)
    mis = max(k for k, c in enumerate(hist) if c)
    return mis, hist[mis], hist[mis - 1] if mis >= 1 else 0


def mis_size(n, edges):
    return census(n, edges)[0]


def hardness(mis, d, d1):
    return float(Fraction(d1, mis * d))


def r99(p):
    return math.log(1 - 0.99) / math.log(1 - p)


def unit_disk_edges(coords, r2):
    out = []
    for i, j in combinations(range(len(coords)), 2):
        (x1, y1), (x2, y2) = coords[i], coords[j]
        if (x1 - x2) ** 2 + (y1 - y2) ** 2 <= r2:
            out.append((i, j))
    return out


def fib(k):
    """Fib(1) = Fib(2) = 1."""
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def percentile_inclusive(values, q):
    """Linear interpolation at rank q * (k - 1) of the sorted values."""
    v = sorted(values)
    pos = q * (len(v) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (pos - lo) * (v[hi] - v[lo])


def pearson(x, y):
    mx, my = sum(x) / len(x), sum(y) / len(y)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def xoshiro256ss(state, k):
    """Reference xoshiro256** outputs from a raw 4-word state."""
    M = (1 << 64) - 1
    s = list(state)
    rotl = lambda x, r: ((x << r) | (x >> (64 - r))) & M
    out = []
    for _ in range(k):
        out.append(rotl(s[1] * 5 & M, 7) * 9 & M)
        t = s[1] << 17 & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
    return out
