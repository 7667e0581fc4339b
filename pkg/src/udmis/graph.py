"""Instances: unit-disk lattice graphs, G(n, m) graphs and rewired mixtures.

All geometry is integer arithmetic: the disk radius is given by its square
``r2`` in units of the squared lattice spacing, so (i, j) is an edge iff
``dx*dx + dy*dy <= r2``.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

from .rng import Xoshiro256, derive_seed

FORMAT_VERSION = 1
MAX_RESAMPLE_ATTEMPTS = 1000
BRUTE_FORCE_MAX_N = 34


class InvalidSpecError(ValueError):
    pass


class ConnectivityError(RuntimeError):
    pass


class RewireError(RuntimeError):
    pass


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    L: int
    rho_ppt: int
    r2: int
    seed: int = 0
    occupancy: str = "fixed"  # "fixed": exactly round(rho*L^2) sites; "bernoulli": per-site coin
    connected: bool = True

    def __post_init__(self):
        if self.L < 1:
            raise InvalidSpecError(f"L must be >= 1, got {self.L}")
        if not 1 <= self.rho_ppt <= 1000:
            raise InvalidSpecError(f"rho_ppt must be in [1, 1000], got {self.rho_ppt}")
        if self.r2 < 1:
            raise InvalidSpecError(f"r2 must be >= 1, got {self.r2}")
        if self.occupancy not in ("fixed", "bernoulli"):
            raise InvalidSpecError(f"unknown occupancy {self.occupancy!r}")

    @property
    def rho(self):
        return self.rho_ppt / 1000

    @property
    def n_nodes(self):
        # round-half-even on an exact rational; rho_ppt * L^2 / 1000
        q, r = divmod(self.rho_ppt * self.L * self.L, 1000)
        if 2 * r > 1000 or (2 * r == 1000 and q % 2 == 1):
            q += 1
        return q


@dataclass(frozen=True)
class Census:
    mis_size: int
    d_mis: int
    d_mis_m1: int


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: tuple
    coords: tuple = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge ({i}, {j}) for n={self.n}")
        if any(edges[k] >= edges[k + 1] for k in range(len(edges) - 1)):
            raise ValueError("edges must be strictly lexicographically sorted")
        object.__setattr__(self, "edges", edges)
        if self.coords is not None:
            coords = tuple((int(x), int(y)) for x, y in self.coords)
            if len(coords) != self.n:
                raise ValueError("one coordinate pair per node required")
            object.__setattr__(self, "coords", coords)

    @classmethod
    def from_edges(cls, n, edges, coords=None, meta=None):
        """Build a graph from unordered, possibly duplicated edge pairs."""
        canon = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            canon.add((min(i, j), max(i, j)))
        return cls(n, tuple(sorted(canon)), coords, dict(meta or {}))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.edges, self.coords) == (other.n, other.edges, other.coords)

    def __hash__(self):
        return hash((self.n, self.edges, self.coords))

    @property
    def num_edges(self):
        return len(self.edges)

    @cached_property
    def adjacency(self):
        nbrs = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def adj_masks(self):
        """Neighborhoods as int bitsets (bit j set in masks[i] iff i~j)."""
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def degree(self, v):
        return len(self.adjacency[v])

    def max_degree(self):
        return max((len(a) for a in self.adjacency), default=0)

    def induced(self, nodes):
        """Induced subgraph on ``nodes`` (relabelled in the given order)."""
        nodes = list(nodes)
        index = {v: k for k, v in enumerate(nodes)}
        edges = []
        for i, j in self.edges:
            if i in index and j in index:
                a, b = index[i], index[j]
                edges.append((min(a, b), max(a, b)))
        coords = None if self.coords is None else tuple(self.coords[v] for v in nodes)
        return Graph(len(nodes), tuple(sorted(edges)), coords, {"kind": "induced"})

    def is_connected(self):
        if self.n <= 1:
            return True
        seen = {0}
        stack = [0]
        adj = self.adjacency
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        m = self.meta
        return {
            "format_version": FORMAT_VERSION,
            "kind": m.get("kind", "custom"),
            "L": m.get("L"),
            "rho_ppt": m.get("rho_ppt"),
            "r2": m.get("r2"),
            "seed": m.get("seed"),
            "epsilon_ppt": m.get("epsilon_ppt"),
            "n": self.n,
            "coords": None if self.coords is None else [list(c) for c in self.coords],
            "edges": [list(e) for e in self.edges],
            "meta": {"resample_attempts": m.get("resample_attempts")},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported instance format {d.get('format_version')!r}")
        meta = {k: d.get(k) for k in ("kind", "L", "rho_ppt", "r2", "seed", "epsilon_ppt")}
        meta["resample_attempts"] = (d.get("meta") or {}).get("resample_attempts")
        coords = d.get("coords")
        return cls.from_edges(d["n"], [tuple(e) for e in d["edges"]],
                              None if coords is None else [tuple(c) for c in coords], meta)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json(f.read())


def disk_offsets(r2):
    """Lattice offsets (dx, dy) != (0, 0) with dx^2 + dy^2 <= r2."""
    reach = 0
    while (reach + 1) ** 2 <= r2:
        reach += 1
    return [(dx, dy) for dx in range(-reach, reach + 1) for dy in range(-reach, reach + 1)
            if (dx, dy) != (0, 0) and dx * dx + dy * dy <= r2]


def unit_disk_graph(coords, r2, meta=None):
    """Unit-disk graph on distinct integer points, exact predicate."""
    coords = sorted(tuple(c) for c in coords)
    if len(set(coords)) != len(coords):
        raise ValueError("duplicate coordinates")
    index = {c: k for k, c in enumerate(coords)}
    offsets = [(dx, dy) for dx, dy in disk_offsets(r2) if (dx, dy) > (0, 0)]
    edges = []
    for k, (x, y) in enumerate(coords):
        for dx, dy in offsets:
            j = index.get((x + dx, y + dy))
            if j is not None:
                edges.append((k, j))
    edges.sort()
    return Graph(len(coords), tuple(edges), tuple(coords), dict(meta or {}))


def _place_sites(spec, rng):
    L = spec.L
    if spec.occupancy == "fixed":
        picks = rng.sample(L * L, spec.n_nodes)
    else:
        picks = [s for s in range(L * L) if rng.random() < spec.rho]
    return [(s // L, s % L) for s in picks]


def generate_ud_lattice(spec):
    """Random unit-disk instance on the L x L lattice.

    Nodes are numbered in (x, y) order, so the identity is already the
    sweep order. With ``spec.connected`` the placement is redrawn from
    derived sub-seeds until the graph is a single component.
    """
    if spec.occupancy == "fixed" and spec.n_nodes == 0:
        raise InvalidSpecError(f"rho*L^2 rounds to zero nodes (L={spec.L}, rho_ppt={spec.rho_ppt})")
    attempts = MAX_RESAMPLE_ATTEMPTS if spec.connected else 1
    for attempt in range(attempts):
        rng = Xoshiro256(derive_seed(spec.seed, "placement", attempt))
        sites = _place_sites(spec, rng)
        if not sites:
            continue
        meta = {"kind": "ud_lattice", "L": spec.L, "rho_ppt": spec.rho_ppt, "r2": spec.r2,
                "seed": spec.seed, "epsilon_ppt": None, "resample_attempts": attempt + 1}
        g = unit_disk_graph(sites, spec.r2, meta)
        if not spec.connected or g.is_connected():
            return g
    raise ConnectivityError(f"no connected placement found after {attempts} attempts")


def edge_count_bounds(L, rho):
    """(max edges, expected edges) of a Union-Jack lattice at filling rho."""
    max_edges = max(0, 4 * L * L - 6 * L + 2)
    return max_edges, rho * rho * max_edges


def graph_density(g):
    if g.n < 2:
        raise ValueError("density undefined for fewer than two nodes")
    return 2 * g.num_edges / (g.n * (g.n - 1))


def _pair_from_index(k, n):
    # k-th pair (i, j), i < j, in lexicographic order
    i = 0
    row = n - 1
    while k >= row:
        k -= row
        i += 1
        row -= 1
    return i, i + 1 + k


def generate_er_gnm(n, m, seed):
    """Uniform G(n, m): m distinct pairs drawn without replacement."""
    total = n * (n - 1) // 2
    if n < 0 or not 0 <= m <= total:
        raise InvalidSpecError(f"m={m} out of range for n={n} (max {total})")
    rng = Xoshiro256(derive_seed(seed, "er-gnm"))
    picks = rng.sample(total, m)
    edges = sorted(_pair_from_index(k, n) for k in picks)
    meta = {"kind": "er_gnm", "seed": seed, "resample_attempts": None}
    return Graph(n, tuple(edges), None, meta)


def rewire(g, epsilon, seed):
    """Replace round(epsilon*|E|) random edges by random non-edges.

    Selected edges are processed one at a time in draw order; each
    replacement pair is redrawn until it is neither a self-loop nor an
    edge of the current graph. Node and edge counts are preserved.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    n, m = g.n, g.num_edges
    k = round(epsilon * m)
    meta = dict(g.meta)
    meta.update(kind="rewired", epsilon_ppt=round(epsilon * 1000))
    if k == 0:
        return Graph(n, g.edges, g.coords, meta)
    if m >= n * (n - 1) // 2:
        raise RewireError("graph is complete: no non-edge available for rewiring")
    rng = Xoshiro256(derive_seed(seed, "rewire"))
    current = set(g.edges)
    for idx in rng.sample(m, k):
        old = g.edges[idx]
        while True:
            i = rng.randbelow(n)
            j = rng.randbelow(n)
            if i == j:
                continue
            pair = (min(i, j), max(i, j))
            if pair not in current:
                break
        current.discard(old)
        current.add(pair)
    return Graph(n, tuple(sorted(current)), g.coords, meta)


def validate_independent_set(g, s):
    s = set(s)
    for v in s:
        if not 0 <= v < g.n:
            raise ValueError(f"node {v} out of range for n={g.n}")
    return not any(i in s and j in s for i, j in g.edges)


def _independence_poly(masks, P, memo):
    """Independence polynomial of the subgraph induced by bitset P.

    Returns a list c with c[k] = number of independent sets of size k.
    """
    if P in memo:
        return memo[P]
    best_v, best_d = -1, 0
    Q = P
    while Q:
        low = Q & -Q
        v = low.bit_length() - 1
        Q ^= low
        d = (masks[v] & P).bit_count()
        if d > best_d:
            best_v, best_d = v, d
    if best_d == 0:
        k = P.bit_count()
        poly = [comb(k, j) for j in range(k + 1)]
    else:
        v = best_v
        without = _independence_poly(masks, P & ~(1 << v), memo)
        with_v = _independence_poly(masks, P & ~(masks[v] | (1 << v)), memo)
        poly = list(without) + [0] * max(0, len(with_v) + 1 - len(without))
        for j, c in enumerate(with_v):
            poly[j + 1] += c
    memo[P] = poly
    return poly


def brute_force_census(g):
    """Exact (|MIS|, D_MIS, D_MIS-1) by exhaustive branching.

    Counts all independent sets of the two top sizes, maximal or not.
    """
    if g.n > BRUTE_FORCE_MAX_N:
        raise SizeLimitError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {g.n}")
    poly = _independence_poly(g.adj_masks, (1 << g.n) - 1, {})
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    mis = len(poly) - 1
    return Census(mis, poly[mis], poly[mis - 1] if mis >= 1 else 0)
