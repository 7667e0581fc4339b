"""Exact branch and bound for MIS with incumbent tracing.

The search mirrors the measurement protocol used for commercial MIP
solvers: time to the first optimal incumbent (TTS) is separated from time
to exhaust the tree (TTO), and no primal heuristics run unless explicitly
enabled. Sets are Python ints used as bitsets.
"""

import time
from dataclasses import dataclass, field

from .graph import validate_independent_set

CLOCKS = {"wall": time.perf_counter, "process": time.process_time}


@dataclass
class BnbConfig:
    time_limit: float = None
    target: int = None
    disable_rounding_heuristics: bool = True
    branch_rule: str = "max-degree"
    # in-node reductions; isolated/pendant are always on, domination can be
    # switched off to study the bare clique-cover search
    domination: bool = True
    clock: str = "wall"

    def __post_init__(self):
        if self.branch_rule != "max-degree":
            raise ValueError(f"unsupported branch rule {self.branch_rule!r}")
        if self.clock not in CLOCKS:
            raise ValueError(f"clock must be one of {sorted(CLOCKS)}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class BnbResult:
    mis_size: int
    witness: frozenset
    tto: float
    tts: float
    incumbents: list = field(default_factory=list)
    nodes_explored: int = 0
    status: str = "optimal"
    wall_time: float = 0.0
    process_time: float = 0.0
    clock: str = "wall"

    def to_dict(self):
        return {
            "mis_size": self.mis_size,
            "witness": sorted(self.witness),
            "tts_s": self.tts,
            "tto_s": self.tto,
            "incumbents": [{"time_s": t, "size": s} for t, s in self.incumbents],
            "nodes_explored": self.nodes_explored,
            "status": self.status,
            "wall_time_s": self.wall_time,
            "process_time_s": self.process_time,
            "clock": self.clock,
        }


@dataclass
class Reduction:
    residual: object
    kept: tuple  # original ids of residual nodes, residual id k -> kept[k]
    forced_in: frozenset
    offset: int


def _iter_bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _reduce_mask(masks, P):
    """Isolated / pendant rules to a fixpoint on the subgraph induced by P."""
    forced = []
    changed = True
    while changed:
        changed = False
        for v in _iter_bits(P):
            if not (P >> v) & 1:
                continue
            nb = masks[v] & P
            if nb == 0:
                forced.append(v)
                P &= ~(1 << v)
                changed = True
            elif nb & (nb - 1) == 0:
                forced.append(v)
                P &= ~(nb | (1 << v))
                changed = True
    return P, forced


def reduce(g):
    """Apply the isolated-vertex and pendant-vertex rules until none fires.

    MIS(g) = offset + MIS(residual).
    """
    P, forced = _reduce_mask(g.adj_masks, (1 << g.n) - 1)
    kept = tuple(_iter_bits(P))
    return Reduction(g.induced(kept), kept, frozenset(forced), len(forced))


def _cover_count(masks, P):
    k = 0
    while P:
        low = P & -P
        v = low.bit_length() - 1
        P ^= low
        cand = masks[v] & P
        while cand:
            lu = cand & -cand
            P ^= lu
            cand &= masks[lu.bit_length() - 1]
        k += 1
    return k


def clique_cover_bound(g, free=None):
    """Number of cliques in a greedy clique partition of ``free``.

    Each clique is seeded with the lowest uncovered id and grown by the
    lowest-id uncovered vertex adjacent to every member so far. Any
    independent set meets each clique at most once, so the count bounds
    MIS from above.
    """
    if free is None:
        P = (1 << g.n) - 1
    else:
        P = 0
        for v in free:
            if not 0 <= v < g.n:
                raise ValueError(f"node {v} out of range")
            P |= 1 << v
    return _cover_count(g.adj_masks, P)


class _Timeout(Exception):
    pass


class _TargetReached(Exception):
    pass


def _greedy_mask(masks, P):
    """Min-degree greedy independent set (only used as a warm start)."""
    chosen = []
    while P:
        v = min(_iter_bits(P), key=lambda u: ((masks[u] & P).bit_count(), u))
        chosen.append(v)
        P &= ~(masks[v] | (1 << v))
    return chosen


def bnb_solve(g, cfg=None):
    """Depth-first branch and bound.

    At every node: isolated and pendant vertices are taken, dominated
    vertices (u adjacent to v with N[v] a subset of N[u]) are dropped, then
    the node is pruned if current + clique cover <= incumbent. Otherwise it
    branches on a maximum-degree vertex (lowest id on ties), include branch
    first.
    """
    cfg = cfg or BnbConfig()
    clock = CLOCKS[cfg.clock]
    w0, p0 = time.perf_counter(), time.process_time()
    t0 = clock()
    masks = g.adj_masks
    deadline = None if cfg.time_limit is None else t0 + cfg.time_limit

    best = {"size": -1, "chain": None}
    incumbents = []
    nodes = 0
    tts = None

    def offer(size, chain):
        nonlocal tts
        if size > best["size"]:
            now = clock() - t0
            best["size"], best["chain"] = size, chain
            incumbents.append((now, size))
            if cfg.target is not None and size >= cfg.target:
                tts = now
                raise _TargetReached

    root = (1 << g.n) - 1
    status = "optimal"
    try:
        P, forced = _reduce_mask(masks, root)
        chain = None
        for v in forced:
            chain = (v, chain)
        base = len(forced)
        if not cfg.disable_rounding_heuristics:
            warm = chain
            for v in _greedy_mask(masks, P):
                warm = (v, warm)
            offer(base + len(_greedy_mask(masks, P)), warm)
        stack = [(P, base, chain)]
        while stack:
            P, cur, chain = stack.pop()
            nodes += 1
            if deadline is not None and clock() > deadline:
                raise _Timeout
            changed = True
            while changed:
                changed = False
                for v in _iter_bits(P):
                    if not (P >> v) & 1:
                        continue
                    bit = 1 << v
                    nb = masks[v] & P
                    if nb == 0:
                        cur += 1
                        chain = (v, chain)
                        P ^= bit
                        changed = True
                    elif nb & (nb - 1) == 0:
                        cur += 1
                        chain = (v, chain)
                        P &= ~(nb | bit)
                        changed = True
                    elif cfg.domination:
                        closed = nb | bit
                        for u in _iter_bits(nb):
                            ubit = 1 << u
                            if closed & ~(masks[u] & P | ubit) == 0:
                                P ^= ubit
                                closed ^= ubit
                                changed = True
            offer(cur, chain)
            if not P:
                continue
            if cur + _cover_count(masks, P) <= best["size"]:
                continue
            bv, bd = -1, -1
            for v in _iter_bits(P):
                d = (masks[v] & P).bit_count()
                if d > bd:
                    bv, bd = v, d
            # pushed last -> explored first
            stack.append((P & ~(1 << bv), cur, chain))
            stack.append((P & ~(masks[bv] | (1 << bv)), cur + 1, (bv, chain)))
        tto = clock() - t0
    except _TargetReached:
        status = "target-reached"
        tto = None
    except _Timeout:
        status = "timeout"
        tto = None

    witness = set()
    ref = best["chain"]
    while ref is not None:
        witness.add(ref[0])
        ref = ref[1]
    size = max(best["size"], 0)
    if status == "optimal":
        # the last incumbent is optimal; its timestamp is the time to solution
        tts = incumbents[-1][0] if incumbents else 0.0
    if len(witness) != size or not validate_independent_set(g, witness):
        raise AssertionError("incumbent is not a valid independent set")
    return BnbResult(size, frozenset(witness), tto, tts, incumbents, nodes, status,
                     time.perf_counter() - w0, time.process_time() - p0, cfg.clock)


def export_ilp(g):
    """MIS integer program in CPLEX LP format: max sum x_i, x_i + x_j <= 1."""
    lines = ["\\ maximum independent set", "Maximize"]
    terms = " + ".join(f"x{i}" for i in range(g.n))
    lines.append(f" obj: {terms}" if terms else " obj: 0")
    lines.append("Subject To")
    for k, (i, j) in enumerate(g.edges):
        lines.append(f" e{k}: x{i} + x{j} <= 1")
    lines.append("Binary")
    for start in range(0, g.n, 16):
        lines.append(" " + " ".join(f"x{i}" for i in range(start, min(g.n, start + 16))))
    lines.append("End")
    return "\n".join(lines) + "\n"
