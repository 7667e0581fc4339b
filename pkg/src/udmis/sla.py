"""Exact sweeping-line dynamic program for MIS on quasi-planar graphs.

Nodes are processed one at a time in sweep order. A *variant* summarizes
all partial assignments of the processed nodes that look the same to the
rest of the sweep. Two partial assignments look the same when they block
the same set of unprocessed nodes (a node is blocked when one of its
processed neighbours is selected), so each variant is keyed by that
blocked set. Every unprocessed node adjacent to the processed region owns
a bit ("slot") in the key while it waits to be swept.

Keying on the blocked set is the projection of the boundary assignment
onto what later steps can observe: two boundary assignments that block
the same nodes have identical completions, so merging them is exact both
for the maximum size and for the number of configurations.

Two modes:

``size``
    Tracks the best size per variant plus a back reference for witness
    reconstruction, and discards variants dominated by a subset key with
    at least the same size (every completion of the larger blocked set is
    also a completion of the smaller one).
``census``
    Tracks, per variant, the best size and the exact numbers of
    configurations of size best and best-1. No subset pruning. Variants
    with equal keys merge as follows: equal best adds both counts; a best
    that is lower by one contributes its best-count to best-1; lower by
    two or more contributes nothing. This is exact for the global top two
    sizes: if a configuration of global size |MIS|-1 had a prefix two
    below its variant's best, swapping in the best prefix would give a
    configuration of size |MIS|+1.
"""

import heapq
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import Census, validate_independent_set

# Above this many variants, subset dominance only looks for a dominator that
# differs by one blocked node; below it the check is exhaustive.
FULL_DOMINANCE_MAX = 256

# Census counts are checked against this before every addition; past it the
# solve restarts on the arbitrary-precision path.
_COUNT_LIMIT = 1 << 61

MODES = ("size", "census")


class RequiresCoordinatesError(ValueError):
    pass


class SlaBudgetError(MemoryError):
    def __init__(self, variants_peak, budget):
        super().__init__(f"variant budget {budget} exceeded (variants_peak={variants_peak})")
        self.variants_peak = variants_peak
        self.budget = budget


def fib_bound(L):
    """Fib(L + 1) with Fib(1) = Fib(2) = 1."""
    if L < 1:
        raise ValueError("L must be >= 1")
    a, b = 1, 1
    for _ in range(L):
        a, b = b, a + b
    return a


def sweep_order(g, axes="xy"):
    """Nodes sorted by (x, y); ``axes="yx"`` sweeps the other direction."""
    if g.coords is None:
        raise RequiresCoordinatesError("sweep order needs lattice coordinates; pass an explicit order")
    if axes == "xy":
        return sorted(range(g.n), key=lambda v: (g.coords[v], v))
    if axes == "yx":
        return sorted(range(g.n), key=lambda v: (g.coords[v][1], g.coords[v][0], v))
    raise ValueError(f"unknown axes {axes!r}")


def _check_order(g, order):
    order = [int(v) for v in order]
    if sorted(order) != list(range(g.n)):
        raise ValueError("order must be a permutation of the nodes")
    return order


@dataclass(frozen=True)
class FrontierPlan:
    """Per-step bit masks of a sweep.

    ``node_bits[t]`` is the slot bit of the node swept at step t (0 if no
    processed neighbour ever touched it) and ``neighbor_masks[t]`` the bits
    of its unprocessed neighbours. ``width`` is the number of slots used.
    """
    order: tuple
    node_bits: tuple
    neighbor_masks: tuple
    width: int


def frontier_plan(g, order):
    order = _check_order(g, order)
    rank = [0] * g.n
    for t, v in enumerate(order):
        rank[v] = t
    adj = g.adjacency
    slot = {}
    free = []
    next_slot = 0
    node_bits, neighbor_masks = [], []
    for t, v in enumerate(order):
        nm = 0
        for u in adj[v]:
            if rank[u] > t:
                if u not in slot:
                    if free:
                        slot[u] = heapq.heappop(free)
                    else:
                        slot[u] = next_slot
                        next_slot += 1
                nm |= 1 << slot[u]
        # v's own slot is released only after its neighbours got theirs
        if v in slot:
            s = slot.pop(v)
            node_bits.append(1 << s)
            heapq.heappush(free, s)
        else:
            node_bits.append(0)
        neighbor_masks.append(nm)
    return FrontierPlan(tuple(order), tuple(node_bits), tuple(neighbor_masks), next_slot)


# -- reference implementation ---------------------------------------------------


@dataclass
class VariantStats:
    best: int
    count_best: int = 1
    count_best_m1: int = 0
    # size mode: persistent chain (node, parent_chain) of selected nodes
    back_ref: tuple = None


@dataclass
class SweepState:
    graph: object
    order: tuple
    mode: str
    processed_count: int
    slots: dict
    free_slots: list
    next_slot: int
    variants: dict
    variants_peak: int
    rank: tuple = field(repr=False, default=None)

    @classmethod
    def start(cls, g, mode="size", order=None):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        order = tuple(_check_order(g, sweep_order(g) if order is None else order))
        rank = [0] * g.n
        for t, v in enumerate(order):
            rank[v] = t
        return cls(g, order, mode, 0, {}, [], 0, {0: VariantStats(0)}, 1, tuple(rank))

    @property
    def boundary(self):
        """Processed nodes that still have an unprocessed neighbour."""
        t = self.processed_count
        adj = self.graph.adjacency
        return [v for v in self.order[:t] if any(self.rank[u] >= t for u in adj[v])]

    @property
    def frontier(self):
        """Unprocessed nodes adjacent to the processed region, with slots."""
        return dict(self.slots)

    def done(self):
        return self.processed_count == len(self.order)


def _merge_census(old, best, cb, cm1):
    if best > old.best:
        m1 = cm1 + old.count_best if best == old.best + 1 else cm1
        old.best, old.count_best, old.count_best_m1 = best, cb, m1
    elif best == old.best:
        old.count_best += cb
        old.count_best_m1 += cm1
    elif best == old.best - 1:
        old.count_best_m1 += cb


def _dominated(keys, bests):
    """Indices of variants dominated by a strict-subset key of no smaller best."""
    m = len(keys)
    out = set()
    if m <= FULL_DOMINANCE_MAX:
        for i in range(m):
            ki, bi = keys[i], bests[i]
            for j in range(m):
                kj = keys[j]
                if j != i and bests[j] >= bi and kj & ~ki == 0 and kj != ki:
                    out.add(i)
                    break
    else:
        where = {k: j for j, k in enumerate(keys)}
        for i in range(m):
            ki = keys[i]
            rest = ki
            while rest:
                low = rest & -rest
                rest ^= low
                j = where.get(ki ^ low)
                if j is not None and bests[j] >= bests[i]:
                    out.add(i)
                    break
    return out


def advance(state, node):
    """Sweep one node: branch every variant on x_node, then merge and prune."""
    t = state.processed_count
    if t >= len(state.order) or state.order[t] != node:
        raise ValueError(f"node {node} is not next in sweep order")
    slots = dict(state.slots)
    free = list(state.free_slots)
    next_slot = state.next_slot
    nm = 0
    for u in state.graph.adjacency[node]:
        if state.rank[u] > t:
            if u not in slots:
                if free:
                    slots[u] = heapq.heappop(free)
                else:
                    slots[u] = next_slot
                    next_slot += 1
            nm |= 1 << slots[u]
    vb = 0
    if node in slots:
        s = slots.pop(node)
        vb = 1 << s
        heapq.heappush(free, s)

    census = state.mode == "census"
    new = {}
    for key, st in state.variants.items():
        children = [(key & ~vb, st.best, st.back_ref)]
        if not key & vb:
            children.append(((key | nm) & ~vb, st.best + 1, (node, st.back_ref)))
        for ck, cb, ref in children:
            old = new.get(ck)
            if census:
                if old is None:
                    new[ck] = VariantStats(cb, st.count_best, st.count_best_m1)
                else:
                    _merge_census(old, cb, st.count_best, st.count_best_m1)
            elif old is None or cb > old.best:
                new[ck] = VariantStats(cb, back_ref=ref)

    if not census and len(new) > 1:
        keys = list(new)
        dead = _dominated(keys, [new[k].best for k in keys])
        for i in dead:
            del new[keys[i]]

    return SweepState(state.graph, state.order, state.mode, t + 1, slots, free, next_slot,
                      new, max(state.variants_peak, len(new)), state.rank)


def _chain_nodes(ref):
    out = []
    while ref is not None:
        out.append(ref[0])
        ref = ref[1]
    return out


# -- numba kernels ----------------------------------------------------------------

_HASH_MULT = np.uint64(0x9E3779B97F4A7C15)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True)
def _hash(key, shift):
    return np.int64((key * _HASH_MULT) >> shift)


@njit(cache=True)
def _table_size(m):
    cap = 8
    log = 3
    while cap < 2 * m:
        cap *= 2
        log += 1
    return cap, np.uint64(64 - log)


@njit(cache=True)
def _sweep_size_kernel(node_bits, neighbor_masks, full_dom_max, max_variants, keep_history):
    n = node_bits.shape[0]
    keys = np.zeros(1, np.uint64)
    best = np.zeros(1, np.int64)
    hist_parent = np.empty(1024 if keep_history else 1, np.int32)
    hist_took = np.empty(1024 if keep_history else 1, np.uint8)
    offsets = np.zeros(n + 1, np.int64)
    hist_len = 0
    peak = 1
    for t in range(n):
        vb = node_bits[t]
        nm = neighbor_masks[t]
        V = keys.shape[0]
        cap, shift = _table_size(2 * V)
        tab = np.full(cap, -1, np.int64)
        ck = np.empty(2 * V, np.uint64)
        cb = np.empty(2 * V, np.int64)
        cpar = np.empty(2 * V, np.int32)
        ctook = np.empty(2 * V, np.uint8)
        m = 0
        for i in range(V):
            k = keys[i]
            for x in range(2):
                if x == 0:
                    nk = k & ~vb
                    nb = best[i]
                else:
                    if (k & vb) != _ZERO:
                        break
                    nk = (k | nm) & ~vb
                    nb = best[i] + 1
                h = _hash(nk, shift)
                while True:
                    j = tab[h]
                    if j == -1:
                        tab[h] = m
                        ck[m] = nk
                        cb[m] = nb
                        cpar[m] = i
                        ctook[m] = x
                        m += 1
                        break
                    if ck[j] == nk:
                        if nb > cb[j]:
                            cb[j] = nb
                            cpar[j] = i
                            ctook[j] = x
                        break
                    h = (h + 1) & (cap - 1)

        alive = np.ones(m, np.bool_)
        if m <= full_dom_max:
            for i in range(m):
                ki = ck[i]
                for j in range(m):
                    kj = ck[j]
                    if j != i and cb[j] >= cb[i] and (kj & ~ki) == _ZERO and kj != ki:
                        alive[i] = False
                        break
        else:
            for i in range(m):
                ki = ck[i]
                rest = ki
                while rest != _ZERO:
                    low = rest & (~rest + _ONE)
                    rest ^= low
                    q = ki ^ low
                    h = _hash(q, shift)
                    found = -1
                    while True:
                        j = tab[h]
                        if j == -1:
                            break
                        if ck[j] == q:
                            found = j
                            break
                        h = (h + 1) & (cap - 1)
                    if found >= 0 and cb[found] >= cb[i]:
                        alive[i] = False
                        break

        survivors = 0
        for i in range(m):
            if alive[i]:
                survivors += 1
        keys = np.empty(survivors, np.uint64)
        best = np.empty(survivors, np.int64)
        if keep_history and hist_len + survivors > hist_parent.shape[0]:
            size = hist_parent.shape[0]
            while size < hist_len + survivors:
                size *= 2
            grown_p = np.empty(size, np.int32)
            grown_p[:hist_len] = hist_parent[:hist_len]
            grown_t = np.empty(size, np.uint8)
            grown_t[:hist_len] = hist_took[:hist_len]
            hist_parent = grown_p
            hist_took = grown_t
        s = 0
        for i in range(m):
            if alive[i]:
                keys[s] = ck[i]
                best[s] = cb[i]
                if keep_history:
                    hist_parent[hist_len + s] = cpar[i]
                    hist_took[hist_len + s] = ctook[i]
                s += 1
        if keep_history:
            hist_len += survivors
        offsets[t + 1] = hist_len
        if survivors > peak:
            peak = survivors
        if max_variants > 0 and survivors > max_variants:
            return -1, peak, hist_parent[:hist_len], hist_took[:hist_len], offsets
    result = best[0] if n > 0 else 0
    return result, peak, hist_parent[:hist_len], hist_took[:hist_len], offsets


@njit(cache=True)
def _sweep_census_kernel(node_bits, neighbor_masks, max_variants):
    """Returns (status, best, count, count_m1, peak); status 1 = overflow, 2 = budget."""
    n = node_bits.shape[0]
    keys = np.zeros(1, np.uint64)
    best = np.zeros(1, np.int64)
    cnt = np.ones(1, np.int64)
    cm1 = np.zeros(1, np.int64)
    peak = 1
    limit = np.int64(_COUNT_LIMIT)
    for t in range(n):
        vb = node_bits[t]
        nm = neighbor_masks[t]
        V = keys.shape[0]
        cap, shift = _table_size(2 * V)
        tab = np.full(cap, -1, np.int64)
        ck = np.empty(2 * V, np.uint64)
        cb = np.empty(2 * V, np.int64)
        cc = np.empty(2 * V, np.int64)
        c1 = np.empty(2 * V, np.int64)
        m = 0
        for i in range(V):
            k = keys[i]
            for x in range(2):
                if x == 0:
                    nk = k & ~vb
                    nb = best[i]
                else:
                    if (k & vb) != _ZERO:
                        break
                    nk = (k | nm) & ~vb
                    nb = best[i] + 1
                h = _hash(nk, shift)
                while True:
                    j = tab[h]
                    if j == -1:
                        tab[h] = m
                        ck[m] = nk
                        cb[m] = nb
                        cc[m] = cnt[i]
                        c1[m] = cm1[i]
                        m += 1
                        break
                    if ck[j] == nk:
                        if nb > cb[j]:
                            if nb == cb[j] + 1:
                                if cm1[i] > limit - cc[j]:
                                    return 1, 0, 0, 0, peak
                                c1[j] = cm1[i] + cc[j]
                            else:
                                c1[j] = cm1[i]
                            cb[j] = nb
                            cc[j] = cnt[i]
                        elif nb == cb[j]:
                            if cc[j] > limit - cnt[i] or c1[j] > limit - cm1[i]:
                                return 1, 0, 0, 0, peak
                            cc[j] += cnt[i]
                            c1[j] += cm1[i]
                        elif nb == cb[j] - 1:
                            if c1[j] > limit - cnt[i]:
                                return 1, 0, 0, 0, peak
                            c1[j] += cnt[i]
                        break
                    h = (h + 1) & (cap - 1)
        keys = ck[:m].copy()
        best = cb[:m].copy()
        cnt = cc[:m].copy()
        cm1 = c1[:m].copy()
        if m > peak:
            peak = m
        if max_variants > 0 and m > max_variants:
            return 2, 0, 0, 0, peak
    return 0, best[0], cnt[0], cm1[0], peak


# -- driver -------------------------------------------------------------------------


@dataclass
class SlaResult:
    census: Census  # in size mode d_mis / d_mis_m1 are None
    witness: frozenset  # None in census mode or when not requested
    variants_peak: int
    steps: int
    wall_time: float
    mode: str = "size"

    @property
    def mis_size(self):
        return self.census.mis_size

    def to_dict(self):
        c = self.census
        return {
            "mis_size": c.mis_size,
            "d_mis": None if c.d_mis is None else str(c.d_mis),
            "d_mis_m1": None if c.d_mis_m1 is None else str(c.d_mis_m1),
            "witness": None if self.witness is None else sorted(self.witness),
            "variants_peak": self.variants_peak,
            "steps": self.steps,
            "wall_time_s": self.wall_time,
        }


def _solve_reference(g, mode, order, max_variants):
    state = SweepState.start(g, mode, order)
    for v in state.order:
        state = advance(state, v)
        if max_variants and len(state.variants) > max_variants:
            raise SlaBudgetError(state.variants_peak, max_variants)
    (final,) = state.variants.values()
    return final, state.variants_peak


_compiled = False


def warmup():
    """Compile (or load from cache) the kernels so the first timed solve is clean."""
    global _compiled
    if _compiled:
        return
    bits = np.array([1, 2], dtype=np.uint64)
    masks = np.array([2, 1], dtype=np.uint64)
    _sweep_size_kernel(bits, masks, FULL_DOMINANCE_MAX, 0, True)
    _sweep_census_kernel(bits, masks, 0)
    _compiled = True


def sla_solve(g, mode="size", order=None, *, witness=True, max_variants=None, engine="auto"):
    """Solve MIS exactly by sweeping.

    ``mode="size"`` returns |MIS| and (with ``witness``) one maximum set;
    ``mode="census"`` returns |MIS|, D_MIS and D_MIS-1 with no witness.
    ``order`` defaults to the (x, y) sweep and is required for graphs
    without coordinates. ``max_variants`` bounds the variant table.
    ``engine`` is "auto", "numba" or "python".
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if engine != "python":
        warmup()
    t0 = time.perf_counter()
    if order is None:
        order = sweep_order(g)
    plan = frontier_plan(g, order)
    use_numba = engine == "numba" or (engine == "auto" and plan.width <= 64)
    if engine == "numba" and plan.width > 64:
        raise ValueError(f"frontier width {plan.width} exceeds the 64-bit kernel")
    budget = max_variants or 0

    chosen = None
    if mode == "size":
        if use_numba:
            bits = np.array(plan.node_bits, dtype=np.uint64)
            masks = np.array(plan.neighbor_masks, dtype=np.uint64)
            mis, peak, parent, took, offsets = _sweep_size_kernel(
                bits, masks, FULL_DOMINANCE_MAX, budget, witness)
            if mis < 0:
                raise SlaBudgetError(int(peak), max_variants)
            mis, peak = int(mis), int(peak)
            if witness:
                chosen = set()
                idx = 0
                for t in range(g.n - 1, -1, -1):
                    pos = offsets[t] + idx
                    if took[pos]:
                        chosen.add(plan.order[t])
                    idx = parent[pos]
        else:
            final, peak = _solve_reference(g, "size", plan.order, budget)
            mis = final.best
            if witness:
                chosen = set(_chain_nodes(final.back_ref))
        census = Census(mis, None, None)
    else:
        status = 1
        if use_numba:
            bits = np.array(plan.node_bits, dtype=np.uint64)
            masks = np.array(plan.neighbor_masks, dtype=np.uint64)
            status, mis, cnt, cm1, peak = _sweep_census_kernel(bits, masks, budget)
            if status == 2:
                raise SlaBudgetError(int(peak), max_variants)
        if status == 0:
            census = Census(int(mis), int(cnt), int(cm1))
            peak = int(peak)
        else:
            final, peak = _solve_reference(g, "census", plan.order, budget)
            census = Census(final.best, final.count_best, final.count_best_m1)

    if chosen is not None:
        if len(chosen) != census.mis_size or not validate_independent_set(g, chosen):
            raise AssertionError("reconstructed witness is not a maximum independent set")
        chosen = frozenset(chosen)
    return SlaResult(census, chosen, peak, g.n, time.perf_counter() - t0, mode)
