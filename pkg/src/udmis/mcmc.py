"""Simulated annealing and parallel tempering in the space of independent sets.

The sampler never leaves the feasible region. Three move classes are kept as
explicit lists so that proposals cost O(1) to draw:

* add: a node with no selected neighbour (``free``)
* swap: a node with exactly one selected neighbour (``one_nb``) replaces it
* remove: a selected node (``in_set``)

Nodes with two or more selected neighbours sit in a fourth, ``blocked`` list.
Accepting a move touches only the neighbourhoods of the one or two nodes that
change. All kernels run under numba and draw from a xoshiro256** stream that
is bit-identical to :class:`udmis.rng.Xoshiro256`.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import validate_independent_set
from .rng import Xoshiro256, derive_seed, xoshiro_state

BLOCKED, IN_SET, FREE, ONE_NB = 0, 1, 2, 3
ADD, SWAP, REMOVE = 0, 1, 2


class InvalidStateError(ValueError):
    pass


# ---------------------------------------------------------------- generator

@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def _random(s):
    return float(_next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _randbelow(s, n):
    if n <= 1:
        return np.int64(0)
    bits = 0
    m = n - 1
    while m > 0:
        bits += 1
        m >>= 1
    shift = np.uint64(64 - bits)
    while True:
        r = np.int64(_next_u64(s) >> shift)
        if r < n:
            return r


@njit(cache=True)
def _draw_u64(s, k):
    out = np.empty(k, dtype=np.uint64)
    for i in range(k):
        out[i] = _next_u64(s)
    return out


def _state_array(seed):
    return np.array(xoshiro_state(seed), dtype=np.uint64)


# ---------------------------------------------------------------- tables

@njit(cache=True)
def _move(cls, pos, members, sizes, v, newc):
    oldc = cls[v]
    if oldc == newc:
        return
    p = pos[v]
    last = members[oldc, sizes[oldc] - 1]
    members[oldc, p] = last
    pos[last] = p
    sizes[oldc] -= 1
    members[newc, sizes[newc]] = v
    pos[v] = sizes[newc]
    sizes[newc] += 1
    cls[v] = newc


@njit(cache=True)
def _reclass(cls, pos, members, sizes, cnt, u):
    if cls[u] == IN_SET:
        return
    c = cnt[u]
    if c == 0:
        _move(cls, pos, members, sizes, u, FREE)
    elif c == 1:
        _move(cls, pos, members, sizes, u, ONE_NB)
    else:
        _move(cls, pos, members, sizes, u, BLOCKED)


@njit(cache=True)
def _select(indptr, indices, cls, pos, members, sizes, cnt, nbsum, v):
    _move(cls, pos, members, sizes, v, IN_SET)
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        cnt[u] += 1
        nbsum[u] += v
        _reclass(cls, pos, members, sizes, cnt, u)


@njit(cache=True)
def _deselect(indptr, indices, cls, pos, members, sizes, cnt, nbsum, v):
    # a selected node has no selected neighbour, so it becomes free
    _move(cls, pos, members, sizes, v, FREE)
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        cnt[u] -= 1
        nbsum[u] -= v
        _reclass(cls, pos, members, sizes, cnt, u)


@njit(cache=True)
def _reset(n, cls, pos, members, sizes, cnt, nbsum):
    sizes[:] = 0
    for v in range(n):
        cls[v] = FREE
        pos[v] = v
        members[FREE, v] = v
        cnt[v] = 0
        nbsum[v] = 0
    sizes[FREE] = n


@njit(cache=True)
def _step(indptr, indices, cls, pos, members, sizes, cnt, nbsum, s, T, w_add, w_swap, w_remove):
    """One proposal. Returns (move kind, delta, accepted)."""
    wa = w_add if sizes[FREE] > 0 else 0.0
    ws = w_swap if sizes[ONE_NB] > 0 else 0.0
    wr = w_remove if sizes[IN_SET] > 0 else 0.0
    total = wa + ws + wr
    if total <= 0.0:
        return -1, 0, False
    r = _random(s) * total
    if r < wa:
        kind = ADD
    elif r < wa + ws:
        kind = SWAP
    else:
        kind = REMOVE
    if kind == ADD:
        v = members[FREE, _randbelow(s, sizes[FREE])]
        _select(indptr, indices, cls, pos, members, sizes, cnt, nbsum, v)
        return kind, 1, True
    if kind == SWAP:
        v = members[ONE_NB, _randbelow(s, sizes[ONE_NB])]
        u = nbsum[v]
        _deselect(indptr, indices, cls, pos, members, sizes, cnt, nbsum, u)
        _select(indptr, indices, cls, pos, members, sizes, cnt, nbsum, v)
        return kind, 0, True
    v = members[IN_SET, _randbelow(s, sizes[IN_SET])]
    if _random(s) < math.exp(-1.0 / T):
        _deselect(indptr, indices, cls, pos, members, sizes, cnt, nbsum, v)
        return kind, -1, True
    return kind, -1, False


@njit(cache=True)
def _anneal(indptr, indices, n, s, t_start, ratio, steps, w_add, w_swap, w_remove, best_set):
    """One annealing run from the empty set; best set copied into best_set."""
    cls = np.empty(n, np.int64)
    pos = np.empty(n, np.int64)
    members = np.empty((4, max(n, 1)), np.int64)
    sizes = np.zeros(4, np.int64)
    cnt = np.empty(n, np.int64)
    nbsum = np.empty(n, np.int64)
    _reset(n, cls, pos, members, sizes, cnt, nbsum)
    best = 0
    T = t_start
    for _ in range(steps):
        kind, delta, acc = _step(indptr, indices, cls, pos, members, sizes, cnt, nbsum,
                                 s, T, w_add, w_swap, w_remove)
        if acc and sizes[IN_SET] > best:
            best = sizes[IN_SET]
            for i in range(best):
                best_set[i] = members[IN_SET, i]
        T *= ratio
    return best


@njit(cache=True)
def _sweep_fixed_t(indptr, indices, cls, pos, members, sizes, cnt, nbsum, s, T, steps,
                   w_add, w_swap, w_remove, best, best_set):
    for _ in range(steps):
        kind, delta, acc = _step(indptr, indices, cls, pos, members, sizes, cnt, nbsum,
                                 s, T, w_add, w_swap, w_remove)
        if acc and sizes[IN_SET] > best:
            best = sizes[IN_SET]
            for i in range(best):
                best_set[i] = members[IN_SET, i]
    return best


def _csr(g):
    adj = g.adjacency
    indptr = np.zeros(g.n + 1, np.int64)
    for v in range(g.n):
        indptr[v + 1] = indptr[v] + len(adj[v])
    indices = np.fromiter((u for v in range(g.n) for u in adj[v]), np.int64, indptr[-1])
    return indptr, indices


class MoveTables:
    """Incrementally maintained move lists for one selected set."""

    def __init__(self, g):
        n = g.n
        self.g = g
        self.n = n
        self.indptr, self.indices = _csr(g)
        self.cls = np.empty(n, np.int64)
        self.pos = np.empty(n, np.int64)
        self.members = np.empty((4, max(n, 1)), np.int64)
        self.sizes = np.zeros(4, np.int64)
        self.sel_nb_count = np.empty(n, np.int64)
        self.sel_nb_sum = np.empty(n, np.int64)
        _reset(n, self.cls, self.pos, self.members, self.sizes, self.sel_nb_count, self.sel_nb_sum)

    def _arrays(self):
        return (self.indptr, self.indices, self.cls, self.pos, self.members, self.sizes,
                self.sel_nb_count, self.sel_nb_sum)

    def _list(self, c):
        return self.members[c, : self.sizes[c]].tolist()

    @property
    def in_set(self):
        return self._list(IN_SET)

    @property
    def free(self):
        return self._list(FREE)

    @property
    def one_nb(self):
        return self._list(ONE_NB)

    @property
    def blocked(self):
        return self._list(BLOCKED)

    @property
    def selected(self):
        return frozenset(self.in_set)

    def check(self):
        """Full recount against the adjacency; raises AssertionError on drift."""
        sel = self.selected
        if not validate_independent_set(self.g, sel):
            raise AssertionError("selected set is not independent")
        fresh = move_tables_init(self.g, sel)
        for c in range(4):
            if set(self._list(c)) != set(fresh._list(c)):
                raise AssertionError(f"class {c} differs from recount")
        if not np.array_equal(self.sel_nb_count, fresh.sel_nb_count):
            raise AssertionError("neighbour counts differ from recount")
        for c in range(4):
            for i, v in enumerate(self._list(c)):
                if self.pos[v] != i or self.cls[v] != c:
                    raise AssertionError("position index out of sync")


def move_tables_init(g, s=()):
    s = sorted(set(s))
    for v in s:
        if not 0 <= v < g.n:
            raise InvalidStateError(f"node {v} out of range")
    if not validate_independent_set(g, s):
        raise InvalidStateError("initial set is not independent")
    t = MoveTables(g)
    for v in s:
        _select(*t._arrays(), v)
    return t


def propose_and_apply(tables, T, rng, bias=(4.0, 4.0, 1.0)):
    """Draw one move, apply it if the Metropolis test passes.

    ``rng`` is a :class:`Xoshiro256`; its state is advanced exactly as the
    compiled kernels would advance it. Returns (delta, accepted).
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    s = np.array(rng.s, dtype=np.uint64)
    kind, delta, acc = _step(*tables._arrays(), s, float(T), *map(float, bias))
    rng.s = [int(x) for x in s]
    if kind < 0:
        raise AssertionError("no move available (empty graph)")
    return int(delta), bool(acc)


def penalty_energy(g, x, V):
    """-sum x_i + V * sum over edges x_i x_j."""
    x = np.asarray(x)
    if x.shape != (g.n,):
        raise ValueError(f"expected a vector of length {g.n}, got shape {x.shape}")
    if V <= 0:
        raise ValueError("penalty weight must be positive")
    e = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    viol = float(np.sum(x[e[:, 0]] * x[e[:, 1]])) if len(e) else 0.0
    return -float(np.sum(x)) + V * viol


# ---------------------------------------------------------------- configs

@dataclass
class SaSchedule:
    t_start: float = 1.0
    t_end: float = 0.05
    depth: int = 32

    def __post_init__(self):
        if not (self.t_start > 0 and self.t_end > 0):
            raise ValueError("temperatures must be positive")
        if self.t_end > self.t_start:
            raise ValueError("t_end must not exceed t_start")
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError("depth must be a positive integer")

    def ratio(self, n):
        steps = self.depth * n
        if steps <= 1:
            return 1.0
        return (self.t_end / self.t_start) ** (1.0 / (steps - 1))


@dataclass
class SaConfig:
    schedule: SaSchedule = field(default_factory=SaSchedule)
    num_restarts: int = 1
    bias: tuple = (4.0, 4.0, 1.0)
    seed: int = 0
    init: str = "empty"  # or "random-greedy"

    def __post_init__(self):
        if self.num_restarts < 1:
            raise ValueError("num_restarts must be >= 1")
        if len(self.bias) != 3 or min(self.bias) <= 0:
            raise ValueError("bias needs three positive weights (add, swap, remove)")
        if self.init not in ("empty", "random-greedy"):
            raise ValueError("init must be 'empty' or 'random-greedy'")


@dataclass
class SaResult:
    best_size: int
    best_set: frozenset
    per_restart_best: list
    proposals: int
    success: bool = None
    wall_time: float = 0.0


@dataclass
class PmisEstimate:
    successes: int
    shots: int
    p_point: float
    zero_success: bool
    tau: float = 0.0  # mean wall time of one run
    shot_rows: list = field(default_factory=list)


_compiled = False


def warmup():
    """Compile (or load from cache) the kernels before anything is timed."""
    global _compiled
    if _compiled:
        return
    indptr = np.array([0, 1, 2], np.int64)
    indices = np.array([1, 0], np.int64)
    buf = np.empty(2, np.int64)
    _anneal(indptr, indices, 2, _state_array(0), 1.0, 0.9, 4, 4.0, 4.0, 1.0, buf)
    cls, pos = np.zeros(2, np.int64), np.zeros(2, np.int64)
    members, sizes = np.zeros((4, 2), np.int64), np.zeros(4, np.int64)
    cnt, nbsum = np.zeros(2, np.int64), np.zeros(2, np.int64)
    _reset(2, cls, pos, members, sizes, cnt, nbsum)
    _sweep_fixed_t(indptr, indices, cls, pos, members, sizes, cnt, nbsum, _state_array(0),
                   1.0, 4, 4.0, 4.0, 1.0, 0, buf)
    _compiled = True


def _one_run(g, csr, cfg, seed, best_buf):
    """Single annealing run; returns (best size, best set)."""
    n = g.n
    if n == 0:
        return 0, frozenset()
    sch = cfg.schedule
    s = _state_array(seed)
    steps = sch.depth * n
    w = tuple(float(b) for b in cfg.bias)
    if cfg.init == "empty":
        best = _anneal(csr[0], csr[1], n, s, float(sch.t_start), sch.ratio(n), steps, *w, best_buf)
        return int(best), frozenset(best_buf[:best].tolist())
    # random greedy start, then the same schedule at fixed-ratio cooling
    rng = Xoshiro256(derive_seed(seed, "greedy-init"))
    order = list(range(n))
    rng.shuffle(order)
    t = MoveTables(g)
    for v in order:
        if t.cls[v] == FREE:
            _select(*t._arrays(), v)
    best = int(t.sizes[IN_SET])
    best_buf[:best] = t.members[IN_SET, :best]
    T = float(sch.t_start)
    ratio = sch.ratio(n)
    for _ in range(sch.depth):
        best = _sweep_fixed_t(*t._arrays(), s, T, n, *w, best, best_buf)
        T *= ratio ** n
    return int(best), frozenset(best_buf[:best].tolist())


def sa_run(g, cfg=None, target=None):
    """Best of ``num_restarts`` independent annealing runs."""
    cfg = cfg or SaConfig()
    warmup()
    t0 = time.perf_counter()
    csr = _csr(g)
    buf = np.empty(max(g.n, 1), np.int64)
    best_size, best_set, per = -1, frozenset(), []
    for r in range(cfg.num_restarts):
        size, sel = _one_run(g, csr, cfg, derive_seed(cfg.seed, "sa-restart", r), buf)
        per.append(size)
        if size > best_size:
            best_size, best_set = size, sel
    assert validate_independent_set(g, best_set)
    success = None if target is None else best_size >= target
    return SaResult(best_size, best_set, per, cfg.num_restarts * cfg.schedule.depth * g.n,
                    success, time.perf_counter() - t0)


def estimate_pmis(g, cfg, shots, optimum, instance_id=""):
    """Fraction of single-restart runs that reach ``optimum``.

    Each shot uses its own derived stream. ``tau`` is the mean wall time of
    one run (depth * N proposals).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    warmup()
    csr = _csr(g)
    buf = np.empty(max(g.n, 1), np.int64)
    successes, total, rows = 0, 0.0, []
    proposals = cfg.schedule.depth * g.n
    for i in range(shots):
        t0 = time.perf_counter()
        size, _ = _one_run(g, csr, cfg, derive_seed(cfg.seed, "shot", i), buf)
        dt = time.perf_counter() - t0
        total += dt
        ok = size >= optimum
        successes += ok
        rows.append({"instance_id": instance_id, "shot": i, "best_size": size,
                     "success": int(ok), "proposals": proposals, "wall_time_s": dt})
    return PmisEstimate(successes, shots, successes / shots, successes == 0, total / shots, rows)


def exchange_probability(t_i, t_j, is_i, is_j):
    """Acceptance of swapping the states held at temperatures t_i and t_j.

    min(1, exp((1/t_i - 1/t_j) * (is_j - is_i))): a larger set held by the
    hotter chain is always handed to the colder one.
    """
    x = (1.0 / t_i - 1.0 / t_j) * (is_j - is_i)
    return 1.0 if x >= 0 else math.exp(x)


def pt_run(g, ladder, sweeps, exchange_interval=1, seed=0, bias=(4.0, 4.0, 1.0)):
    """Replica exchange over a strictly decreasing temperature ladder."""
    ladder = [float(t) for t in ladder]
    if len(ladder) < 2:
        raise ValueError("ladder needs at least two temperatures")
    if any(t <= 0 for t in ladder) or any(a <= b for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be positive and strictly decreasing")
    if sweeps < 1 or exchange_interval < 1:
        raise ValueError("sweeps and exchange_interval must be >= 1")
    warmup()
    t0 = time.perf_counter()
    n = g.n
    if n == 0:
        return SaResult(0, frozenset(), [0] * len(ladder), 0, None, 0.0)
    w = tuple(float(b) for b in bias)
    chains = [MoveTables(g) for _ in ladder]
    streams = [_state_array(derive_seed(seed, "pt-chain", i)) for i in range(len(ladder))]
    xrng = Xoshiro256(derive_seed(seed, "pt-exchange"))
    # slot k of the ladder is currently simulated by chain at_temp[k]
    at_temp = list(range(len(ladder)))
    bests = [0] * len(ladder)
    bufs = [np.empty(n, np.int64) for _ in ladder]
    parity = 0
    for sweep in range(1, sweeps + 1):
        for k, T in enumerate(ladder):
            c = at_temp[k]
            bests[c] = int(_sweep_fixed_t(*chains[c]._arrays(), streams[c], T, n, *w,
                                          bests[c], bufs[c]))
        if sweep % exchange_interval == 0:
            for k in range(parity, len(ladder) - 1, 2):
                a, b = at_temp[k], at_temp[k + 1]
                p = exchange_probability(ladder[k], ladder[k + 1],
                                         int(chains[a].sizes[IN_SET]), int(chains[b].sizes[IN_SET]))
                if p >= 1.0 or xrng.random() < p:
                    at_temp[k], at_temp[k + 1] = b, a
            parity ^= 1
    c = max(range(len(ladder)), key=lambda i: (bests[i], -i))
    best_set = frozenset(bufs[c][: bests[c]].tolist())
    assert validate_independent_set(g, best_set)
    return SaResult(bests[c], best_set, bests, sweeps * n * len(ladder), None,
                    time.perf_counter() - t0)
