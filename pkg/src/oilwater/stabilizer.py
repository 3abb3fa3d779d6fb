"""Stabilization of the active set under a firing strategy.

Besides the final configuration and odometer, a run records how often a water
falls into a hole at each vertex, the walk ``R_j`` of the water-minus-oil
difference at the origin sampled after every firing of a neighbor of the
origin, and the number ``N_K`` of such firings.  In driven mode a pair is added
at the origin whenever the active set is stable, until neighbors of the origin
have fired ``phi`` times in total.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._structs import heap_pop, heap_push, set_add, set_remove
from .graph import Graph, shares_ids
from .instructions import PAIR, STRATEGY, InstructionArray, slot_hi, slot_lo, word
from .particle_config import Odometer, ParticleConfig

DEFAULT_STEP_CAP = 10**8

POLICIES = ("lowest_id", "highest_pairs", "random", "fixed_order", "adversarial_nearest_boundary")

_STATIC, _BY_PAIRS, _RANDOM = 0, 1, 2
_PMAX = 1 << 40


@dataclass(frozen=True)
class Strategy:
    """Rule choosing the next unstable active vertex to fire.

    ``highest_pairs`` breaks ties by lowest id.  ``fixed_order`` fires the
    first unstable vertex of ``order``; unlisted vertices follow by id.
    ``adversarial_nearest_boundary`` prefers vertices closest to the sink.
    """

    policy: str = "lowest_id"
    seed: int = 0
    order: tuple = ()

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown strategy {self.policy!r}; expected one of {POLICIES}")

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        """``"lowest_id"``, ``"random:17"``, ``"fixed_order:3,1,2"`` ..."""
        name, _, arg = text.partition(":")
        if name == "random":
            return cls("random", seed=int(arg or 0))
        if name == "fixed_order":
            return cls("fixed_order", order=tuple(int(v) for v in arg.split(",") if v))
        return cls(name)

    def __str__(self):
        if self.policy == "random":
            return f"random:{self.seed}"
        if self.policy == "fixed_order":
            return "fixed_order:" + ",".join(map(str, self.order))
        return self.policy

    def rank(self, g: Graph) -> np.ndarray:
        n = g.vertex_count
        ids = np.arange(n, dtype=np.int64)
        if self.policy == "fixed_order":
            rank = n + ids
            for i, v in enumerate(self.order):
                if rank[v] >= n:
                    rank[v] = i
            return rank
        if self.policy == "adversarial_nearest_boundary":
            d = g.distance_to_sink()
            d = np.where(d < 0, n, d)
            rank = np.empty(n, np.int64)
            rank[np.lexsort((ids, d))] = ids
            return rank
        return ids

    def kernel_args(self, g: Graph):
        if self.policy == "highest_pairs":
            kind = _BY_PAIRS
        elif self.policy == "random":
            kind = _RANDOM
        else:
            kind = _STATIC
        key = InstructionArray(self.seed).key(STRATEGY)
        return kind, self.rank(g), key

    def select(self, g: Graph, c: ParticleConfig, step: int = 0):
        """Reference (uncompiled) selection; ``None`` when K is stable."""
        unstable = c.unstable(g)
        if unstable.size == 0:
            return None
        if self.policy == "highest_pairs":
            p = c.pairs()[unstable]
            return int(unstable[np.flatnonzero(p == p.max())[0]])
        if self.policy == "random":
            w = word(InstructionArray(self.seed).key(STRATEGY), 0, step + 1)
            return int(np.sort(unstable)[slot_lo(w, unstable.size)])
        rank = self.rank(g)
        return int(unstable[np.argmin(rank[unstable])])


@dataclass
class StabilizationResult:
    final_config: ParticleConfig
    odometer: Odometer
    T: int
    r_walk: np.ndarray
    n_k: int
    holes_filled_at: np.ndarray
    truncated: bool
    # driven mode
    t_stab: int = 0
    injections: int = 0
    holes_filled_total: np.ndarray = field(default=None)

    @property
    def neighbor_firings(self) -> int:
        return len(self.r_walk) - 1

    def up_crossings(self, k: int | None = None) -> int:
        """Number of jumps of R from 0 to +1 among its first ``k`` steps."""
        return up_crossings(self.r_walk, self.neighbor_firings if k is None else k)

    def to_dict(self) -> dict:
        steps = np.diff(self.r_walk)
        return {
            "T": self.T,
            "truncated": self.truncated,
            "n_k": self.n_k,
            "t_stab": self.t_stab,
            "injections": self.injections,
            "odometer": self.odometer.fires.tolist(),
            "holes_filled_at": self.holes_filled_at.tolist(),
            "final": {"oil": self.final_config.oil.tolist(), "water": self.final_config.water.tolist()},
            "r_walk": {
                "length": int(self.neighbor_firings),
                "R0": int(self.r_walk[0]),
                "up": int((steps == 1).sum()),
                "down": int((steps == -1).sum()),
                "stay": int((steps == 0).sum()),
                "up_crossings": int(self.up_crossings()),
            },
        }


def up_crossings(r: np.ndarray, k: int) -> int:
    r = np.asarray(r)
    k = min(int(k), len(r) - 1)
    if k <= 0:
        return 0
    return int(((r[:k] == 0) & (r[1 : k + 1] == 1)).sum())


@njit(cache=True)
def _touch(v, kind, active, oil, water, rank, n, heap, hsize, inheap, items, pos, usize):
    if not active[v]:
        return heap, hsize, usize
    p = min(oil[v], water[v])
    if kind == _RANDOM:
        if p > 0:
            usize = set_add(items, pos, usize, v)
        else:
            usize = set_remove(items, pos, usize, v)
    elif kind == _STATIC:
        if p > 0 and not inheap[v]:
            heap, hsize = heap_push(heap, hsize, rank[v] * n + v)
            inheap[v] = True
    elif p > 0:
        heap, hsize = heap_push(heap, hsize, (_PMAX - p) * n + v)
    return heap, hsize, usize


@njit(cache=True)
def _stabilize_kernel(adj, active, near_o, origin, oil, water, pair_key, kind, rank,
                      strat_key, step_cap, phi):
    n, deg = adj.shape
    m = np.zeros(n, np.int64)
    holes = np.zeros(n, np.int64)
    holes_all = np.zeros(n, np.int64)
    heap = np.empty(2 * n + 16, np.int64)
    hsize = 0
    inheap = np.zeros(n, np.bool_)
    items = np.empty(n, np.int64)
    pos = np.full(n, -1, np.int64)
    usize = 0
    for v in range(n):
        heap, hsize, usize = _touch(v, kind, active, oil, water, rank, n, heap, hsize,
                                    inheap, items, pos, usize)
    r = np.empty(1024, np.int64)
    r[0] = water[origin] - oil[origin]
    rlen = 1
    T = 0
    phase0 = True
    t_stab = 0
    n_k = 0
    injections = 0
    truncated = False
    while True:
        x = -1
        if kind == _RANDOM:
            if usize > 0:
                x = items[slot_lo(word(strat_key, 0, T + 1), usize)]
        else:
            if kind == _BY_PAIRS and hsize > 8 * n + 64:
                hsize = 0
                for v in range(n):
                    heap, hsize, usize = _touch(v, kind, active, oil, water, rank, n, heap,
                                                hsize, inheap, items, pos, usize)
            while hsize > 0:
                k = heap[0]
                v = k % n
                p = min(oil[v], water[v])
                if p > 0 and (kind == _STATIC or k == (_PMAX - p) * n + v):
                    x = v
                    break
                hsize = heap_pop(heap, hsize)
                inheap[v] = False
        if x < 0:
            if phase0:
                phase0 = False
                t_stab = T
                n_k = rlen - 1
            if phi > 0 and rlen - 1 < phi and T < step_cap:
                oil[origin] += 1
                water[origin] += 1
                injections += 1
                heap, hsize, usize = _touch(origin, kind, active, oil, water, rank, n, heap,
                                            hsize, inheap, items, pos, usize)
                continue
            break
        if T >= step_cap:
            truncated = True
            break
        w = word(pair_key, x, m[x] + 1)
        yo = adj[x, slot_lo(w, deg)]
        yw = adj[x, slot_hi(w, deg)]
        if yo != yw and water[yw] == oil[yw]:
            holes_all[yw] += 1
            if phase0:
                holes[yw] += 1
        oil[x] -= 1
        water[x] -= 1
        oil[yo] += 1
        water[yw] += 1
        m[x] += 1
        T += 1
        if near_o[x]:
            if rlen == r.shape[0]:
                r2 = np.empty(2 * rlen, np.int64)
                r2[:rlen] = r
                r = r2
            r[rlen] = water[origin] - oil[origin]
            rlen += 1
        heap, hsize, usize = _touch(x, kind, active, oil, water, rank, n, heap, hsize,
                                    inheap, items, pos, usize)
        heap, hsize, usize = _touch(yo, kind, active, oil, water, rank, n, heap, hsize,
                                    inheap, items, pos, usize)
        heap, hsize, usize = _touch(yw, kind, active, oil, water, rank, n, heap, hsize,
                                    inheap, items, pos, usize)
        if phi > 0 and not phase0 and rlen - 1 >= phi:
            break
    if phase0:
        t_stab = T
        n_k = rlen - 1
    return m, holes, holes_all, r[:rlen].copy(), T, t_stab, n_k, injections, truncated


def _check_cap(g: Graph, step_cap):
    if step_cap is None:
        if not g.sink.any():
            raise ValueError("a step cap is mandatory on graphs without a sink")
        return DEFAULT_STEP_CAP
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    return int(step_cap)


def _as_strategy(strategy) -> Strategy:
    if isinstance(strategy, Strategy):
        return strategy
    return Strategy.parse(str(strategy))


def _run(g, c0, tau, strategy, step_cap, phi):
    if len(c0) != g.vertex_count:
        raise ValueError("configuration length does not match the graph")
    outside = ~(g.active | g.sink)
    if c0.oil[outside].any() or c0.water[outside].any():
        raise ValueError("initial configuration must be supported on active and sink vertices")
    strategy = _as_strategy(strategy)
    cap = _check_cap(g, step_cap)
    kind, rank, skey = strategy.kernel_args(g)
    near_o = np.zeros(g.vertex_count, np.bool_)
    near_o[g.origin_neighbors()] = True
    oil, water = c0.oil.copy(), c0.water.copy()
    m, holes, holes_all, r, T, t_stab, n_k, inj, trunc = _stabilize_kernel(
        g.adjacency, g.active, near_o, np.int64(g.origin), oil, water,
        tau.key(PAIR), np.int64(kind), rank, skey, np.int64(cap), np.int64(phi))
    return StabilizationResult(
        final_config=ParticleConfig(oil, water), odometer=Odometer(m), T=int(T), r_walk=r,
        n_k=int(n_k), holes_filled_at=holes, truncated=bool(trunc), t_stab=int(t_stab),
        injections=int(inj), holes_filled_total=holes_all)


def stabilize(g: Graph, c0: ParticleConfig, tau: InstructionArray, strategy="lowest_id",
              step_cap: int | None = None) -> StabilizationResult:
    """Fire strategy-selected unstable vertices until K is stable or the cap hits."""
    return _run(g, c0, tau, strategy, step_cap, 0)


def driven_stabilize(g: Graph, c0: ParticleConfig, tau: InstructionArray, strategy="lowest_id",
                     phi: int = 1, step_cap: int | None = None) -> StabilizationResult:
    """Stabilize, then keep adding pairs at the origin until neighbors of the
    origin have fired ``phi`` times.  ``phi = 0`` is plain stabilization."""
    if phi < 0:
        raise ValueError("phi must be non-negative")
    if phi > 0 and not g.active[g.origin]:
        raise ValueError("driven mode needs the origin in the active set")
    return _run(g, c0, tau, strategy, step_cap, int(phi))


# verification harnesses ---------------------------------------------------

@dataclass
class VerificationReport:
    name: str
    passed: bool
    inconclusive: bool = False
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "inconclusive": self.inconclusive,
                "details": self.details}


def verify_abelian(g: Graph, c0: ParticleConfig, seed: int, strategies, step_cap=None,
                   tau_overrides: dict | None = None) -> VerificationReport:
    """Stabilize with every strategy on the same instructions and compare.

    ``tau_overrides`` maps a strategy index to a different seed; used only as
    a negative control.
    """
    strategies = [_as_strategy(s) for s in strategies]
    overrides = tau_overrides or {}
    results = []
    for i, s in enumerate(strategies):
        tau = InstructionArray(overrides.get(i, seed))
        results.append(stabilize(g, c0, tau, s, step_cap))
    if any(r.truncated for r in results):
        return VerificationReport("abelian", False, True, ["step cap reached"])
    details = []
    ref = results[0]
    for s, r in zip(strategies[1:], results[1:]):
        same_m = np.array_equal(ref.odometer.fires, r.odometer.fires)
        same_c = ref.final_config == r.final_config
        if not (same_m and same_c):
            details.append({"strategy": str(s), "odometer_equal": bool(same_m),
                            "config_equal": bool(same_c)})
    return VerificationReport("abelian", not details, False, details)


def verify_monotonicity(g: Graph, c0: ParticleConfig, g_big: Graph, c0_big: ParticleConfig,
                        seed: int, strategy="lowest_id", step_cap=None) -> VerificationReport:
    """Check ``m_K <= m_K'`` on K for ``c0 <= c0_big`` and ``K`` inside ``K'``."""
    if not shares_ids(g, g_big):
        raise ValueError("the two graphs do not share vertex ids on K")
    n = g.vertex_count
    if (c0.oil > c0_big.oil[:n]).any() or (c0.water > c0_big.water[:n]).any():
        raise ValueError("initial configurations are not ordered")
    tau = InstructionArray(seed)
    small = stabilize(g, c0, tau, strategy, step_cap)
    big = stabilize(g_big, c0_big, tau, strategy, step_cap)
    if small.truncated or big.truncated:
        return VerificationReport("monotone", False, True, ["step cap reached"])
    K = g.active_set
    bad = K[small.odometer.fires[K] > big.odometer.fires[K]]
    details = [{"vertex": int(v), "m_K": int(small.odometer.fires[v]),
                "m_K_big": int(big.odometer.fires[v])} for v in bad]
    return VerificationReport("monotone", bad.size == 0, False, details)
