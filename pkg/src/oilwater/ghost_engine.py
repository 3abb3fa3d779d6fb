"""Ghost-pair stabilization.

Each step moves either a ghost or an oil-water pair sitting on an active
vertex.  A pair move sends the oil and the water to independent uniform
neighbors; if the water lands on an active vertex that held equally many oils
and waters (and the oil went elsewhere) a ghost is created there.  Ghosts walk
until they leave the active set and never interact with particles.

With a target ``y`` the run tracks

    M_t = Σ_{x∈K} (pairs_t(x) + ghosts_t(x)) g_x - (Δg)_y · #{i <= t : x_i = y}

for the function ``g`` harmonic off ``y`` with ``g_y = 1`` and zero boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._structs import heap_pop, heap_push, set_add, set_remove
from .graph import Graph
from .green import green_table, harmonic_solve
from .instructions import GHOST, PAIR, SCHEDULER, InstructionArray, run_key, slot_hi, slot_lo, stream_key, word
from .particle_config import DensitySpec, ExtendedConfig, Odometer, ParticleConfig, site_uniforms

SCHEDULERS = ("ghosts_first", "pairs_first", "random")
GHOST_MOVE, PAIR_MOVE = 1, 0
RECOMPUTE_EVERY = 1 << 16
DEFAULT_STEP_CAP = 10**8


class IneligibleMover(RuntimeError):
    """The chosen vertex carries no ghost / no pair, or lies outside K."""


@njit(cache=True)
def _weight(v, active, oil, water, ghost, gvec):
    if not active[v]:
        return 0.0
    return (min(oil[v], water[v]) + ghost[v]) * gvec[v]


@njit(cache=True)
def _ghost_kernel(adj, active, oil, water, ghost, pair_key, ghost_key, sched_key, sched,
                  y, gvec, lap_y, step_cap, record):
    n, deg = adj.shape
    m = np.zeros(n, np.int64)
    mt = np.zeros(n, np.int64)
    wj = np.zeros(n, np.int64)
    H = np.zeros(n, np.int64)
    wih = np.zeros(n, np.int64)
    heap = np.empty(2 * n + 16, np.int64)
    hsize = 0
    inheap = np.zeros(n, np.bool_)
    uitems = np.empty(n, np.int64)
    upos = np.full(n, -1, np.int64)
    usize = 0
    gitems = np.empty(n, np.int64)
    gpos = np.full(n, -1, np.int64)
    gsize = 0
    M = 0.0
    for v in range(n):
        if not active[v]:
            continue
        if min(oil[v], water[v]) > 0:
            heap, hsize = heap_push(heap, hsize, v)
            inheap[v] = True
            usize = set_add(uitems, upos, usize, v)
        if ghost[v] > 0:
            gsize = set_add(gitems, gpos, gsize, v)
        M += _weight(v, active, oil, water, ghost, gvec)
    cap = 1024 if record else 1
    log = np.empty((cap, 4), np.int64)
    logM = np.empty(cap, np.float64)
    T = 0
    count_y = 0
    drift = 0.0
    truncated = False
    while True:
        # clean stale heap entries
        while hsize > 0 and min(oil[heap[0]], water[heap[0]]) == 0:
            inheap[heap[0]] = False
            hsize = heap_pop(heap, hsize)
        kind = -1
        b = -1
        if sched == 2:
            total = gsize + usize
            if total > 0:
                i = slot_lo(word(sched_key, 0, T + 1), total)
                if i < gsize:
                    kind = 1
                    b = gitems[i]
                else:
                    kind = 0
                    b = uitems[i - gsize]
        elif sched == 0:
            if gsize > 0:
                kind = 1
                b = gitems[gsize - 1]
            elif hsize > 0:
                kind = 0
                b = heap[0]
        else:
            if hsize > 0:
                kind = 0
                b = heap[0]
            elif gsize > 0:
                kind = 1
                b = gitems[gsize - 1]
        if kind < 0:
            break
        if T >= step_cap:
            truncated = True
            break
        zw = -1
        if kind == 1:
            zo = adj[b, slot_lo(word(ghost_key, b, wj[b] + 1), deg)]
            before = _weight(b, active, oil, water, ghost, gvec) + _weight(zo, active, oil, water, ghost, gvec)
            ghost[b] -= 1
            ghost[zo] += 1
            wj[b] += 1
            mt[b] += 1
            after = _weight(b, active, oil, water, ghost, gvec) + _weight(zo, active, oil, water, ghost, gvec)
            M += after - before
            if ghost[b] == 0:
                gsize = set_remove(gitems, gpos, gsize, b)
            if active[zo]:
                gsize = set_add(gitems, gpos, gsize, zo)
        else:
            w = word(pair_key, b, m[b] + 1)
            zo = adj[b, slot_lo(w, deg)]
            zw = adj[b, slot_hi(w, deg)]
            before = _weight(b, active, oil, water, ghost, gvec) + _weight(zo, active, oil, water, ghost, gvec)
            if zw != zo:
                before += _weight(zw, active, oil, water, ghost, gvec)
            hole = zw != zo and active[zw] and oil[zw] == water[zw]
            oil[b] -= 1
            water[b] -= 1
            oil[zo] += 1
            water[zw] += 1
            m[b] += 1
            mt[b] += 1
            if hole:
                ghost[zw] += 1
                H[zw] += 1
                wih[zw] += 1
                gsize = set_add(gitems, gpos, gsize, zw)
            after = _weight(b, active, oil, water, ghost, gvec) + _weight(zo, active, oil, water, ghost, gvec)
            if zw != zo:
                after += _weight(zw, active, oil, water, ghost, gvec)
            M += after - before
            for v in (b, zo, zw):
                if active[v]:
                    if min(oil[v], water[v]) > 0:
                        usize = set_add(uitems, upos, usize, v)
                        if not inheap[v]:
                            heap, hsize = heap_push(heap, hsize, v)
                            inheap[v] = True
                    else:
                        usize = set_remove(uitems, upos, usize, v)
        if b == y:
            count_y += 1
            M -= lap_y
        T += 1
        if T % 65536 == 0:
            full = -lap_y * count_y
            for v in range(n):
                full += _weight(v, active, oil, water, ghost, gvec)
            drift = max(drift, abs(full - M))
            M = full
        if record:
            if T > log.shape[0]:
                log2 = np.empty((2 * log.shape[0], 4), np.int64)
                log2[: log.shape[0]] = log
                log = log2
                logM2 = np.empty(2 * logM.shape[0], np.float64)
                logM2[: logM.shape[0]] = logM
                logM = logM2
            log[T - 1, 0] = kind
            log[T - 1, 1] = b
            log[T - 1, 2] = zo
            log[T - 1, 3] = zw
            logM[T - 1] = M
    if not record:
        T_log = 0
    else:
        T_log = T
    return m, mt, wj, H, wih, T, truncated, M, drift, log[:T_log].copy(), logM[:T_log].copy()


@njit(cache=True)
def _ghost_batch(adj, active, oil0, water0, seed, run0, n_runs, sched, step_cap):
    n = adj.shape[0]
    mt_all = np.zeros((n_runs, n), np.int32)
    w_all = np.zeros((n_runs, n), np.int32)
    H_all = np.zeros((n_runs, n), np.int32)
    T_all = np.zeros(n_runs, np.int64)
    ok = np.ones(n_runs, np.bool_)
    gvec = np.zeros(n)
    for r in range(n_runs):
        row = r if oil0.shape[0] > 1 else 0
        oil = oil0[row].copy()
        water = water0[row].copy()
        ghost = np.zeros(n, np.int64)
        base = run_key(seed, run0 + r)
        m, mt, wj, H, wih, T, trunc, M, drift, log, logM = _ghost_kernel(
            adj, active, oil, water, ghost, stream_key(base, PAIR), stream_key(base, GHOST),
            stream_key(base, SCHEDULER), sched, -1, gvec, 0.0, step_cap, False)
        for v in range(n):
            mt_all[r, v] = mt[v]
            w_all[r, v] = wj[v]
            H_all[r, v] = H[v]
            if m[v] != mt[v] - wj[v] or H[v] != wih[v]:
                ok[r] = False
            if active[v] and (ghost[v] > 0 or min(oil[v], water[v]) > 0):
                ok[r] = False
        if trunc:
            ok[r] = False
        T_all[r] = T
    return mt_all, w_all, H_all, T_all, ok


# Python API -----------------------------------------------------------------

@dataclass
class MartingaleTracker:
    y: int
    g: np.ndarray
    laplacian_at_y: float
    active: np.ndarray
    value: float = 0.0

    @classmethod
    def for_target(cls, graph: Graph, y: int) -> "MartingaleTracker":
        h = harmonic_solve(graph, None, y)
        return cls(int(y), h.g, h.laplacian_at_y, graph.active.copy())

    def weight(self, oil, water, ghost) -> float:
        """``Σ_{x∈K} (pairs + ghosts) g_x`` recomputed from scratch."""
        a = self.active
        return float(((np.minimum(oil, water) + ghost)[a] * self.g[a]).sum())

    def value_of(self, oil, water, ghost, visits_to_y: int) -> float:
        return self.weight(oil, water, ghost) - self.laplacian_at_y * visits_to_y


@dataclass
class GhostRunResult:
    final: ExtendedConfig
    odometer: Odometer
    T: int
    truncated: bool
    martingale_final: float | None = None
    martingale_drift: float = 0.0
    steps: np.ndarray | None = None
    martingale_values: np.ndarray | None = None
    martingale_trace: list | None = field(default=None, repr=False)

    def bookkeeping_holds(self) -> bool:
        o = self.odometer
        return o.bookkeeping_holds() and bool(np.array_equal(o.ghosts_created, o.waters_into_hole_at))


def _scheduler_code(s: str) -> int:
    if s not in SCHEDULERS:
        raise ValueError(f"unknown scheduler {s!r}; expected one of {SCHEDULERS}")
    return SCHEDULERS.index(s)


def ghost_stabilize(g: Graph, sigma: ParticleConfig, tau: InstructionArray,
                    scheduler: str = "ghosts_first", target: int | None = None,
                    step_cap: int | None = None, record: bool = False) -> GhostRunResult:
    """Run ghost-pair stabilization of the active set from ``sigma``.

    ``scheduler``: ``ghosts_first`` moves ghosts until none is left in K before
    firing the lowest-id unstable vertex; ``pairs_first`` does the reverse;
    ``random`` picks uniformly among all eligible ghosts-sites and unstable sites.
    """
    if len(sigma) != g.vertex_count:
        raise ValueError("configuration length does not match the graph")
    cap = DEFAULT_STEP_CAP if step_cap is None else int(step_cap)
    if cap < 1:
        raise ValueError("step_cap must be >= 1")
    if target is not None:
        tracker = MartingaleTracker.for_target(g, target)
        gvec, lap, y = tracker.g, tracker.laplacian_at_y, int(target)
    else:
        tracker = None
        gvec, lap, y = np.zeros(g.vertex_count), 0.0, -1
    oil, water = sigma.oil.copy(), sigma.water.copy()
    ghost = np.zeros(g.vertex_count, np.int64)
    m, mt, wj, H, wih, T, trunc, M, drift, log, logM = _ghost_kernel(
        g.adjacency, g.active, oil, water, ghost, tau.key(PAIR), tau.key(GHOST),
        tau.key(SCHEDULER), np.int64(_scheduler_code(scheduler)), np.int64(y), gvec,
        float(lap), np.int64(cap), bool(record))
    res = GhostRunResult(
        final=ExtendedConfig(ParticleConfig(oil, water), ghost),
        odometer=Odometer(m, mt, wj, H, wih), T=int(T), truncated=bool(trunc),
        martingale_final=float(M) if tracker is not None else None,
        martingale_drift=float(drift), steps=log if record else None,
        martingale_values=logM if record else None)
    return res


def apply_move(g: Graph, oil, water, ghost, kind: int, b: int, zo: int, zw: int = -1) -> None:
    """Apply one ghost-pair step in place (reference implementation)."""
    if kind == GHOST_MOVE:
        ghost[b] -= 1
        ghost[zo] += 1
        return
    hole = zw != zo and g.active[zw] and oil[zw] == water[zw]
    oil[b] -= 1
    water[b] -= 1
    oil[zo] += 1
    water[zw] += 1
    if hole:
        ghost[zw] += 1


def _check_mover(g: Graph, oil, water, ghost, kind: int, b: int):
    if not g.active[b]:
        raise IneligibleMover(f"vertex {b} is not in K")
    if kind == GHOST_MOVE and ghost[b] <= 0:
        raise IneligibleMover(f"no ghost at {b}")
    if kind == PAIR_MOVE and min(oil[b], water[b]) <= 0:
        raise IneligibleMover(f"no pair at {b}")


def conditional_expectation(g: Graph, config: ExtendedConfig, mover, tracker: MartingaleTracker) -> float:
    """``E[M_t | F_{t-1}] - (M_{t-1} without its counting term)`` by enumerating
    all ``δ`` (ghost) or ``δ²`` (pair) equally likely outcomes."""
    kind, b = mover
    oil, water, ghost = config.oil, config.water, config.ghost
    _check_mover(g, oil, water, ghost, kind, b)
    nbrs = g.adjacency[b]
    outcomes = [(z, -1) for z in nbrs] if kind == GHOST_MOVE else [(zo, zw) for zo in nbrs for zw in nbrs]
    total = 0.0
    for zo, zw in outcomes:
        o2, w2, g2 = oil.copy(), water.copy(), ghost.copy()
        apply_move(g, o2, w2, g2, kind, b, zo, zw)
        total += tracker.weight(o2, w2, g2)
    expected = total / len(outcomes)
    if b == tracker.y:
        expected -= tracker.laplacian_at_y
    return expected


def check_martingale_step(g: Graph, config: ExtendedConfig, mover, tracker: MartingaleTracker) -> float:
    """``|E[M_t | F_{t-1}] - M_{t-1}|`` for the chosen mover ``(kind, b)``."""
    expected = conditional_expectation(g, config, mover, tracker)
    return abs(expected - tracker.weight(config.oil, config.water, config.ghost))


@dataclass
class MartingaleReplay:
    values: np.ndarray          # M_t recomputed from scratch, t = 0..T
    expected: np.ndarray        # E[M_t | F_{t-1}], t = 1..T
    deviation: np.ndarray       # |E[M_t | F_{t-1}] - M_{t-1}|
    incremental_error: float    # max |M_t(kernel) - M_t(scratch)|
    final_config_matches: bool

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max()) if self.deviation.size else 0.0


def replay_martingale(g: Graph, sigma: ParticleConfig, result: GhostRunResult,
                      tracker: MartingaleTracker) -> MartingaleReplay:
    """Replay a recorded run, checking the one-step martingale identity at
    every step and comparing the kernel's incremental ``M_t`` to a recount."""
    if result.steps is None:
        raise ValueError("run was not recorded; pass record=True")
    oil, water = sigma.oil.copy(), sigma.water.copy()
    ghost = np.zeros(g.vertex_count, np.int64)
    visits = 0
    T = result.steps.shape[0]
    values = np.empty(T + 1)
    expected = np.empty(T)
    values[0] = tracker.value_of(oil, water, ghost, 0)
    for t, (kind, b, zo, zw) in enumerate(result.steps):
        cfg = ExtendedConfig(ParticleConfig(oil, water), ghost)
        e = conditional_expectation(g, cfg, (int(kind), int(b)), tracker)
        expected[t] = e - tracker.laplacian_at_y * visits
        apply_move(g, oil, water, ghost, int(kind), int(b), int(zo), int(zw))
        if b == tracker.y:
            visits += 1
        values[t + 1] = tracker.value_of(oil, water, ghost, visits)
    dev = np.abs(expected - values[:-1])
    inc = float(np.abs(values[1:] - result.martingale_values).max()) if T else 0.0
    same = (np.array_equal(oil, result.final.oil) and np.array_equal(water, result.final.water)
            and np.array_equal(ghost, result.final.ghost))
    result.martingale_trace = list(zip(values[1:].tolist(), expected.tolist()))
    return MartingaleReplay(values, expected, dev, inc, same)


def run_batch(g: Graph, sigma, seed: int, n_runs: int, scheduler: str = "ghosts_first",
              run0: int = 0, step_cap: int | None = None):
    """``n_runs`` independent ghost runs (run ``r`` keyed by ``run0 + r``).

    ``sigma`` is one configuration or a pair of ``(n_runs, n)`` oil/water arrays.
    Returns per-run ``(m_tilde, ghost_jumps, ghosts_created, T, ok)`` where ``ok``
    flags bookkeeping, termination and cap checks.
    """
    if isinstance(sigma, ParticleConfig):
        oil0, water0 = sigma.oil[None, :], sigma.water[None, :]
    else:
        oil0, water0 = sigma
    cap = DEFAULT_STEP_CAP if step_cap is None else int(step_cap)
    return _ghost_batch(g.adjacency, g.active, np.ascontiguousarray(oil0, np.int64),
                        np.ascontiguousarray(water0, np.int64), np.uint64(int(seed) & (2**64 - 1)),
                        np.int64(run0), np.int64(n_runs), np.int64(_scheduler_code(scheduler)),
                        np.int64(cap))


# Monte Carlo checks -----------------------------------------------------------

@dataclass
class BRWRow:
    y: int
    n_runs: int
    mean: float
    se: float
    expected: float

    @property
    def z(self) -> float:
        if self.se == 0:
            return 0.0 if self.mean == self.expected else math.inf
        return (self.mean - self.expected) / self.se

    @property
    def rel_error(self) -> float:
        return abs(self.mean - self.expected) / self.expected if self.expected else abs(self.mean)

    def to_dict(self) -> dict:
        return {"y": self.y, "n_runs": self.n_runs, "mean": self.mean, "se": self.se,
                "expected": self.expected, "z": self.z, "rel_error": self.rel_error}


@dataclass
class BRWReport:
    rows: list
    per_run: np.ndarray | None = field(default=None, repr=False)
    all_ok: bool = True

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "all_ok": self.all_ok}


def brw_expected(g: Graph, sigma: ParticleConfig, y: int, table=None) -> float:
    """``Σ_x pairs(σ, x) G_K(x, y)``."""
    table = green_table(g) if table is None else table
    p = sigma.pairs()
    return float(sum(p[x] * table(x, y) for x in table.K))


def verify_lemma_brw(g: Graph, sigma: ParticleConfig, y, n_runs: int, seed: int = 0,
                     scheduler: str = "ghosts_first", chunk: int = 200_000,
                     keep_runs: bool = False) -> BRWReport:
    """Monte Carlo mean of ``m̃(y)`` against ``Σ_x pairs(σ,x) G_K(x,y)``."""
    ys = [int(v) for v in np.atleast_1d(y)]
    table = green_table(g)
    s1 = np.zeros(len(ys))
    s2 = np.zeros(len(ys))
    kept = []
    all_ok = True
    done = 0
    while done < n_runs:
        k = min(chunk, n_runs - done)
        mt, _, _, _, ok = run_batch(g, sigma, seed, k, scheduler, run0=done)
        cols = mt[:, ys].astype(np.float64)
        s1 += cols.sum(axis=0)
        s2 += (cols**2).sum(axis=0)
        all_ok &= bool(ok.all())
        if keep_runs:
            kept.append(mt[:, ys].copy())
        done += k
    rows = []
    for i, yy in enumerate(ys):
        mean = s1[i] / n_runs if n_runs else 0.0
        var = max(s2[i] / n_runs - mean**2, 0.0) * n_runs / max(n_runs - 1, 1) if n_runs else 0.0
        rows.append(BRWRow(yy, n_runs, mean, math.sqrt(var / n_runs) if n_runs else 0.0,
                           brw_expected(g, sigma, yy, table)))
    return BRWReport(rows, np.concatenate(kept) if kept else None, all_ok)


@dataclass
class Section4Report:
    mu: float
    n_runs: int
    vertices: np.ndarray
    m_tilde_mean: np.ndarray
    m_tilde_se: np.ndarray
    bound: np.ndarray
    w_mean: np.ndarray
    w_predicted: np.ndarray
    diff_se: np.ndarray
    H_mean: np.ndarray
    all_ok: bool

    @property
    def bound_holds(self) -> np.ndarray:
        return self.m_tilde_mean <= self.bound + 3 * self.m_tilde_se

    @property
    def identity_z(self) -> np.ndarray:
        d = self.w_mean - self.w_predicted
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.diff_se > 0, d / self.diff_se, np.where(d == 0, 0.0, np.inf))
        return z

    @property
    def identity_holds(self) -> np.ndarray:
        return np.abs(self.identity_z) <= 3

    def rows(self) -> list:
        z = self.identity_z
        return [{"x": int(x), "m_tilde_mean": float(a), "m_tilde_se": float(b), "bound": float(c),
                 "w_mean": float(d), "w_predicted": float(e), "diff_se": float(f), "z": float(zz),
                 "H_mean": float(h)}
                for x, a, b, c, d, e, f, zz, h in zip(self.vertices, self.m_tilde_mean, self.m_tilde_se,
                                                      self.bound, self.w_mean, self.w_predicted,
                                                      self.diff_se, z, self.H_mean)]


def sample_batch(g: Graph, nu: DensitySpec, seed: int, runs: range):
    """Initial configurations for each run index, shape ``(len(runs), n)``."""
    if nu.law == "fixed":
        c = np.where(g.active, 1, 0)
        oil = np.broadcast_to(c * nu.k_o, (1, g.vertex_count))
        water = np.broadcast_to(c * nu.k_w, (1, g.vertex_count))
        return np.array(oil), np.array(water)
    U = np.stack([site_uniforms(g, seed, r) for r in runs])
    oil = np.where(g.active, nu.from_uniform(U[:, :, 0], 0), 0)
    water = np.where(g.active, nu.from_uniform(U[:, :, 1], 1), 0)
    return oil, water


def collect_section4_counters(g: Graph, nu: DensitySpec, L: int | None = None, n_runs: int = 1000,
                              seed: int = 0, scheduler: str = "ghosts_first",
                              chunk: int = 100_000) -> Section4Report:
    """Monte Carlo ``E m̃_L``, ``E w_L``, ``E H_L`` on the active ball.

    The ghost-jump identity is tested run by run: ``w(x) - Σ_y H(y) G(y,x)``
    has mean zero, and its sample standard error is the combined error.
    """
    if L is not None and g.params.get("L") not in (None, L):
        raise ValueError(f"graph was built with L={g.params.get('L')}, not L={L}")
    table = green_table(g)
    K = table.K
    G = table.G                                   # G[i, j] = G(K[i], K[j])
    n = len(K)
    s_mt = np.zeros(n); s_mt2 = np.zeros(n)
    s_w = np.zeros(n); s_d = np.zeros(n); s_d2 = np.zeros(n)
    s_H = np.zeros(n)
    all_ok = True
    done = 0
    while done < n_runs:
        k = min(chunk, n_runs - done)
        sig = sample_batch(g, nu, seed, range(done, done + k))
        mt, wj, H, _, ok = run_batch(g, sig, seed, k, scheduler, run0=done)
        mt = mt[:, K].astype(np.float64)
        wj = wj[:, K].astype(np.float64)
        H = H[:, K].astype(np.float64)
        d = wj - H @ G
        s_mt += mt.sum(0); s_mt2 += (mt**2).sum(0)
        s_w += wj.sum(0)
        s_d += d.sum(0); s_d2 += (d**2).sum(0)
        s_H += H.sum(0)
        all_ok &= bool(ok.all())
        done += k
    N = max(n_runs, 1)
    corr = N / max(N - 1, 1)

    def se(s, s2):
        mean = s / N
        return np.sqrt(np.maximum(s2 / N - mean**2, 0.0) * corr / N)

    H_mean = s_H / N
    w_mean = s_w / N
    return Section4Report(
        mu=nu.mu, n_runs=n_runs, vertices=K, m_tilde_mean=s_mt / N, m_tilde_se=se(s_mt, s_mt2),
        bound=nu.mu * G.sum(axis=0), w_mean=w_mean, w_predicted=w_mean - s_d / N,
        diff_se=se(s_d, s_d2), H_mean=H_mean, all_ok=all_ok)
