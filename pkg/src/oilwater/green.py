"""Green's functions of simple random walk killed on leaving a finite set.

Two independent routes are provided: a direct solve of ``(I - Q) G = I`` with
``Q`` the walk kernel restricted to ``K``, and a composition of hitting
probabilities ``G(x, y) = P_x(hit y before leaving K) * G(y, y)`` where each
hitting-probability vector comes from its own Dirichlet problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit

from .graph import Graph, build, interior
from .instructions import WALK, InstructionArray, slot_lo, word

DENSE_LIMIT = 4000


class NoExitError(ValueError):
    """Raised when the killed walk cannot leave ``K``."""

    def __init__(self, msg="K has no boundary exit"):
        super().__init__(msg)


def _as_set(g: Graph, K) -> np.ndarray:
    if K is None:
        return g.active_set
    K = np.unique(np.asarray(list(K), dtype=np.int64))
    if K.size == 0:
        raise ValueError("K must be nonempty")
    if not g.active[K].all():
        raise ValueError("K must be a subset of the active set")
    return K


def _check_exit(g: Graph, K: np.ndarray):
    inK = np.zeros(g.vertex_count, bool)
    inK[K] = True
    # every vertex of K must reach a vertex outside K
    exits = [x for x in K if not inK[g.neighbors(x)].all()]
    if not exits:
        raise NoExitError()
    seen = np.zeros(g.vertex_count, bool)
    seen[exits] = True
    stack = list(exits)
    while stack:
        u = stack.pop()
        for v in g.neighbors(u):
            if inK[v] and not seen[v]:
                seen[v] = True
                stack.append(v)
    if not seen[K].all():
        raise NoExitError()


def restricted_kernel(g: Graph, K) -> sp.csr_matrix:
    """Transition matrix of simple random walk restricted to ``K`` (sparse)."""
    K = _as_set(g, K)
    index = np.full(g.vertex_count, -1, np.int64)
    index[K] = np.arange(K.size)
    rows, cols = [], []
    for i, x in enumerate(K):
        for z in g.adjacency[x]:
            j = index[z] if z >= 0 else -1
            if j >= 0:
                rows.append(i)
                cols.append(j)
    data = np.full(len(rows), 1.0 / g.degree)
    return sp.csr_matrix((data, (rows, cols)), shape=(K.size, K.size))


def _solve(A: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    if A.shape[0] <= DENSE_LIMIT:
        return np.linalg.solve(A.toarray(), b)
    return spla.splu(A.tocsc()).solve(np.asarray(b, float))


def _system(g: Graph, K) -> sp.csr_matrix:
    return (sp.identity(len(K), format="csr") - restricted_kernel(g, K)).tocsr()


@dataclass
class GreenTable:
    K: np.ndarray
    G: np.ndarray
    method: str
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {int(v): i for i, v in enumerate(self.K)}

    def __call__(self, x: int, y: int) -> float:
        ix, iy = self.index.get(int(x)), self.index.get(int(y))
        if ix is None or iy is None:
            return 0.0
        return float(self.G[ix, iy])

    def column(self, y: int, n: int | None = None) -> np.ndarray:
        """``G(., y)`` as a vector over all ``n`` vertex ids (zero off K)."""
        n = int(self.K.max()) + 1 if n is None else n
        out = np.zeros(n)
        out[self.K] = self.G[:, self.index[int(y)]]
        return out

    def to_csv(self) -> str:
        lines = ["x," + ",".join(str(int(v)) for v in self.K)]
        for v, row in zip(self.K, self.G):
            lines.append(f"{int(v)}," + ",".join(repr(float(a)) for a in row))
        return "\n".join(lines) + "\n"


@dataclass
class HarmonicSolution:
    K: np.ndarray
    y: int
    g: np.ndarray
    laplacian_at_y: float
    green_yy: float

    @property
    def product_check(self) -> float:
        """``|G(y,y) * (-Δg)_y - 1|``."""
        return abs(self.green_yy * -self.laplacian_at_y - 1.0)


def laplacian(g: Graph, f: np.ndarray) -> np.ndarray:
    """``(1/δ) Σ_{z~x} (f_z - f_x)`` on active vertices, NaN elsewhere."""
    out = np.full(g.vertex_count, np.nan)
    A = g.active_set
    nb = g.adjacency[A]
    out[A] = f[nb].mean(axis=1) - f[A]
    return out


def green_table(g: Graph, K=None, method: str = "direct_solve") -> GreenTable:
    """Expected visits to ``y`` (time 0 included) of a walk from ``x`` killed on leaving K."""
    K = _as_set(g, K)
    _check_exit(g, K)
    if method == "direct_solve":
        A = _system(g, K)
        G = _solve(A, np.eye(K.size))
    elif method == "hitting_prob":
        G = np.empty((K.size, K.size))
        for j, y in enumerate(K):
            h = harmonic_solve(g, K, int(y), check=False)
            G[:, j] = h.g[K] / -h.laplacian_at_y
    else:
        raise ValueError(f"unknown method {method!r}")
    return GreenTable(K, G, method)


def green_column(g: Graph, y: int, K=None) -> np.ndarray:
    """``G_K(., y)`` over all vertex ids from a single linear solve."""
    K = _as_set(g, K)
    _check_exit(g, K)
    pos = np.searchsorted(K, y)
    if pos >= K.size or K[pos] != y:
        raise ValueError("y must lie in K")
    e = np.zeros(K.size)
    e[pos] = 1.0
    col = _solve(_system(g, K), e)
    out = np.zeros(g.vertex_count)
    out[K] = col
    return out


def harmonic_solve(g: Graph, K, y: int, check: bool = True) -> HarmonicSolution:
    """``g`` harmonic on ``K \\ {y}``, ``g_y = 1``, ``g = 0`` off ``K``."""
    K = _as_set(g, K)
    _check_exit(g, K)
    y = int(y)
    if y not in set(K.tolist()):
        raise ValueError("y must lie in K")
    rest = K[K != y]
    f = np.zeros(g.vertex_count)
    f[y] = 1.0
    if rest.size:
        Q = restricted_kernel(g, rest)
        b = np.zeros(rest.size)
        for i, x in enumerate(rest):
            b[i] = np.count_nonzero(g.adjacency[x] == y) / g.degree
        f[rest] = _solve((sp.identity(rest.size) - Q).tocsr(), b)
    lap_y = float(f[g.adjacency[y]].mean() - 1.0)
    gyy = float(green_column(g, y, K)[y]) if check else 1.0 / -lap_y
    sol = HarmonicSolution(K, y, f, lap_y, gyy)
    if check and sol.product_check > 1e-10:
        raise ArithmeticError(f"G(y,y) * (-Δg)_y deviates from 1 by {sol.product_check:.3e}")
    return sol


@dataclass
class LemmaGreenReport:
    lhs: float
    rhs: float
    green_oo: float
    range_expectation: float

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "green_oo": self.green_oo,
                "range_expectation": self.range_expectation, "difference": self.difference}


def range_expectation(g: Graph, Q_set, B, o: int) -> float:
    """Expected visits to ``B \\ {o}`` at times ``1 <= t`` before the walk from
    ``o`` hits ``Q^c ∪ {o}``, from a taboo Green solve on ``Q \\ {o}``."""
    Q_set = _as_set(g, Q_set)
    taboo = Q_set[Q_set != o]
    if taboo.size == 0:
        return 0.0
    target = np.isin(taboo, np.asarray(list(B), np.int64)).astype(float)
    u = np.zeros(g.vertex_count)
    u[taboo] = _solve((sp.identity(taboo.size) - restricted_kernel(g, taboo)).tocsr(), target)
    return float(u[g.adjacency[o]].mean())


def verify_lemma_green(g: Graph, Q_set, B, o: int) -> LemmaGreenReport:
    Q_set = _as_set(g, Q_set)
    B = np.unique(np.asarray(list(B), np.int64))
    if not np.isin(B, Q_set).all():
        raise ValueError("B must be a subset of Q")
    if o not in set(Q_set.tolist()):
        raise ValueError("o must lie in Q")
    table = green_table(g, Q_set)
    lhs = float(sum(table(y, o) for y in B))
    rng = range_expectation(g, Q_set, B, o)
    goo = table(o, o)
    rhs = goo * ((1.0 if o in set(B.tolist()) else 0.0) + rng)
    return LemmaGreenReport(lhs, rhs, goo, rng)


# ball-sum bound --------------------------------------------------------------

def ball_sums(g: Graph, D: int) -> tuple[float, float]:
    """``(Σ_{x∈B_L} G(x,o), Σ_{x: B(x,D)⊂B_L} G(x,o))`` for the active ball."""
    col = green_column(g, g.origin)
    return float(col[g.active].sum()), float(col[interior(g, D)].sum())


def pair_bound(g: Graph, L: int | None = None, D: int = 1, mu: float = 1.0) -> float:
    """``mu * (Σ_y G(y,o) - 10 Σ_{y: B(y,D)⊂B_L} G(y,o))`` on the active ball."""
    if L is not None and g.params.get("L") not in (None, L):
        raise ValueError(f"graph was built with L={g.params.get('L')}, not L={L}")
    if mu == 0:
        return 0.0
    total, inner = ball_sums(g, D)
    return float(mu * (total - 10.0 * inner))


def choice_L0(D: int, degree: int) -> int:
    """Smallest integer ``L0 >= D (1 + degree**D)``."""
    return int(math.ceil(D * (1 + degree**D)))


@dataclass
class ScanReport:
    family: str
    D: int
    degree: int
    rows: list
    L0_bound: int
    smallest_L: int | None
    holds_beyond: bool
    bound_ok: bool | None

    def to_dict(self) -> dict:
        return {"family": self.family, "D": self.D, "degree": self.degree, "rows": self.rows,
                "L0_bound": self.L0_bound, "smallest_L": self.smallest_L,
                "holds_beyond": self.holds_beyond, "bound_ok": self.bound_ok}


def properties_green_scan(g_family: str, D: int, L_range, params: dict | None = None,
                          tol: float = 1e-10) -> ScanReport:
    """Check ``Σ G(x,o) < 10 Σ_{B(x,D)⊂B_L} G(x,o)`` for each ``L``.

    ``holds`` requires the margin ``10*inner - total`` to exceed ``tol``.
    """
    rows = []
    degree = None
    for L in L_range:
        g = build(g_family, dict(params or {}), L)
        degree = g.degree
        total, inner = ball_sums(g, D)
        margin = 10.0 * inner - total
        rows.append({"L": int(L), "total": total, "inner": inner,
                     "ratio": total / inner if inner > 0 else math.inf,
                     "margin": margin, "holds": bool(margin > tol)})
    L0 = choice_L0(D, degree) if degree is not None else None
    smallest = None
    for i, r in enumerate(rows):
        if r["holds"] and all(s["holds"] for s in rows[i:]):
            smallest = r["L"]
            break
    holds_beyond = smallest is not None
    tested = {r["L"]: r["holds"] for r in rows}
    bound_ok = tested.get(L0) if L0 in tested else None
    return ScanReport(g_family, D, degree, rows, L0, smallest, holds_beyond, bound_ok)


# Monte Carlo cross-check ----------------------------------------------------

@njit(cache=True)
def _visit_kernel(adj, inK, x0, key, n_walks):
    n, deg = adj.shape
    s1 = np.zeros(n, np.float64)
    s2 = np.zeros(n, np.float64)
    cnt = np.zeros(n, np.int64)
    touched = np.empty(n, np.int64)
    for walk in range(n_walks):
        nt = 0
        x = x0
        step = 0
        while inK[x]:
            if cnt[x] == 0:
                touched[nt] = x
                nt += 1
            cnt[x] += 1
            step += 1
            x = adj[x, slot_lo(word(key, walk, step), deg)]
        for i in range(nt):
            v = touched[i]
            s1[v] += cnt[v]
            s2[v] += cnt[v] * cnt[v]
            cnt[v] = 0
    return s1, s2


def sample_visits(g: Graph, x: int, n_walks: int, seed: int = 0, K=None):
    """Monte Carlo mean visits to every vertex and their standard errors."""
    K = _as_set(g, K)
    inK = np.zeros(g.vertex_count, np.bool_)
    inK[K] = True
    key = InstructionArray(seed).key(WALK)
    s1, s2 = _visit_kernel(g.adjacency, inK, np.int64(x), key, np.int64(n_walks))
    mean = s1 / n_walks
    var = np.maximum(s2 / n_walks - mean**2, 0.0)
    return mean, np.sqrt(var / max(n_walks - 1, 1))
