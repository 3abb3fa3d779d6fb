"""Finite regular graphs with an active set and an absorbing sink layer.

Vertex ids are assigned in breadth-first order from the origin (id 0) with a
deterministic tie-break, so a ball of radius ``L`` built for two different
truncation radii receives the same ids.  Instruction keys are vertex ids, which
makes nested truncations share their randomness.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("cycle", "torus_2d", "lattice_box", "regular_tree_ball")


class GraphError(ValueError):
    """Raised for invalid graph families, parameters or vertex ids."""


@dataclass(frozen=True)
class BallSpec:
    center: int
    radius: int


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable graph with ``adjacency[x]`` listing neighbors of ``x``.

    Rows have length ``degree``; entries ``-1`` pad missing neighbors of
    vertices outside the active set (e.g. the outer shell of a lattice box).
    Vertices that are neither active nor sink are "exterior": they exist for
    distance queries but the dynamics never reach them.
    """

    family_tag: str
    degree: int
    adjacency: np.ndarray
    active: np.ndarray
    sink: np.ndarray
    params: dict = field(default_factory=dict)
    labels: tuple = ()
    origin: int = 0

    @property
    def vertex_count(self) -> int:
        return self.adjacency.shape[0]

    @property
    def active_set(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    @property
    def sink_set(self) -> np.ndarray:
        return np.flatnonzero(self.sink)

    def neighbors(self, x: int) -> np.ndarray:
        row = self.adjacency[self._check(x)]
        return row[row >= 0]

    def _check(self, x) -> int:
        x = int(x)
        if not 0 <= x < self.vertex_count:
            raise GraphError(f"unknown vertex id {x}")
        return x

    def distances(self, sources) -> np.ndarray:
        """Multi-source BFS distances; unreachable vertices get -1."""
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        queue = deque()
        for s in np.atleast_1d(sources):
            s = self._check(s)
            if dist[s] < 0:
                dist[s] = 0
                queue.append(s)
        adj = self.adjacency
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v >= 0 and dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def distance(self, x: int, y: int) -> int:
        return int(self.distances([x])[self._check(y)])

    def distance_to_sink(self) -> np.ndarray:
        """Graph distance from every vertex to the sink set (-1 if no sink)."""
        if not self.sink.any():
            return np.full(self.vertex_count, -1, dtype=np.int64)
        return self.distances(self.sink_set)

    def origin_neighbors(self) -> np.ndarray:
        return self.neighbors(self.origin)

    def edge_list(self) -> str:
        """Undirected edges as ``"u v"`` lines, each listed once with u < v."""
        lines = []
        for u in range(self.vertex_count):
            for v in self.adjacency[u]:
                if v > u:
                    lines.append(f"{u} {v}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"family": self.family_tag, "params": dict(self.params)}


def ball(g: Graph, spec: BallSpec) -> set[int]:
    if spec.radius < 0:
        raise GraphError("ball radius must be non-negative")
    d = g.distances([spec.center])
    return set(np.flatnonzero((d >= 0) & (d <= spec.radius)).tolist())


def annulus(g: Graph, L: int | None = None, D: int = 0) -> set[int]:
    """Union of radius-``D`` balls centred on the exterior boundary of ``B_L``.

    The exterior boundary is the sink layer of ``g``; ``L`` is accepted for
    readability and checked against the graph's truncation radius when known.
    """
    if D < 0:
        raise GraphError("annulus width D must be non-negative")
    known = g.params.get("L")
    if L is not None and known is not None and int(L) != int(known):
        raise GraphError(f"graph was built with L={known}, not L={L}")
    if not g.sink.any():
        raise GraphError("annulus requires a nonempty boundary (sink) layer")
    d = g.distance_to_sink()
    return set(np.flatnonzero((d >= 0) & (d <= D)).tolist())


def interior(g: Graph, D: int) -> np.ndarray:
    """Active vertices x whose ball B(x, D) stays inside the active set."""
    d = g.distance_to_sink()
    if not g.sink.any():
        return g.active_set
    return np.flatnonzero(g.active & (d > D))


# --- construction -----------------------------------------------------------

def _from_labels(labels, neighbor_fn, degree, active_fn, family, params):
    """Assign BFS ids to ``labels`` (origin first) and build the adjacency."""
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    adj = np.full((n, degree), -1, dtype=np.int64)
    for i, lab in enumerate(labels):
        for k, nb in enumerate(neighbor_fn(lab)):
            j = index.get(nb)
            if j is not None:
                adj[i, k] = j
    active = np.array([active_fn(lab) for lab in labels], dtype=bool)
    sink = np.zeros(n, dtype=bool)
    rows = adj[active]
    sink[rows[rows >= 0]] = True
    sink &= ~active
    g = Graph(family, degree, adj, active, sink, params, tuple(labels))
    _validate(g)
    return g


def _validate(g: Graph) -> None:
    rows = g.adjacency[g.active]
    if (rows < 0).any():
        raise GraphError("an active vertex is missing neighbors")
    if rows.size and not (g.active | g.sink)[rows].all():
        raise GraphError("an active vertex has an exterior neighbor")
    for x in g.active_set:
        for y in g.adjacency[x]:
            if g.active[y] and x not in g.adjacency[y]:
                raise GraphError("adjacency is not symmetric on the active set")


def _bfs_labels(origin, neighbor_fn, keep, key=None):
    """Labels reachable from origin through ``keep``, in BFS layer order."""
    seen = {origin}
    layer = [origin]
    out = []
    while layer:
        layer.sort(key=key)
        out.extend(layer)
        nxt = []
        for lab in layer:
            for nb in neighbor_fn(lab):
                if nb not in seen and keep(nb):
                    seen.add(nb)
                    nxt.append(nb)
        layer = nxt
    return out


def _signed_key(v):
    # 0, 1, -1, 2, -2, ... per coordinate
    return tuple((abs(c), c < 0) for c in np.atleast_1d(v))


def _build_cycle(p):
    n = int(p.get("n", 0))
    L = p.get("L")
    arc = p.get("arc")
    if n == 0 and L is not None:
        n = 2 * int(L) + 3
    if n < 3:
        raise GraphError("cycle length n must be >= 3")
    if arc is None:
        arc = n if L is None else min(n, 2 * int(L) + 1)
    arc = int(arc)
    if not 1 <= arc <= n:
        raise GraphError("cycle arc must satisfy 1 <= arc <= n")

    def nbrs(v):
        return ((v + 1) % n, (v - 1) % n)

    def key(v):
        s = v if v <= n // 2 else v - n
        return (abs(s), s < 0)

    labels = _bfs_labels(0, nbrs, lambda v: True, key)
    active_labels = set(labels[:arc])
    params = {"n": n, "arc": arc}
    if L is not None:
        params["L"] = int(L)
    return _from_labels(labels, nbrs, 2, active_labels.__contains__, "cycle", params)


def _build_torus(p):
    side = int(p.get("side", 0))
    if side < 3:
        raise GraphError("torus side must be >= 3")
    L = p.get("L")

    def nbrs(v):
        i, j = v
        return (((i + 1) % side, j), ((i - 1) % side, j), (i, (j + 1) % side), (i, (j - 1) % side))

    def key(v):
        return tuple(_signed_key([c if c <= side // 2 else c - side for c in v]))

    labels = _bfs_labels((0, 0), nbrs, lambda v: True, key)
    params = {"side": side}
    if L is None:
        active_fn = lambda v: True  # noqa: E731
    else:
        params["L"] = int(L)
        dist = _label_distances((0, 0), nbrs)
        active_fn = lambda v: dist[v] <= int(L)  # noqa: E731
    return _from_labels(labels, nbrs, 4, active_fn, "torus_2d", params)


def _label_distances(origin, nbrs):
    dist = {origin: 0}
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        for v in nbrs(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _build_lattice_box(p):
    d = int(p.get("d", 2))
    if d < 1:
        raise GraphError("lattice dimension d must be >= 1")
    if "L" not in p:
        raise GraphError("lattice_box requires the truncation radius L")
    L = int(p["L"])
    if L < 0:
        raise GraphError("lattice_box radius L must be >= 0")
    margin = int(p.get("margin", 1))
    if margin < 1:
        raise GraphError("lattice_box margin must be >= 1")
    # ℓ¹ ball of radius L+margin; the outer shells only carry sink/exterior vertices
    R = L + margin
    steps = []
    for k in range(d):
        e = [0] * d
        e[k] = 1
        steps.append(tuple(e))
        e[k] = -1
        steps.append(tuple(e))

    def nbrs(v):
        return tuple(tuple(a + b for a, b in zip(v, s)) for s in steps)

    def norm(v):
        return sum(abs(c) for c in v)

    labels = _bfs_labels((0,) * d, nbrs, lambda v: norm(v) <= R, _signed_key)
    params = {"d": d, "L": L}
    if margin != 1:
        params["margin"] = margin
    return _from_labels(labels, nbrs, 2 * d, lambda v: norm(v) <= L, "lattice_box", params)


def _build_tree(p):
    degree = int(p.get("degree", 0))
    if degree < 2:
        raise GraphError("tree degree must be >= 2")
    if "L" in p:
        L = int(p["L"])
    else:
        L = int(p.get("depth", 0))
    if L < 1:
        raise GraphError("tree depth must be >= 1")
    # labels are words over child indices; the root has `degree` children,
    # every other vertex has `degree - 1` children plus its parent
    R = L + 1

    def nbrs(v):
        out = []
        if v:
            out.append(v[:-1])
        nchild = degree if not v else degree - 1
        if len(v) < R:
            out.extend(v + (c,) for c in range(nchild))
        else:
            out.extend([None] * nchild)
        return tuple(out)

    labels = [()]
    layer = [()]
    for _ in range(R):
        layer = [c for v in layer for c in nbrs(v) if c is not None and len(c) > len(v)]
        labels.extend(layer)
    return _from_labels(labels, nbrs, degree, lambda v: len(v) <= L, "regular_tree_ball",
                        {"degree": degree, "L": L})


_BUILDERS = {
    "cycle": _build_cycle,
    "torus_2d": _build_torus,
    "lattice_box": _build_lattice_box,
    "regular_tree_ball": _build_tree,
}


def build(family_tag: str, size_params: dict | None = None, L: int | None = None) -> Graph:
    """Build a graph of the given family; vertex 0 is the origin.

    ``size_params`` keys per family:

    * ``cycle``: ``n`` (length), optional ``arc`` (number of active vertices
      taken in BFS order around the origin).  With only ``L`` the active arc
      is ``B_L`` and ``n`` defaults to ``2L + 3``.
    * ``torus_2d``: ``side``; without ``L`` every vertex is active.
    * ``lattice_box``: ``d`` (default 2); active set is the ℓ¹ ball ``B_L``.
    * ``regular_tree_ball``: ``degree``; ``depth`` or ``L`` gives the radius.
    """
    if family_tag not in _BUILDERS:
        raise GraphError(f"unknown graph family {family_tag!r}; expected one of {FAMILIES}")
    p = dict(size_params or {})
    if L is not None:
        p["L"] = int(L)
    return _BUILDERS[family_tag](p)


def from_config(spec: dict) -> Graph:
    """Build from a ``{"family": ..., "params": {...}, "L": n}`` mapping."""
    try:
        family = spec["family"]
    except KeyError as exc:
        raise GraphError("graph config needs a 'family' field") from exc
    return build(family, spec.get("params", {}), spec.get("L"))


def shares_ids(small: Graph, big: Graph) -> bool:
    """True when ``small``'s active set embeds in ``big`` with identical ids."""
    if small.degree != big.degree or small.vertex_count > big.vertex_count:
        return False
    if small.labels and big.labels and small.labels != big.labels[: small.vertex_count]:
        return False
    ids = small.active_set
    if not big.active[ids].all():
        return False
    return bool(np.array_equal(small.adjacency[ids], big.adjacency[ids]))

