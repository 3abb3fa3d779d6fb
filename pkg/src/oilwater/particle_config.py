"""Oil/water/ghost occupation numbers, initial laws and odometers."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .graph import Graph


@dataclass
class ParticleConfig:
    oil: np.ndarray
    water: np.ndarray

    def __post_init__(self):
        self.oil = np.asarray(self.oil, dtype=np.int64)
        self.water = np.asarray(self.water, dtype=np.int64)
        if self.oil.shape != self.water.shape:
            raise ValueError("oil and water arrays must have the same length")
        if (self.oil < 0).any() or (self.water < 0).any():
            raise ValueError("particle counts must be non-negative")

    @classmethod
    def empty(cls, n: int) -> "ParticleConfig":
        return cls(np.zeros(n, np.int64), np.zeros(n, np.int64))

    def __len__(self):
        return self.oil.shape[0]

    def copy(self) -> "ParticleConfig":
        return ParticleConfig(self.oil.copy(), self.water.copy())

    def snapshot(self) -> "ParticleConfig":
        c = self.copy()
        c.oil.flags.writeable = False
        c.water.flags.writeable = False
        return c

    def pairs(self) -> np.ndarray:
        return np.minimum(self.oil, self.water)

    def unstable(self, g: Graph) -> np.ndarray:
        return np.flatnonzero(g.active & (self.pairs() > 0))

    def is_stable_in(self, g: Graph) -> bool:
        return not (g.active & (self.pairs() > 0)).any()

    def totals(self) -> tuple[int, int]:
        return int(self.oil.sum()), int(self.water.sum())

    def __le__(self, other: "ParticleConfig") -> bool:
        return bool((self.oil <= other.oil).all() and (self.water <= other.water).all())

    def __eq__(self, other):
        if not isinstance(other, ParticleConfig):
            return NotImplemented
        return np.array_equal(self.oil, other.oil) and np.array_equal(self.water, other.water)

    def to_json(self) -> str:
        return json.dumps({"oil": self.oil.tolist(), "water": self.water.tolist(),
                           "ghost": [0] * len(self)})

    @classmethod
    def from_json(cls, text: str) -> "ParticleConfig":
        d = json.loads(text)
        if any(d.get("ghost", [])):
            raise ValueError("plain configuration cannot carry ghosts")
        return cls(d["oil"], d["water"])


@dataclass
class ExtendedConfig:
    base: ParticleConfig
    ghost: np.ndarray

    def __post_init__(self):
        self.ghost = np.asarray(self.ghost, dtype=np.int64)
        if self.ghost.shape != self.base.oil.shape:
            raise ValueError("ghost array length must match the base configuration")
        if (self.ghost < 0).any():
            raise ValueError("ghost counts must be non-negative")

    @classmethod
    def from_base(cls, base: ParticleConfig) -> "ExtendedConfig":
        return cls(base.copy(), np.zeros(len(base), np.int64))

    @property
    def oil(self):
        return self.base.oil

    @property
    def water(self):
        return self.base.water

    def to_json(self) -> str:
        return json.dumps({"oil": self.oil.tolist(), "water": self.water.tolist(),
                           "ghost": self.ghost.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ExtendedConfig":
        d = json.loads(text)
        ghost = d.get("ghost") or [0] * len(d["oil"])
        return cls(ParticleConfig(d["oil"], d["water"]), ghost)


# per-site queries ---------------------------------------------------------

def pairs(c: ParticleConfig, x: int) -> int:
    return int(min(c.oil[x], c.water[x]))


def unpaired(c: ParticleConfig, x: int) -> int:
    return int(abs(c.oil[x] - c.water[x]))


def is_hole(c: ParticleConfig, x: int) -> bool:
    # equal counts, not necessarily empty
    return bool(c.oil[x] == c.water[x])


def is_stable(c: ParticleConfig, x: int) -> bool:
    return pairs(c, x) == 0


# initial laws --------------------------------------------------------------

@dataclass(frozen=True)
class DensitySpec:
    """Per-vertex, per-species law: ``fixed``, ``bernoulli`` or ``poisson``.

    ``mu`` is the expected total number of particles (oil plus water) per
    vertex.  Sampling is by inverse CDF from shared uniforms, so for a fixed
    seed a larger parameter gives a pointwise larger configuration.
    """

    law: str
    k_o: int = 0
    k_w: int = 0
    p: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.law not in ("fixed", "bernoulli", "poisson"):
            raise ValueError(f"unknown law {self.law!r}")
        if self.law == "fixed" and (self.k_o < 0 or self.k_w < 0):
            raise ValueError("fixed counts must be non-negative")
        if self.law == "bernoulli" and not 0.0 <= self.p <= 1.0:
            raise ValueError("bernoulli p must lie in [0, 1]")
        if self.law == "poisson" and not (self.lam >= 0.0 and np.isfinite(self.lam)):
            raise ValueError("poisson rate must be finite and non-negative")

    @classmethod
    def fixed(cls, k_o: int, k_w: int) -> "DensitySpec":
        return cls("fixed", k_o=int(k_o), k_w=int(k_w))

    @classmethod
    def bernoulli(cls, p: float) -> "DensitySpec":
        return cls("bernoulli", p=float(p))

    @classmethod
    def poisson(cls, lam: float) -> "DensitySpec":
        return cls("poisson", lam=float(lam))

    @classmethod
    def from_mu(cls, mu: float) -> "DensitySpec":
        """Poisson law with total density ``mu`` (rate ``mu/2`` per species)."""
        return cls.poisson(mu / 2.0)

    @classmethod
    def from_dict(cls, d: dict) -> "DensitySpec":
        law = d["law"]
        if law == "fixed":
            return cls.fixed(d.get("k_o", 0), d.get("k_w", 0))
        if law == "bernoulli":
            return cls.bernoulli(d["p"])
        if law == "poisson":
            if "lam" in d:
                return cls.poisson(d["lam"])
            return cls.from_mu(d["mu"])
        raise ValueError(f"unknown law {law!r}")

    def to_dict(self) -> dict:
        if self.law == "fixed":
            return {"law": "fixed", "k_o": self.k_o, "k_w": self.k_w}
        if self.law == "bernoulli":
            return {"law": "bernoulli", "p": self.p}
        return {"law": "poisson", "lam": self.lam}

    @property
    def mu(self) -> float:
        if self.law == "fixed":
            return float(self.k_o + self.k_w)
        if self.law == "bernoulli":
            return 2.0 * self.p
        return 2.0 * self.lam

    def from_uniform(self, u: np.ndarray, species: int) -> np.ndarray:
        """Inverse-CDF counts; ``species`` 0 is oil, 1 is water."""
        if self.law == "fixed":
            return np.full(u.shape, self.k_o if species == 0 else self.k_w, np.int64)
        if self.law == "bernoulli":
            return (u < self.p).astype(np.int64)
        if self.lam == 0.0:
            return np.zeros(u.shape, np.int64)
        return np.maximum(stats.poisson.ppf(u, self.lam), 0).astype(np.int64)


def site_uniforms(g: Graph, seed, run: int = 0) -> np.ndarray:
    """Shape ``(n, 2)`` uniforms shared by every density for coupled sampling."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(run)]))
    return rng.random((g.vertex_count, 2))


def sample_initial(g: Graph, spec: DensitySpec, seed=0, run: int = 0,
                   uniforms: np.ndarray | None = None) -> ParticleConfig:
    """I.i.d. counts on active vertices; sinks and exterior start empty."""
    u = site_uniforms(g, seed, run) if uniforms is None else uniforms
    oil = np.where(g.active, spec.from_uniform(u[:, 0], 0), 0)
    water = np.where(g.active, spec.from_uniform(u[:, 1], 1), 0)
    return ParticleConfig(oil, water)


# odometer ------------------------------------------------------------------

@dataclass
class Odometer:
    """Per-vertex counters of one run.

    ``fires`` counts pair firings, ``pair_or_ghost_jumps`` counts pair and
    ghost jumps, ``ghost_jumps`` ghost jumps only, ``ghosts_created`` ghosts
    started at the vertex and ``waters_into_hole_at`` waters landing on a hole.
    """

    fires: np.ndarray
    pair_or_ghost_jumps: np.ndarray = field(default=None)
    ghost_jumps: np.ndarray = field(default=None)
    ghosts_created: np.ndarray = field(default=None)
    waters_into_hole_at: np.ndarray = field(default=None)

    def __post_init__(self):
        self.fires = np.asarray(self.fires, np.int64)
        n = len(self.fires)
        for name in ("ghost_jumps", "ghosts_created", "waters_into_hole_at"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(n, np.int64))
        if self.pair_or_ghost_jumps is None:
            # without ghosts every jump is a firing
            self.pair_or_ghost_jumps = self.fires + self.ghost_jumps

    def bookkeeping_holds(self) -> bool:
        return bool(np.array_equal(self.fires, self.pair_or_ghost_jumps - self.ghost_jumps))

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in
                ("fires", "pair_or_ghost_jumps", "ghost_jumps", "ghosts_created", "waters_into_hole_at")}
