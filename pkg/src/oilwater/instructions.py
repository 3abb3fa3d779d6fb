"""Keyed instruction array and the firing operator.

The array is never materialised.  Instruction ``j`` at vertex ``x`` is a pure
function of ``(seed, run, stream, x, j)``::

    base  = mix(mix(seed) ^ mix(run + 1))        # per-run key
    key   = mix(base ^ stream)                   # species / purpose tag
    word  = mix(mix(key ^ x) ^ j)                # 64-bit output
    oil   = (low32(word)  * degree) >> 32        # neighbor slot of the oil
    water = (high32(word) * degree) >> 32        # neighbor slot of the water

where ``mix`` is the SplitMix64 finaliser.  Firing indices start at 1, so the
first firing of ``x`` reads ``j = 1``.  Ghost jumps read the ``GHOST`` stream
(slot from ``low32``) and are indexed by the ghost-jump count at ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import Graph
from .particle_config import ParticleConfig

MASK64 = (1 << 64) - 1

PAIR = 1
GHOST = 2
STRATEGY = 3
WALK = 4
SCHEDULER = 5

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_LO = np.uint64(0xFFFFFFFF)
_ONE = np.uint64(1)


@njit(cache=True, inline="always")
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def run_key(seed, run):
    return mix64(mix64(np.uint64(seed)) ^ mix64(np.uint64(run) + _ONE))


@njit(cache=True, inline="always")
def stream_key(base, stream):
    return mix64(np.uint64(base) ^ np.uint64(stream))


@njit(cache=True, inline="always")
def word(key, x, j):
    return mix64(mix64(np.uint64(key) ^ np.uint64(x)) ^ np.uint64(j))


@njit(cache=True, inline="always")
def slot_lo(w, m):
    return np.int64(((w & _LO) * np.uint64(m)) >> _S32)


@njit(cache=True, inline="always")
def slot_hi(w, m):
    return np.int64(((w >> _S32) * np.uint64(m)) >> _S32)


def _py_mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def reference_pair(seed: int, run: int, x: int, j: int, degree: int) -> tuple[int, int]:
    """Pure-Python evaluation of the documented construction."""
    base = _py_mix64(_py_mix64(seed) ^ _py_mix64(run + 1))
    key = _py_mix64(base ^ PAIR)
    w = _py_mix64(_py_mix64(key ^ x) ^ j)
    return ((w & 0xFFFFFFFF) * degree) >> 32, ((w >> 32) * degree) >> 32


@njit(cache=True)
def _pair_batch(key, x, js, degree):
    out = np.empty((js.shape[0], 2), np.int64)
    for i in range(js.shape[0]):
        w = word(key, x, js[i])
        out[i, 0] = slot_lo(w, degree)
        out[i, 1] = slot_hi(w, degree)
    return out


@njit(cache=True)
def _lo_batch(key, x, js, degree):
    out = np.empty(js.shape[0], np.int64)
    for i in range(js.shape[0]):
        out[i] = slot_lo(word(key, x, js[i]), degree)
    return out


@dataclass(frozen=True)
class InstructionArray:
    """Read-only view of the instruction array for one ``(seed, run)``."""

    seed: int
    run: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & MASK64)
        if self.run < 0:
            raise ValueError("run index must be non-negative")

    @property
    def base(self) -> np.uint64:
        return np.uint64(run_key(np.uint64(self.seed), np.uint64(self.run)))

    def key(self, stream: int) -> np.uint64:
        return np.uint64(stream_key(self.base, np.uint64(stream)))

    def for_run(self, run: int) -> "InstructionArray":
        return InstructionArray(self.seed, run)

    def pair(self, x: int, j: int, degree: int) -> tuple[int, int]:
        """Neighbor slots ``(oil, water)`` of the ``j``-th firing at ``x``."""
        out = _pair_batch(self.key(PAIR), np.int64(x), np.array([j], np.int64), degree)
        return int(out[0, 0]), int(out[0, 1])

    def pairs(self, x: int, js, degree: int) -> np.ndarray:
        return _pair_batch(self.key(PAIR), np.int64(x), np.asarray(js, np.int64), degree)

    def ghost(self, x: int, j: int, degree: int) -> int:
        return int(_lo_batch(self.key(GHOST), np.int64(x), np.array([j], np.int64), degree)[0])

    def ghosts(self, x: int, js, degree: int) -> np.ndarray:
        return _lo_batch(self.key(GHOST), np.int64(x), np.asarray(js, np.int64), degree)


class IllegalFiring(RuntimeError):
    """Firing a stable vertex or a vertex outside the active set."""


class FiringCounter:
    """``h[x]``: instruction pairs consumed at ``x`` so far."""

    def __init__(self, n: int):
        self.h = np.zeros(n, np.int64)

    def __getitem__(self, x):
        return self.h[x]


def fire(g: Graph, c: ParticleConfig, h: FiringCounter, tau: InstructionArray, x: int):
    """Apply the firing operator at ``x`` in place and return ``(c, h)``."""
    x = int(x)
    if not g.active[x]:
        raise IllegalFiring(f"vertex {x} is not in the active set")
    if min(c.oil[x], c.water[x]) == 0:
        raise IllegalFiring(f"vertex {x} is stable")
    so, sw = tau.pair(x, int(h.h[x]) + 1, g.degree)
    yo, yw = g.adjacency[x, so], g.adjacency[x, sw]
    c.oil[x] -= 1
    c.water[x] -= 1
    c.oil[yo] += 1
    c.water[yw] += 1
    h.h[x] += 1
    return c, h
