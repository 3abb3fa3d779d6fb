"""Compiled helpers shared by the stabilization kernels: a growable binary
min-heap of int64 keys and an O(1) indexed set."""
import numpy as np
from numba import njit


@njit(cache=True)
def grow(a):
    b = np.empty(2 * a.shape[0] + 16, a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def heap_push(heap, size, key):
    if size == heap.shape[0]:
        heap = grow(heap)
    i = size
    heap[i] = key
    while i > 0:
        p = (i - 1) >> 1
        if heap[p] <= heap[i]:
            break
        heap[p], heap[i] = heap[i], heap[p]
        i = p
    return heap, size + 1


@njit(cache=True)
def heap_pop(heap, size):
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        if left + 1 < size and heap[left + 1] < heap[left]:
            c = left + 1
        if heap[i] <= heap[c]:
            break
        heap[c], heap[i] = heap[i], heap[c]
        i = c
    return size


@njit(cache=True)
def set_add(items, pos, size, v):
    if pos[v] < 0:
        items[size] = v
        pos[v] = size
        size += 1
    return size


@njit(cache=True)
def set_remove(items, pos, size, v):
    i = pos[v]
    if i >= 0:
        size -= 1
        last = items[size]
        items[i] = last
        pos[last] = i
        pos[v] = -1
    return size
