"""Array-backed containers shared by the simulation kernels.

Indexed set: ``members[0:size[0]]`` holds the elements, ``pos[x]`` is the
slot of ``x`` or -1.  Add, remove and uniform sampling are O(1).

Vertex lists: intrusive doubly linked lists over half-edge ids, same layout
as ``HalfEdgeGraph``.

Recorder: one row is ``t, S, I, R, X, X_I, total_rate, S_0 .. S_kmax``.
"""

import numpy as np
from numba import njit

from ..rng import randint

FULL_ROWS = 10_000
DEC_ROWS = 4096
META_COLS = 7

REC_NONE = 0
REC_ADAPTIVE = 1
REC_GRID = 2
REC_EVERY = 3


@njit(cache=True)
def iset_add(members, pos, size, x):
    if pos[x] >= 0:
        return
    members[size[0]] = x
    pos[x] = size[0]
    size[0] += 1


@njit(cache=True)
def iset_remove(members, pos, size, x):
    i = pos[x]
    if i < 0:
        return
    last = members[size[0] - 1]
    members[i] = last
    pos[last] = i
    pos[x] = -1
    size[0] -= 1


@njit(cache=True)
def iset_sample(members, size, state):
    return members[randint(state, size[0])]


@njit(cache=True)
def ll_unlink(head, nxt, prv, v, h):
    p = prv[h]
    q = nxt[h]
    if p >= 0:
        nxt[p] = q
    else:
        head[v] = q
    if q >= 0:
        prv[q] = p
    nxt[h] = -1
    prv[h] = -1


@njit(cache=True)
def ll_push(head, nxt, prv, v, h):
    first = head[v]
    nxt[h] = first
    prv[h] = -1
    if first >= 0:
        prv[first] = h
    head[v] = h


# recorder ---------------------------------------------------------------
# meta = [mode, n_full, n_dec, stride, n_calls, grid_ptr]


@njit(cache=True)
def new_meta(mode):
    meta = np.zeros(6, dtype=np.int64)
    meta[0] = mode
    meta[3] = 1
    return meta


@njit(cache=True)
def _write(buf, i, t, S, I, R, X, XI, rate, sus_by_k):
    buf[i, 0] = t
    buf[i, 1] = S
    buf[i, 2] = I
    buf[i, 3] = R
    buf[i, 4] = X
    buf[i, 5] = XI
    buf[i, 6] = rate
    kcols = buf.shape[1] - META_COLS
    for k in range(kcols):
        buf[i, META_COLS + k] = sus_by_k[k] if k < sus_by_k.size else 0.0


@njit(cache=True)
def record_event(meta, full, dec, t, S, I, R, X, XI, rate, sus_by_k):
    """Log the state after an event (or the initial state) in adaptive/every mode."""
    mode = meta[0]
    if mode == REC_EVERY:
        if meta[1] < full.shape[0]:
            _write(full, meta[1], t, S, I, R, X, XI, rate, sus_by_k)
            meta[1] += 1
        return
    if mode != REC_ADAPTIVE:
        return
    if meta[1] < full.shape[0]:
        _write(full, meta[1], t, S, I, R, X, XI, rate, sus_by_k)
        meta[1] += 1
    if meta[4] % meta[3] == 0:
        _write(dec, meta[2], t, S, I, R, X, XI, rate, sus_by_k)
        meta[2] += 1
        if meta[2] == dec.shape[0]:
            # keep every other row and double the stride
            half = dec.shape[0] // 2
            for j in range(half):
                dec[j, :] = dec[2 * j, :]
            meta[2] = half
            meta[3] *= 2
    meta[4] += 1


@njit(cache=True)
def record_grid(meta, full, grid, t_next, S, I, R, X, XI, rate, sus_by_k):
    """In grid mode, emit the current state at every grid time before t_next."""
    if meta[0] != REC_GRID:
        return
    g = meta[5]
    while g < grid.size and grid[g] < t_next:
        _write(full, meta[1], grid[g], S, I, R, X, XI, rate, sus_by_k)
        meta[1] += 1
        g += 1
    meta[5] = g


@njit(cache=True)
def final_row(t, S, I, R, X, XI, sus_by_k, kmax):
    row = np.zeros((1, META_COLS + kmax + 1))
    _write(row, 0, t, S, I, R, X, XI, 0.0, sus_by_k)
    return row


def alloc_buffers(mode: int, kmax: int, grid: np.ndarray, budget: int):
    width = META_COLS + kmax + 1
    if mode == REC_ADAPTIVE:
        return np.zeros((FULL_ROWS, width)), np.zeros((DEC_ROWS, width))
    if mode == REC_GRID:
        return np.zeros((grid.size, width)), np.zeros((0, width))
    if mode == REC_EVERY:
        return np.zeros((budget + 1, width)), np.zeros((0, width))
    return np.zeros((0, width)), np.zeros((0, width))


def collect_samples(mode, meta, full, dec, last):
    """Assemble the recorded rows as one array (last row = final state)."""
    if mode == REC_NONE:
        return None
    if mode == REC_ADAPTIVE:
        rows = full[: meta[1]] if meta[4] <= full.shape[0] else dec[: meta[2]]
        return np.vstack([rows, last])
    if mode == REC_GRID:
        return full[: meta[1]].copy()
    return np.vstack([full[: meta[1]], last])
