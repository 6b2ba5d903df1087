"""Clock-driven SI kernel for running several variants on shared randomness.

Every activation (e, l) of an edge owns the clocks T, R, U, V' read from the
keyed generator, so delSI, evoSI, avoSI and AB-avoSI driven by the same seed
see identical variables whenever they activate the same edge for the same
time.  Pending edge events sit in a heap; stale entries are skipped by a
per-edge version stamp.
"""

import heapq

import numpy as np
from numba import njit

from ..rng import keyed_bits, keyed_uniform
from ._gillespie import (
    EV_BLOCKED,
    EV_DROP,
    EV_INFECT,
    EV_REWIRE,
    EV_STABLE,
    INF,
    N_EVENT_KINDS,
    STATUS_ABSORBED,
    STATUS_BUDGET,
    SUS,
)
from ._structs import ll_push, ll_unlink

V_DEL, V_EVO, V_AVO, V_AB = 0, 1, 2, 3

SLOT_T, SLOT_R, SLOT_U, SLOT_V = 0, 1, 2, 3

CAT_NONE, CAT_SI, CAT_II = 0, 1, 2


@njit(cache=True)
def clock_t(seed, e, ell, lam):
    if lam <= 0.0:
        return np.inf
    return -np.log1p(-keyed_uniform(seed, e, ell, SLOT_T)) / lam


@njit(cache=True)
def clock_r(seed, e, ell, rho):
    if rho <= 0.0:
        return np.inf
    return -np.log1p(-keyed_uniform(seed, e, ell, SLOT_R)) / rho


@njit(cache=True)
def clock_u(seed, e, ell, n):
    k = np.int64(keyed_uniform(seed, e, ell, SLOT_U) * n)
    return k if k < n else n - 1


@njit(cache=True)
def clock_v(seed, e, ell):
    return np.int64(keyed_bits(seed, e, ell, SLOT_V) & np.uint64(1))


@njit(cache=True)
def coupled_kernel(n, n_edges, owner, head, nxt, prv, seed_vertex, variant,
                   lam, rho, bundle_seed, budget):
    unstable = variant == V_AVO or variant == V_AB
    m = max(n_edges, 1)
    state = np.zeros(n, dtype=np.int8)
    counts = np.zeros(N_EVENT_KINDS, dtype=np.int64)
    ell = np.zeros(m, dtype=np.int64)
    tau = np.zeros(m)
    s_clock = np.full(m, np.inf)   # min(T, R) of the current activation
    t_wins = np.zeros(m, dtype=np.bool_)
    cat = np.zeros(m, dtype=np.int8)
    stable = np.zeros(m, dtype=np.bool_)
    dropped = np.zeros(m, dtype=np.bool_)
    version = np.zeros(m, dtype=np.int64)
    A = np.full(owner.size, -1.0)
    B = np.full(owner.size, -np.inf)
    heap = [(0.0, np.int64(0), np.int64(0))]
    heap.pop()

    now = 0.0
    # pending infections are processed through this small stack so that
    # activation order inside one instant is deterministic
    stack = np.empty(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)  # edge that carried each infection
    sp = 0
    stack[sp] = seed_vertex
    sp += 1
    status = STATUS_ABSORBED
    n_events = 0
    first = True
    while True:
        while sp > 0:
            sp -= 1
            v = stack[sp]
            state[v] = INF
            h = head[v]
            while h >= 0:
                if A[h] < 0.0:
                    A[h] = now
                if h < 2 * n_edges:
                    e = h >> 1
                    if not (dropped[e] or stable[e]):
                        other = owner[h ^ 1]
                        if cat[e] == CAT_NONE:
                            if other != v and state[other] == SUS:
                                _activate(e, now, False, ell, tau, s_clock, t_wins, cat, version, heap, bundle_seed, lam, rho)
                            elif other == v and unstable:
                                _activate(e, now, True, ell, tau, s_clock, t_wins, cat, version, heap, bundle_seed, lam, rho)
                        elif cat[e] == CAT_SI:
                            if unstable:
                                # halve the residual of the running activation
                                w = now - tau[e]
                                cat[e] = CAT_II
                                version[e] += 1
                                heapq.heappush(heap, (now + (s_clock[e] - w) / 2.0, e, version[e]))
                            else:
                                cat[e] = CAT_NONE
                                version[e] += 1
                h = nxt[h]
            if not first:
                counts[EV_INFECT] += 1
            first = False
        if len(heap) == 0:
            break
        if n_events >= budget:
            status = STATUS_BUDGET
            break
        when, e, ver = heapq.heappop(heap)
        if ver != version[e]:
            continue
        now = when
        n_events += 1
        version[e] += 1
        if cat[e] == CAT_SI:
            hx = 2 * e if state[owner[2 * e]] == INF else 2 * e + 1
            hy = hx ^ 1
            if t_wins[e]:
                stable[e] = True
                cat[e] = CAT_NONE
                if variant == V_AB and not A[hx] > B[hy]:
                    counts[EV_BLOCKED] += 1
                else:
                    stack[sp] = owner[hy]
                    parent[owner[hy]] = e
                    sp += 1
            elif variant == V_DEL:
                dropped[e] = True
                cat[e] = CAT_NONE
                ll_unlink(head, nxt, prv, owner[hx], hx)
                ll_unlink(head, nxt, prv, owner[hy], hy)
                counts[EV_DROP] += 1
            else:
                target = clock_u(bundle_seed, e, ell[e], n)
                _move(hx, target, owner, head, nxt, prv)
                B[hx] = now
                counts[EV_REWIRE] += 1
                if state[target] == INF:
                    _activate(e, now, False, ell, tau, s_clock, t_wins, cat, version, heap, bundle_seed, lam, rho)
                else:
                    cat[e] = CAT_NONE
        else:
            if t_wins[e]:
                stable[e] = True
                cat[e] = CAT_NONE
                counts[EV_STABLE] += 1
            else:
                keep = 2 * e + clock_v(bundle_seed, e, ell[e])
                mv = keep ^ 1
                target = clock_u(bundle_seed, e, ell[e], n)
                _move(mv, target, owner, head, nxt, prv)
                B[mv] = now
                counts[EV_REWIRE] += 1
                _activate(e, now, state[target] == INF, ell, tau, s_clock, t_wins, cat, version, heap, bundle_seed, lam, rho)

    return state, counts, now, status, ell, A, B, parent


@njit(cache=True)
def _activate(e, now, both_infected, ell, tau, s_clock, t_wins, cat, version, heap, seed, lam, rho):
    ell[e] += 1
    T = clock_t(seed, e, ell[e], lam)
    R = clock_r(seed, e, ell[e], rho)
    tau[e] = now
    s_clock[e] = min(T, R)
    t_wins[e] = T < R
    version[e] += 1
    if both_infected:
        cat[e] = CAT_II
        when = now + s_clock[e] / 2.0
    else:
        cat[e] = CAT_SI
        when = now + s_clock[e]
    if when < np.inf:
        heapq.heappush(heap, (when, e, version[e]))


@njit(cache=True)
def _move(h, new_v, owner, head, nxt, prv):
    old = owner[h]
    if old != new_v:
        ll_unlink(head, nxt, prv, old, h)
        ll_push(head, nxt, prv, new_v, h)
        owner[h] = new_v
