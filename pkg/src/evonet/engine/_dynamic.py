"""Reveal-as-you-go half-edge construction of avoSI and AB-avoSI.

All half-edges start free.  A free infected half-edge pairs with a uniform
free half-edge (other than itself) at rate lam and jumps to a uniform vertex
at rate rho.  Pairing with a susceptible half-edge infects its vertex,
subject to the index rule in the AB variant.

In the time-changed clock the totals become (X - 1) for pairings and
(rho / lam)(X - 1) for jumps, where X is the number of free half-edges; the
choice of the acting half-edge is unchanged.
"""

import numpy as np
from numba import njit

from ..rng import exponential, new_state, randint, uniform
from ._gillespie import (
    EV_BLOCKED,
    EV_INFECT,
    EV_REWIRE,
    EV_STABLE,
    INF,
    N_EVENT_KINDS,
    STATUS_ABSORBED,
    STATUS_BUDGET,
    SUS,
)
from ._structs import (
    final_row,
    iset_add,
    iset_remove,
    iset_sample,
    ll_push,
    ll_unlink,
    record_event,
    record_grid,
)


@njit(cache=True)
def _infect(y, t, state, head, nxt, fdeg, A, fi_mem, fi_pos, fi_sz, sus_by_k, cnt):
    state[y] = INF
    cnt[0] -= 1
    cnt[1] += 1
    sus_by_k[fdeg[y]] -= 1
    h = head[y]
    while h >= 0:
        if A[h] < 0.0:
            A[h] = t
        iset_add(fi_mem, fi_pos, fi_sz, h)
        h = nxt[h]


@njit(cache=True)
def dynamic_kernel(degrees, seed_vertex, lam, rho, use_ab, time_changed, rng_seed, budget,
                   meta, full, dec, grid, kmax):
    st = new_state(rng_seed)
    n = degrees.size
    H = degrees.sum()
    owner = np.empty(H, dtype=np.int64)
    head = np.full(n, -1, dtype=np.int64)
    nxt = np.full(H, -1, dtype=np.int64)
    prv = np.full(H, -1, dtype=np.int64)
    fdeg = degrees.astype(np.int64).copy()
    h = 0
    for v in range(n):
        for _ in range(degrees[v]):
            owner[h] = v
            ll_push(head, nxt, prv, v, h)
            h += 1
    m = max(H, 1)
    f_mem = np.arange(m, dtype=np.int64)
    f_pos = np.arange(m, dtype=np.int64)
    f_sz = np.zeros(1, dtype=np.int64)
    f_sz[0] = H
    fi_mem = np.empty(m, dtype=np.int64)
    fi_pos = np.full(m, -1, dtype=np.int64)
    fi_sz = np.zeros(1, dtype=np.int64)
    state = np.zeros(n, dtype=np.int8)
    sus_by_k = np.zeros(H + 2, dtype=np.int64)
    for v in range(n):
        sus_by_k[fdeg[v]] += 1
    A = np.full(m, -1.0)
    B = np.full(m, -np.inf)
    counts = np.zeros(N_EVENT_KINDS, dtype=np.int64)
    cnt = np.zeros(2, dtype=np.int64)  # S, I
    cnt[0] = n
    tx_a = np.full(n, np.nan)
    tx_b = np.full(n, np.nan)
    ratio = rho / lam if lam > 0.0 else 0.0

    t = 0.0
    _infect(seed_vertex, t, state, head, nxt, fdeg, A, fi_mem, fi_pos, fi_sz, sus_by_k, cnt)

    status = STATUS_ABSORBED
    n_events = 0
    X = f_sz[0]
    XI = fi_sz[0]
    if time_changed:
        rate = (X - 1) * (1.0 + ratio) if (XI > 0 and X > 1) else 0.0
    else:
        rate = XI * (lam + rho) if X > 1 else 0.0
    record_event(meta, full, dec, t, cnt[0], cnt[1], 0, X, XI, rate, sus_by_k)
    while True:
        X = f_sz[0]
        XI = fi_sz[0]
        if XI == 0 or X <= 1:
            break
        if time_changed:
            r_pair = float(X - 1)
            r_rew = ratio * (X - 1)
        else:
            r_pair = lam * XI
            r_rew = rho * XI
        total = r_pair + r_rew
        if total <= 0.0:
            break
        if n_events >= budget:
            status = STATUS_BUDGET
            break
        t_next = t + exponential(st, total)
        record_grid(meta, full, grid, t_next, cnt[0], cnt[1], 0, X, XI, total, sus_by_k)
        t = t_next
        h1 = iset_sample(fi_mem, fi_sz, st)
        if uniform(st) * total < r_pair:
            h2 = h1
            while h2 == h1:
                h2 = iset_sample(f_mem, f_sz, st)
            x = owner[h1]
            y = owner[h2]
            for hh in (h1, h2):
                iset_remove(f_mem, f_pos, f_sz, hh)
                iset_remove(fi_mem, fi_pos, fi_sz, hh)
                w = owner[hh]
                if state[w] == SUS:
                    sus_by_k[fdeg[w]] -= 1
                    sus_by_k[fdeg[w] - 1] += 1
                fdeg[w] -= 1
                ll_unlink(head, nxt, prv, w, hh)
            if state[y] == SUS:
                if use_ab and not A[h1] > B[h2]:
                    counts[EV_BLOCKED] += 1
                else:
                    tx_a[y] = A[h1]
                    tx_b[y] = B[h2]
                    _infect(y, t, state, head, nxt, fdeg, A, fi_mem, fi_pos, fi_sz, sus_by_k, cnt)
                    counts[EV_INFECT] += 1
            else:
                counts[EV_STABLE] += 1
        else:
            x = owner[h1]
            target = randint(st, n)
            B[h1] = t
            if target != x:
                fdeg[x] -= 1
                ll_unlink(head, nxt, prv, x, h1)
                if state[target] == SUS:
                    sus_by_k[fdeg[target]] -= 1
                    sus_by_k[fdeg[target] + 1] += 1
                    iset_remove(fi_mem, fi_pos, fi_sz, h1)
                fdeg[target] += 1
                ll_push(head, nxt, prv, target, h1)
                owner[h1] = target
            counts[EV_REWIRE] += 1
        n_events += 1
        X = f_sz[0]
        XI = fi_sz[0]
        if time_changed:
            rate = (X - 1) * (1.0 + ratio) if (XI > 0 and X > 1) else 0.0
        else:
            rate = XI * (lam + rho) if X > 1 else 0.0
        record_event(meta, full, dec, t, cnt[0], cnt[1], 0, X, XI, rate, sus_by_k)

    X = f_sz[0]
    XI = fi_sz[0]
    record_grid(meta, full, grid, np.inf, cnt[0], cnt[1], 0, X, XI, 0.0, sus_by_k)
    last = final_row(t, cnt[0], cnt[1], 0, X, XI, sus_by_k, kmax)
    return state, counts, t, status, last, A, B, tx_a, tx_b
