"""Aggregate-rate event kernels for static graphs.

``basic_kernel`` covers models whose only active edges are S-I edges
(delSI/evoSI, their SIR versions and SIR-omega).  ``unstable_kernel`` adds the
unstable I-I edges of avoSI and the index rule of AB-avoSI.  Both pick an
event category from the totals and then a uniform member of that category,
which is exact because every per-edge clock is memoryless.
"""

import numpy as np
from numba import njit

from ..rng import exponential, new_state, randint, uniform
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

SUS, INF, REC = 0, 1, 2

# event-count slots
EV_INFECT, EV_REWIRE, EV_DROP, EV_RECOVER, EV_BLOCKED, EV_STABLE = 0, 1, 2, 3, 4, 5
N_EVENT_KINDS = 6

STATUS_ABSORBED, STATUS_BUDGET = 0, 1

# cnt slots
C_S, C_I, C_R, C_X, C_XI = 0, 1, 2, 3, 4


@njit(cache=True)
def init_degrees(n, n_edges, owner, alive):
    deg = np.zeros(n, dtype=np.int64)
    for h in range(owner.size):
        if h < 2 * n_edges and not alive[h >> 1]:
            continue
        deg[owner[h]] += 1
    return deg


@njit(cache=True)
def init_sus_by_k(deg, state, size):
    sus = np.zeros(size, dtype=np.int64)
    for v in range(deg.size):
        if state[v] == SUS:
            sus[deg[v]] += 1
    return sus


@njit(cache=True)
def move_half_edge(h, new_v, owner, head, nxt, prv, deg, state, sus_by_k, cnt):
    """Reattach half-edge h to new_v, keeping degree and X_I bookkeeping."""
    old = owner[h]
    if state[old] == SUS:
        sus_by_k[deg[old]] -= 1
        sus_by_k[deg[old] - 1] += 1
    elif state[old] == INF:
        cnt[C_XI] -= 1
    deg[old] -= 1
    if state[new_v] == SUS:
        sus_by_k[deg[new_v]] -= 1
        sus_by_k[deg[new_v] + 1] += 1
    elif state[new_v] == INF:
        cnt[C_XI] += 1
    deg[new_v] += 1
    if old != new_v:
        ll_unlink(head, nxt, prv, old, h)
        ll_push(head, nxt, prv, new_v, h)
        owner[h] = new_v


@njit(cache=True)
def remove_half_edge(h, owner, head, nxt, prv, deg, state, sus_by_k, cnt):
    v = owner[h]
    if state[v] == SUS:
        sus_by_k[deg[v]] -= 1
        sus_by_k[deg[v] - 1] += 1
    elif state[v] == INF:
        cnt[C_XI] -= 1
    deg[v] -= 1
    cnt[C_X] -= 1
    ll_unlink(head, nxt, prv, v, h)


@njit(cache=True)
def basic_kernel(n, n_edges, owner, head, nxt, prv, alive, rewires, seed_vertex,
                 lam, rho, gamma, p_rw, fixed, rng_seed, budget,
                 meta, full, dec, grid, kmax):
    st = new_state(rng_seed)
    H = owner.size
    state = np.zeros(n, dtype=np.int8)
    deg = init_degrees(n, n_edges, owner, alive)
    sus_by_k = init_sus_by_k(deg, state, H + 1)
    cnt = np.zeros(5, dtype=np.int64)
    cnt[C_S] = n
    cnt[C_X] = deg.sum()
    counts = np.zeros(N_EVENT_KINDS, dtype=np.int64)

    a_mem = np.empty(max(n_edges, 1), dtype=np.int64)
    a_pos = np.full(max(n_edges, 1), -1, dtype=np.int64)
    a_sz = np.zeros(1, dtype=np.int64)
    iv_mem = np.empty(n, dtype=np.int64)
    iv_pos = np.full(n, -1, dtype=np.int64)
    iv_sz = np.zeros(1, dtype=np.int64)
    # fixed-duration recoveries form a FIFO since durations are equal
    rq_t = np.empty(n)
    rq_v = np.empty(n, dtype=np.int64)
    rq_head = 0
    rq_tail = 0
    recover_exp = gamma > 0.0 and not fixed

    t = 0.0
    # --- infect the seed
    v = seed_vertex
    state[v] = INF
    cnt[C_S] -= 1
    cnt[C_I] += 1
    sus_by_k[deg[v]] -= 1
    cnt[C_XI] += deg[v]
    if fixed:
        rq_t[rq_tail] = 1.0
        rq_v[rq_tail] = v
        rq_tail += 1
    elif recover_exp:
        iset_add(iv_mem, iv_pos, iv_sz, v)
    h = head[v]
    while h >= 0:
        if h < 2 * n_edges and alive[h >> 1]:
            o = owner[h ^ 1]
            if state[o] == SUS:
                iset_add(a_mem, a_pos, a_sz, h >> 1)
        h = nxt[h]

    rate = a_sz[0] * (lam + rho) + (gamma * iv_sz[0] if recover_exp else 0.0)
    record_event(meta, full, dec, t, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], rate, sus_by_k)
    status = STATUS_ABSORBED
    n_events = 0
    while True:
        n_act = a_sz[0]
        r_edges = n_act * (lam + rho)
        r_rec = gamma * iv_sz[0] if recover_exp else 0.0
        total = r_edges + r_rec
        t_fix = rq_t[rq_head] if rq_head < rq_tail else np.inf
        if total <= 0.0 and t_fix == np.inf:
            break
        t_next = t + exponential(st, total)
        if n_events >= budget:
            status = STATUS_BUDGET
            break
        if t_fix <= t_next:
            record_grid(meta, full, grid, t_fix, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], total, sus_by_k)
            t = t_fix
            v = rq_v[rq_head]
            rq_head += 1
            kind = 3
        else:
            record_grid(meta, full, grid, t_next, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], total, sus_by_k)
            t = t_next
            u = uniform(st) * total
            if u < n_act * lam:
                kind = 0
            elif u < r_edges:
                kind = 1
            else:
                kind = 3
                v = iset_sample(iv_mem, iv_sz, st)

        if kind == 3:
            # recovery of v
            state[v] = REC
            cnt[C_I] -= 1
            cnt[C_R] += 1
            cnt[C_XI] -= deg[v]
            iset_remove(iv_mem, iv_pos, iv_sz, v)
            h = head[v]
            while h >= 0:
                if h < 2 * n_edges:
                    iset_remove(a_mem, a_pos, a_sz, h >> 1)
                h = nxt[h]
            counts[EV_RECOVER] += 1
        else:
            e = iset_sample(a_mem, a_sz, st)
            h0 = 2 * e
            if state[owner[h0]] == INF:
                hx = h0
            else:
                hx = h0 + 1
            hy = hx ^ 1
            if kind == 0:
                y = owner[hy]
                state[y] = INF
                cnt[C_S] -= 1
                cnt[C_I] += 1
                sus_by_k[deg[y]] -= 1
                cnt[C_XI] += deg[y]
                if fixed:
                    rq_t[rq_tail] = t + 1.0
                    rq_v[rq_tail] = y
                    rq_tail += 1
                elif recover_exp:
                    iset_add(iv_mem, iv_pos, iv_sz, y)
                h = head[y]
                while h >= 0:
                    if h < 2 * n_edges and alive[h >> 1]:
                        o = owner[h ^ 1]
                        if state[o] == SUS:
                            iset_add(a_mem, a_pos, a_sz, h >> 1)
                        else:
                            iset_remove(a_mem, a_pos, a_sz, h >> 1)
                    h = nxt[h]
                counts[EV_INFECT] += 1
            elif p_rw >= 1.0 or (p_rw > 0.0 and uniform(st) < p_rw):
                # the infected end lets go; the susceptible end keeps its half-edge
                target = randint(st, n)
                move_half_edge(hx, target, owner, head, nxt, prv, deg, state, sus_by_k, cnt)
                rewires[e] += 1
                if state[target] != INF:
                    iset_remove(a_mem, a_pos, a_sz, e)
                counts[EV_REWIRE] += 1
            else:
                iset_remove(a_mem, a_pos, a_sz, e)
                alive[e] = False
                remove_half_edge(hx, owner, head, nxt, prv, deg, state, sus_by_k, cnt)
                remove_half_edge(hy, owner, head, nxt, prv, deg, state, sus_by_k, cnt)
                counts[EV_DROP] += 1
        n_events += 1
        rate = a_sz[0] * (lam + rho) + (gamma * iv_sz[0] if recover_exp else 0.0)
        record_event(meta, full, dec, t, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], rate, sus_by_k)

    record_grid(meta, full, grid, np.inf, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], 0.0, sus_by_k)
    last = final_row(t, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], sus_by_k, kmax)
    return state, counts, t, status, last


@njit(cache=True)
def _classify(e, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz):
    if stable[e]:
        iset_remove(a1_mem, a1_pos, a1_sz, e)
        iset_remove(a2_mem, a2_pos, a2_sz, e)
        return
    sa = state[owner[2 * e]] == INF
    sb = state[owner[2 * e + 1]] == INF
    if sa and sb:
        iset_remove(a1_mem, a1_pos, a1_sz, e)
        iset_add(a2_mem, a2_pos, a2_sz, e)
    elif sa or sb:
        iset_remove(a2_mem, a2_pos, a2_sz, e)
        iset_add(a1_mem, a1_pos, a1_sz, e)
    else:
        iset_remove(a1_mem, a1_pos, a1_sz, e)
        iset_remove(a2_mem, a2_pos, a2_sz, e)


@njit(cache=True)
def unstable_kernel(n, n_edges, owner, head, nxt, prv, rewires, seed_vertex,
                    lam, rho, use_ab, rng_seed, budget,
                    meta, full, dec, grid, kmax):
    """avoSI (use_ab False) or AB-avoSI (use_ab True); SI dynamics only."""
    st = new_state(rng_seed)
    H = owner.size
    alive = np.ones(max(n_edges, 1), dtype=np.bool_)
    state = np.zeros(n, dtype=np.int8)
    deg = init_degrees(n, n_edges, owner, alive)
    sus_by_k = init_sus_by_k(deg, state, H + 1)
    cnt = np.zeros(5, dtype=np.int64)
    cnt[C_S] = n
    cnt[C_X] = deg.sum()
    counts = np.zeros(N_EVENT_KINDS, dtype=np.int64)
    stable = np.zeros(max(n_edges, 1), dtype=np.bool_)
    A = np.full(H, -1.0)        # first-infection time, -1 = never infected
    B = np.full(H, -np.inf)     # last-rewiring time, -inf = never rewired
    m = max(n_edges, 1)
    a1_mem = np.empty(m, dtype=np.int64)
    a1_pos = np.full(m, -1, dtype=np.int64)
    a1_sz = np.zeros(1, dtype=np.int64)
    a2_mem = np.empty(m, dtype=np.int64)
    a2_pos = np.full(m, -1, dtype=np.int64)
    a2_sz = np.zeros(1, dtype=np.int64)
    # indices of the half-edge pair each infection crossed, for auditing
    tx_a = np.full(n, np.nan)
    tx_b = np.full(n, np.nan)

    t = 0.0
    y = seed_vertex
    state[y] = INF
    cnt[C_S] -= 1
    cnt[C_I] += 1
    sus_by_k[deg[y]] -= 1
    cnt[C_XI] += deg[y]
    h = head[y]
    while h >= 0:
        if A[h] < 0.0:
            A[h] = t
        if h < 2 * n_edges:
            _classify(h >> 1, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz)
        h = nxt[h]

    rate = (a1_sz[0] + 2 * a2_sz[0]) * (lam + rho)
    record_event(meta, full, dec, t, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], rate, sus_by_k)
    status = STATUS_ABSORBED
    n_events = 0
    while True:
        n1 = a1_sz[0]
        n2 = a2_sz[0]
        r1 = n1 * (lam + rho)
        total = r1 + 2 * n2 * (lam + rho)
        if total <= 0.0:
            break
        if n_events >= budget:
            status = STATUS_BUDGET
            break
        t_next = t + exponential(st, total)
        record_grid(meta, full, grid, t_next, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], total, sus_by_k)
        t = t_next
        u = uniform(st) * total
        if u < r1:
            e = iset_sample(a1_mem, a1_sz, st)
            hx = 2 * e if state[owner[2 * e]] == INF else 2 * e + 1
            hy = hx ^ 1
            if u < n1 * lam:
                stable[e] = True
                _classify(e, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz)
                if use_ab and not A[hx] > B[hy]:
                    counts[EV_BLOCKED] += 1
                else:
                    y = owner[hy]
                    tx_a[y] = A[hx]
                    tx_b[y] = B[hy]
                    state[y] = INF
                    cnt[C_S] -= 1
                    cnt[C_I] += 1
                    sus_by_k[deg[y]] -= 1
                    cnt[C_XI] += deg[y]
                    h = head[y]
                    while h >= 0:
                        if A[h] < 0.0:
                            A[h] = t
                        if h < 2 * n_edges:
                            _classify(h >> 1, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz)
                        h = nxt[h]
                    counts[EV_INFECT] += 1
            else:
                target = randint(st, n)
                move_half_edge(hx, target, owner, head, nxt, prv, deg, state, sus_by_k, cnt)
                B[hx] = t
                rewires[e] += 1
                _classify(e, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz)
                counts[EV_REWIRE] += 1
        else:
            e = iset_sample(a2_mem, a2_sz, st)
            if u < r1 + 2 * n2 * lam:
                stable[e] = True
                _classify(e, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz)
                counts[EV_STABLE] += 1
            else:
                mv = 2 * e + (1 if uniform(st) < 0.5 else 0)
                target = randint(st, n)
                move_half_edge(mv, target, owner, head, nxt, prv, deg, state, sus_by_k, cnt)
                B[mv] = t
                rewires[e] += 1
                _classify(e, owner, state, stable, a1_mem, a1_pos, a1_sz, a2_mem, a2_pos, a2_sz)
                counts[EV_REWIRE] += 1
        n_events += 1
        rate = (a1_sz[0] + 2 * a2_sz[0]) * (lam + rho)
        record_event(meta, full, dec, t, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], rate, sus_by_k)

    record_grid(meta, full, grid, np.inf, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], 0.0, sus_by_k)
    last = final_row(t, cnt[C_S], cnt[C_I], cnt[C_R], cnt[C_X], cnt[C_XI], sus_by_k, kmax)
    return state, counts, t, status, last, A, B, tx_a, tx_b
