# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled exhaustive-search kernel; see ``_kernel_py`` for the reference loops."""
import numpy as np
from libc.math cimport INFINITY

cdef enum:
    OBJ_PROC_NB = 0
    OBJ_PROC_POWER = 1
    OBJ_BW_SUM = 2
    OBJ_BW_MAX = 3

STATUS_DONE = 0
STATUS_BUDGET = 1

ctypedef long long i64


cdef int _evaluate(int P, int nops, int J, const double[::1] speed, const double[::1] nic,
                   const double[::1] bl, const double[::1] w, const double[::1] delta,
                   const i64[::1] holds,
                   const i64[::1] node_op, const double[::1] node_rate, i64[::1] assign,
                   const i64[::1] e_from, const i64[::1] e_to, const i64[::1] e_op,
                   const double[::1] e_rate,
                   const i64[::1] need_node, const i64[::1] need_obj, const double[::1] need_rate,
                   i64[::1] src, double tol,
                   double[::1] comp, double[::1] recv, double[::1] send, double[::1] nicl,
                   double[::1] link,
                   double[::1] opmax, double[::1] flow, double[::1] dl) noexcept nogil:
    cdef Py_ssize_t N = node_op.shape[0]
    cdef Py_ssize_t E = e_from.shape[0]
    cdef Py_ssize_t D = need_node.shape[0]
    cdef Py_ssize_t n, e, d, x
    cdef int u, v, p, j, s, t
    cdef double r, vol, hi
    for x in range(P * nops):
        opmax[x] = 0.0
    for x in range(nops * P * P):
        flow[x] = 0.0
    for x in range(P * J):
        dl[x] = 0.0
    for u in range(P):
        comp[u] = 0.0
        recv[u] = 0.0
        send[u] = 0.0
        nicl[u] = 0.0
    for x in range(P * P):
        link[x] = 0.0

    for n in range(N):
        x = assign[n] * nops + node_op[n]
        if node_rate[n] > opmax[x]:
            opmax[x] = node_rate[n]
    for u in range(P):
        for p in range(nops):
            r = opmax[u * nops + p]
            if r > 0.0:
                if speed[u] == 0.0:
                    comp[u] = INFINITY
                    break
                comp[u] += r * w[p] / speed[u]

    for e in range(E):
        s = <int>assign[e_from[e]]
        t = <int>assign[e_to[e]]
        if s != t:
            x = (e_op[e] * P + s) * P + t
            if e_rate[e] > flow[x]:
                flow[x] = e_rate[e]
    for u in range(P):
        for p in range(nops):
            for v in range(P):
                r = flow[(p * P + v) * P + u]
                if r > 0.0:
                    vol = r * delta[p]
                    recv[u] += vol / bl[v * P + u]
                    nicl[u] += vol
        for p in range(nops):
            for v in range(P):
                r = flow[(p * P + u) * P + v]
                if r > 0.0:
                    vol = r * delta[p]
                    send[u] += vol / bl[u * P + v]
                    nicl[u] += vol
                    if u < v:
                        link[u * P + v] += vol
                    else:
                        link[v * P + u] += vol

    for d in range(D):
        u = <int>assign[need_node[d]]
        j = <int>need_obj[d]
        if holds[u * J + j] == 0:
            x = u * J + j
            if need_rate[d] > dl[x]:
                dl[x] = need_rate[d]
    for u in range(P):
        for j in range(J):
            r = dl[u * J + j]
            if r > 0.0:
                v = <int>src[u * J + j]
                nicl[u] += r
                nicl[v] += r
                if u < v:
                    link[u * P + v] += r
                else:
                    link[v * P + u] += r

    hi = 1.0 + tol
    for u in range(P):
        if comp[u] > hi or recv[u] > hi or send[u] > hi or nicl[u] > nic[u] * hi:
            return 0
    for u in range(P):
        for v in range(u + 1, P):
            if link[u * P + v] > bl[u * P + v] * hi:
                return 0
    return 1


cdef double _objective(int objective, int P, const double[::1] bl, i64[::1] assign,
                       double[::1] comp, double[::1] link, i64[::1] used) noexcept nogil:
    cdef Py_ssize_t n
    cdef int u, v
    cdef double t
    if objective == OBJ_PROC_NB:
        for u in range(P):
            used[u] = 0
        for n in range(assign.shape[0]):
            used[assign[n]] = 1
        t = 0.0
        for u in range(P):
            t += used[u]
        return t
    t = 0.0
    if objective == OBJ_PROC_POWER:
        for u in range(P):
            t += comp[u]
        return t
    for u in range(P):
        for v in range(u + 1, P):
            if objective == OBJ_BW_SUM:
                t += link[u * P + v]
            elif link[u * P + v] / bl[u * P + v] > t:
                t = link[u * P + v] / bl[u * P + v]
    return t


cdef inline double _thr(double best) noexcept nogil:
    cdef double m = best if best >= 0 else -best
    if m < 1.0:
        m = 1.0
    return 1e-12 * m


def evaluate(int P, int nops, int J, speed, nic, bl, w, delta, holds,
             node_op, node_rate, assign,
             e_from, e_to, e_op, e_rate,
             need_node, need_obj, need_rate,
             src, double tol, comp, recv, send, nicl, link):
    """Fill the load arrays for one complete mapping; return 1 if feasible."""
    opmax = np.zeros(P * nops)
    flow = np.zeros(nops * P * P)
    dl = np.zeros(P * J)
    return _evaluate(P, nops, J, speed, nic, bl, w, delta, holds,
                     node_op, node_rate, assign, e_from, e_to, e_op, e_rate,
                     need_node, need_obj, need_rate, src, tol,
                     comp, recv, send, nicl, link, opmax, flow, dl)


def search(int P, int nops, int J, const double[::1] speed, const double[::1] nic,
           const double[::1] bl, const double[::1] w, const double[::1] delta,
           const i64[::1] holds, const i64[::1] hold_ptr, const i64[::1] hold_list,
           const i64[::1] node_op, const double[::1] node_rate,
           const i64[::1] e_from, const i64[::1] e_to, const i64[::1] e_op,
           const double[::1] e_rate,
           const i64[::1] need_node, const i64[::1] need_obj, const double[::1] need_rate,
           int objective, double tol, bint prune, i64 max_states, double best_in,
           i64[::1] best_assign, i64[::1] best_src):
    """Exhaustive DFS over node->processor assignments and download sources.

    Returns ``(status, best, found, states)``.
    """
    cdef Py_ssize_t N = node_op.shape[0]
    cdef Py_ssize_t D = need_node.shape[0]
    cdef i64[::1] a = np.full(N, -1, dtype=np.int64)
    cdef i64[::1] src = np.full(P * J, -1, dtype=np.int64)
    cdef double[::1] comp = np.zeros(P)
    cdef double[::1] recv = np.zeros(P)
    cdef double[::1] send = np.zeros(P)
    cdef double[::1] nicl = np.zeros(P)
    cdef double[::1] link = np.zeros(P * P)
    cdef double[::1] opmax = np.zeros(P * nops)
    cdef double[::1] s_opmax = np.zeros(P * nops)
    cdef double[::1] s_flow = np.zeros(nops * P * P)
    cdef double[::1] s_dl = np.zeros(P * J)
    cdef double[::1] compinc = np.zeros(P)
    cdef i64[::1] usecnt = np.zeros(P, dtype=np.int64)
    cdef i64[::1] used = np.zeros(P, dtype=np.int64)
    cdef double[::1] prev_op = np.zeros(max(N, 1))
    cdef double[::1] prev_comp = np.zeros(max(N, 1))
    cdef i64[::1] keys = np.zeros(P * J, dtype=np.int64)
    cdef i64[::1] digit = np.zeros(P * J, dtype=np.int64)
    cdef double best = best_in
    cdef int found = 0
    cdef i64 states = 0
    cdef bint source_free = objective == OBJ_PROC_NB or objective == OBJ_PROC_POWER
    cdef double cap = 1.0 + tol + 1e-9
    cdef double lb, val, m
    cdef Py_ssize_t t = 0, n, d, x, y, i, nk
    cdef int u, v, j
    cdef bint leaf = N == 0
    cdef int status = 0

    with nogil:
        while True:
            if not leaf:
                if t < 0:
                    break
                if a[t] >= 0:
                    u = <int>a[t]
                    opmax[u * nops + node_op[t]] = prev_op[t]
                    compinc[u] = prev_comp[t]
                    usecnt[u] -= 1
                a[t] += 1
                if a[t] == P:
                    a[t] = -1
                    t -= 1
                    continue
                u = <int>a[t]
                x = u * nops + node_op[t]
                prev_op[t] = opmax[x]
                prev_comp[t] = compinc[u]
                if node_rate[t] > opmax[x]:
                    if speed[u] == 0.0:
                        compinc[u] = INFINITY
                    else:
                        compinc[u] += (node_rate[t] - opmax[x]) * w[node_op[t]] / speed[u]
                    opmax[x] = node_rate[t]
                usecnt[u] += 1
                states += 1
                if states > max_states:
                    status = 1
                    break
                if prune:
                    if compinc[u] > cap:
                        continue
                    if objective == OBJ_PROC_POWER and best != INFINITY:
                        lb = 0.0
                        for v in range(P):
                            lb += compinc[v]
                        m = lb if lb > 1.0 else 1.0
                        if lb - 1e-9 * m >= best - _thr(best):
                            continue
                    elif objective == OBJ_PROC_NB and best != INFINITY:
                        lb = 0.0
                        for v in range(P):
                            if usecnt[v] > 0:
                                lb += 1.0
                        if lb >= best - _thr(best):
                            continue
                if t < N - 1:
                    t += 1
                    continue

            nk = 0
            for d in range(D):
                u = <int>a[need_node[d]]
                j = <int>need_obj[d]
                if holds[u * J + j] == 0 and src[u * J + j] == -1:
                    src[u * J + j] = -2
            for x in range(P * J):
                if src[x] == -2:
                    keys[nk] = x
                    digit[nk] = 0
                    nk += 1
            while True:
                for i in range(nk):
                    x = keys[i]
                    src[x] = hold_list[hold_ptr[x % J] + digit[i]]
                states += 1
                if states > max_states:
                    status = 1
                    break
                if _evaluate(P, nops, J, speed, nic, bl, w, delta, holds,
                             node_op, node_rate, a, e_from, e_to, e_op, e_rate,
                             need_node, need_obj, need_rate, src, tol,
                             comp, recv, send, nicl, link, s_opmax, s_flow, s_dl):
                    val = _objective(objective, P, bl, a, comp, link, used)
                    if best == INFINITY or val < best - _thr(best):
                        best = val
                        found = 1
                        for n in range(N):
                            best_assign[n] = a[n]
                        for y in range(P * J):
                            best_src[y] = src[y]
                    if source_free:
                        break
                i = nk - 1
                while i >= 0:
                    j = <int>(keys[i] % J)
                    digit[i] += 1
                    if digit[i] < hold_ptr[j + 1] - hold_ptr[j]:
                        break
                    digit[i] = 0
                    i -= 1
                if i < 0:
                    break
            if status:
                break
            for i in range(nk):
                src[keys[i]] = -1
            if leaf:
                break
    return (STATUS_BUDGET if status else STATUS_DONE), best, found, states
