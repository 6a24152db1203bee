"""Pure-Python kernel; loop-for-loop twin of ``_kernel.pyx``.

Processors, operators and objects are dense indices.  Pair arrays are
row-major ``P x P``; flow rates are indexed ``(op * P + src) * P + dst``.
Float operations happen in the same order in both kernels so their
results are bit-identical.
"""
import math

OBJ_PROC_NB = 0
OBJ_PROC_POWER = 1
OBJ_BW_SUM = 2
OBJ_BW_MAX = 3

STATUS_DONE = 0
STATUS_BUDGET = 1


def evaluate(P, nops, J, speed, nic, bl, w, delta, holds,
             node_op, node_rate, assign,
             e_from, e_to, e_op, e_rate,
             need_node, need_obj, need_rate,
             src, tol, comp, recv, send, nicl, link):
    """Fill the load arrays for one complete mapping; return 1 if feasible."""
    N = len(node_op)
    E = len(e_from)
    D = len(need_node)
    opmax = [0.0] * (P * nops)
    flow = [0.0] * (nops * P * P)
    dl = [0.0] * (P * J)
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
                    comp[u] = math.inf
                    break
                comp[u] += r * w[p] / speed[u]

    for e in range(E):
        s = assign[e_from[e]]
        d = assign[e_to[e]]
        if s != d:
            x = (e_op[e] * P + s) * P + d
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
        u = assign[need_node[d]]
        j = need_obj[d]
        if holds[u * J + j] == 0:
            x = u * J + j
            if need_rate[d] > dl[x]:
                dl[x] = need_rate[d]
    for u in range(P):
        for j in range(J):
            r = dl[u * J + j]
            if r > 0.0:
                v = src[u * J + j]
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


def _objective(objective, P, bl, assign, comp, link):
    if objective == OBJ_PROC_NB:
        used = [0] * P
        for n in range(len(assign)):
            used[assign[n]] = 1
        c = 0
        for u in range(P):
            c += used[u]
        return float(c)
    if objective == OBJ_PROC_POWER:
        t = 0.0
        for u in range(P):
            t += comp[u]
        return t
    t = 0.0
    for u in range(P):
        for v in range(u + 1, P):
            if objective == OBJ_BW_SUM:
                t += link[u * P + v]
            elif link[u * P + v] / bl[u * P + v] > t:
                t = link[u * P + v] / bl[u * P + v]
    return t


def _improves(val, best):
    if best == math.inf:
        return True
    return val < best - 1e-12 * max(1.0, abs(best))


def search(P, nops, J, speed, nic, bl, w, delta, holds, hold_ptr, hold_list,
           node_op, node_rate,
           e_from, e_to, e_op, e_rate,
           need_node, need_obj, need_rate,
           objective, tol, prune, max_states, best_in,
           best_assign, best_src):
    """Exhaustive DFS over node->processor assignments and download sources.

    Returns ``(status, best, found, states)``; ``best_assign``/``best_src``
    are overwritten only when a mapping strictly better than ``best_in`` is
    found.
    """
    N = len(node_op)
    D = len(need_node)
    a = [-1] * N
    src = [-1] * (P * J)
    comp = [0.0] * P
    recv = [0.0] * P
    send = [0.0] * P
    nicl = [0.0] * P
    link = [0.0] * (P * P)
    opmax = [0.0] * (P * nops)
    compinc = [0.0] * P
    usecnt = [0] * P
    prev_op = [0.0] * max(N, 1)
    prev_comp = [0.0] * max(N, 1)
    keys = [0] * (P * J)
    digit = [0] * (P * J)
    best = best_in
    found = 0
    states = 0
    source_free = objective == OBJ_PROC_NB or objective == OBJ_PROC_POWER
    cap = 1.0 + tol + 1e-9

    t = 0
    leaf = N == 0
    while True:
        if not leaf:
            if t < 0:
                break
            if a[t] >= 0:
                u = a[t]
                opmax[u * nops + node_op[t]] = prev_op[t]
                compinc[u] = prev_comp[t]
                usecnt[u] -= 1
            a[t] += 1
            if a[t] == P:
                a[t] = -1
                t -= 1
                continue
            u = a[t]
            x = u * nops + node_op[t]
            prev_op[t] = opmax[x]
            prev_comp[t] = compinc[u]
            if node_rate[t] > opmax[x]:
                if speed[u] == 0.0:
                    compinc[u] = math.inf
                else:
                    compinc[u] += (node_rate[t] - opmax[x]) * w[node_op[t]] / speed[u]
                opmax[x] = node_rate[t]
            usecnt[u] += 1
            states += 1
            if states > max_states:
                return STATUS_BUDGET, best, found, states
            if prune:
                if compinc[u] > cap:
                    continue
                if objective == OBJ_PROC_POWER and best != math.inf:
                    lb = 0.0
                    for v in range(P):
                        lb += compinc[v]
                    if lb - 1e-9 * max(1.0, lb) >= best - 1e-12 * max(1.0, abs(best)):
                        continue
                elif objective == OBJ_PROC_NB and best != math.inf:
                    lb = 0.0
                    for v in range(P):
                        if usecnt[v] > 0:
                            lb += 1.0
                    if lb >= best - 1e-12 * max(1.0, abs(best)):
                        continue
            if t < N - 1:
                t += 1
                continue

        # leaf: every node placed; enumerate download sources
        nk = 0
        for d in range(D):
            u = a[need_node[d]]
            j = need_obj[d]
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
                return STATUS_BUDGET, best, found, states
            if evaluate(P, nops, J, speed, nic, bl, w, delta, holds,
                        node_op, node_rate, a,
                        e_from, e_to, e_op, e_rate,
                        need_node, need_obj, need_rate,
                        src, tol, comp, recv, send, nicl, link):
                val = _objective(objective, P, bl, a, comp, link)
                if _improves(val, best):
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
                j = keys[i] % J
                digit[i] += 1
                if digit[i] < hold_ptr[j + 1] - hold_ptr[j]:
                    break
                digit[i] = 0
                i -= 1
            if i < 0:
                break
        for i in range(nk):
            src[keys[i]] = -1
        if leaf:
            break
    return STATUS_DONE, best, found, states
