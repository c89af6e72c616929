"""Hot loops of the solvers, compiled with numba when available.

Set ``MATCHSHIFT_BACKEND=numpy`` (or ``python``) before import to run the
same code as plain Python over numpy arrays; ``blocking_mask`` then switches
to a vectorized numpy implementation.  Both paths return identical results,
which the test-suite checks in a subprocess.

All kernels assume strict preferences: ``lrank[m, w]`` is the position of w
in m's list, ``UNACCEPTABLE`` for absent entries.
"""
from __future__ import annotations

import os

import numpy as np

from .core import NONE_RANK

BACKEND = os.environ.get("MATCHSHIFT_BACKEND", "numba").strip().lower()

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and BACKEND not in ("numpy", "python", "fallback")

if USE_NUMBA:
    jit = numba.njit(cache=True)
else:
    def jit(fn):
        return fn

ACTIVE_BACKEND = "numba" if USE_NUMBA else "numpy"

# status codes returned by rotation_chain / max_weight_stable
OK = 0
BAD_CHAIN = 1


@jit
def gale_shapley(pref, plen, orank):
    """Deferred acceptance with the side described by ``pref`` proposing.

    ``orank[o, p]`` is the rank receiver o gives proposer p.  Returns the
    partner arrays of proposers and receivers (-1 for unmatched).
    """
    n_p = pref.shape[0]
    n_o = orank.shape[0]
    ppart = np.full(n_p, -1, np.int64)
    opart = np.full(n_o, -1, np.int64)
    nxt = np.zeros(n_p, np.int64)
    stack = np.empty(n_p, np.int64)
    top = 0
    for p in range(n_p - 1, -1, -1):
        stack[top] = p
        top += 1
    while top > 0:
        top -= 1
        p = stack[top]
        while nxt[p] < plen[p]:
            o = pref[p, nxt[p]]
            nxt[p] += 1
            cur = opart[o]
            if cur == -1:
                opart[o] = p
                ppart[p] = o
                break
            if orank[o, p] < orank[o, cur]:
                opart[o] = p
                ppart[p] = o
                ppart[cur] = -1
                stack[top] = cur
                top += 1
                break
    return ppart, opart


def _blocking_mask_numpy(lpart, rpart, lrank, rrank):
    n_l, n_r = lrank.shape
    own_l = np.where(lpart >= 0, lrank[np.arange(n_l), np.maximum(lpart, 0)], NONE_RANK)
    own_r = np.where(rpart >= 0, rrank[np.arange(n_r), np.maximum(rpart, 0)], NONE_RANK)
    return (lrank < own_l[:, None]) & (rrank.T < own_r[None, :])


@jit
def _blocking_mask_loops(lpart, rpart, lrank, rrank):
    n_l, n_r = lrank.shape
    out = np.zeros((n_l, n_r), np.bool_)
    own_r = np.empty(n_r, np.int64)
    for w in range(n_r):
        own_r[w] = NONE_RANK if rpart[w] < 0 else rrank[w, rpart[w]]
    for m in range(n_l):
        own = NONE_RANK if lpart[m] < 0 else lrank[m, lpart[m]]
        for w in range(n_r):
            if lrank[m, w] < own and rrank[w, m] < own_r[w]:
                out[m, w] = True
    return out


# boolean (n_left, n_right) mask of blocking pairs of a one-to-one matching
blocking_mask = _blocking_mask_loops if USE_NUMBA else _blocking_mask_numpy


@jit
def rotation_chain(lpref, llen, lrank, rrank, lpart0, lpartz):
    """Eliminate exposed rotations from the men-optimal matching until the
    women-optimal one is reached.

    Returns ``(offsets, men, women, status)``; rotation r consists of the
    entries ``offsets[r]:offsets[r+1]`` where ``women[t]`` is the partner of
    ``men[t]`` before elimination.  Chain order is a linear extension of the
    rotation precedence order.
    """
    n_l = lpref.shape[0]
    n_r = rrank.shape[0]
    lpart = lpart0.copy()
    rpart = np.full(n_r, -1, np.int64)
    ptr = np.zeros(n_l, np.int64)
    for m in range(n_l):
        if lpart[m] >= 0:
            rpart[lpart[m]] = m
            ptr[m] = lrank[m, lpart[m]] + 1
    total = 1
    for m in range(n_l):
        total += llen[m]
    men = np.empty(total, np.int64)
    women = np.empty(total, np.int64)
    offsets = np.zeros(total + 1, np.int64)
    mark = np.full(n_l, -1, np.int64)
    where = np.zeros(n_l, np.int64)
    path = np.empty(n_l, np.int64)
    nrot = 0
    nent = 0
    stamp = 0
    for start in range(n_l):
        while lpart[start] != lpartz[start]:
            stamp += 1
            plen = 0
            m = start
            while mark[m] != stamp:
                if lpart[m] == lpartz[m]:
                    return offsets[:1], men[:0], women[:0], BAD_CHAIN
                mark[m] = stamp
                where[m] = plen
                path[plen] = m
                plen += 1
                x = -1
                while True:
                    if ptr[m] >= llen[m]:
                        return offsets[:1], men[:0], women[:0], BAD_CHAIN
                    w = lpref[m, ptr[m]]
                    x = rpart[w]
                    if x < 0 or rrank[w, m] < rrank[w, x]:
                        break
                    ptr[m] += 1
                if x < 0:
                    return offsets[:1], men[:0], women[:0], BAD_CHAIN
                m = x
            for t in range(where[m], plen):
                mm = path[t]
                men[nent] = mm
                women[nent] = lpart[mm]
                nent += 1
            nrot += 1
            offsets[nrot] = nent
            for t in range(where[m], plen):
                mm = path[t]
                w = lpref[mm, ptr[mm]]
                lpart[mm] = w
                rpart[w] = mm
                ptr[mm] += 1
    return offsets[:nrot + 1], men[:nent], women[:nent], OK


@jit
def rotation_targets(offsets, women):
    """Partner each entry's man receives when its rotation is eliminated."""
    newp = np.empty_like(women)
    for r in range(offsets.shape[0] - 1):
        a = offsets[r]
        b = offsets[r + 1]
        for t in range(a, b):
            newp[t] = women[t + 1] if t + 1 < b else women[a]
    return newp


@jit
def precedence_edges(offsets, men, women, lpref, lrank, rrank, lpart0):
    """Precedence arcs ``src[e] -> dst[e]`` (src must be eliminated first).

    Two rules: consecutive rotations moving the same man; and when a rotation
    moves man m past woman x on his list, the rotation that first gives x a
    partner she prefers to m precedes it.
    """
    n_l = lpref.shape[0]
    n_r = rrank.shape[0]
    nrot = offsets.shape[0] - 1
    nent = men.shape[0]
    newp = rotation_targets(offsets, women)
    hcount = np.zeros(n_r + 1, np.int64)
    for t in range(nent):
        hcount[newp[t] + 1] += 1
    hstart = np.cumsum(hcount)
    fill = hstart[:n_r].copy()
    hrot = np.empty(nent, np.int64)
    hman = np.empty(nent, np.int64)
    for r in range(nrot):
        for t in range(offsets[r], offsets[r + 1]):
            w = newp[t]
            hrot[fill[w]] = r
            hman[fill[w]] = men[t]
            fill[w] += 1
    r0 = np.full(n_r, -1, np.int64)
    for m in range(n_l):
        if lpart0[m] >= 0:
            r0[lpart0[m]] = m
    cap = nent + 1
    for t in range(nent):
        cap += lrank[men[t], newp[t]] - lrank[men[t], women[t]]
    src = np.empty(cap, np.int64)
    dst = np.empty(cap, np.int64)
    ne = 0
    last = np.full(n_l, -1, np.int64)
    for r in range(nrot):
        for t in range(offsets[r], offsets[r + 1]):
            m = men[t]
            if last[m] >= 0:
                src[ne] = last[m]
                dst[ne] = r
                ne += 1
            last[m] = r
            for p in range(lrank[m, women[t]] + 1, lrank[m, newp[t]]):
                x = lpref[m, p]
                mr = rrank[x, m]
                x0 = r0[x]
                if x0 >= 0 and rrank[x, x0] < mr:
                    continue
                for h in range(hstart[x], hstart[x + 1]):
                    if rrank[x, hman[h]] < mr:
                        if hrot[h] != r:
                            src[ne] = hrot[h]
                            dst[ne] = r
                            ne += 1
                        break
    return src[:ne], dst[:ne]


@jit
def max_closure(wts, src, dst):
    """Minimal maximum-weight closed set of rotations.

    Closure means: selecting ``dst[e]`` forces ``src[e]``.  Solved as a
    min-cut with Edmonds-Karp; the source side reachable in the residual
    graph is the inclusion-minimal optimum.
    """
    nrot = wts.shape[0]
    s = nrot
    t = nrot + 1
    nv = nrot + 2
    big = 1
    ne = 0
    for r in range(nrot):
        if wts[r] > 0:
            big += wts[r]
        if wts[r] != 0:
            ne += 1
    ne += src.shape[0]
    head = np.full(nv, -1, np.int64)
    to = np.empty(2 * ne, np.int64)
    cap = np.empty(2 * ne, np.int64)
    nxt = np.empty(2 * ne, np.int64)
    e = 0
    for r in range(nrot + src.shape[0]):
        if r < nrot:
            if wts[r] > 0:
                u, v, c = s, r, wts[r]
            elif wts[r] < 0:
                u, v, c = r, t, -wts[r]
            else:
                continue
        else:
            k = r - nrot
            u, v, c = dst[k], src[k], big
        to[e] = v
        cap[e] = c
        nxt[e] = head[u]
        head[u] = e
        e += 1
        to[e] = u
        cap[e] = 0
        nxt[e] = head[v]
        head[v] = e
        e += 1
    parent = np.empty(nv, np.int64)
    queue = np.empty(nv, np.int64)
    while True:
        parent[:] = -1
        parent[s] = -2
        qh = 0
        qt = 0
        queue[qt] = s
        qt += 1
        while qh < qt and parent[t] == -1:
            u = queue[qh]
            qh += 1
            k = head[u]
            while k != -1:
                v = to[k]
                if cap[k] > 0 and parent[v] == -1:
                    parent[v] = k
                    queue[qt] = v
                    qt += 1
                k = nxt[k]
        if parent[t] == -1:
            break
        flow = big
        v = t
        while v != s:
            k = parent[v]
            if cap[k] < flow:
                flow = cap[k]
            v = to[k ^ 1]
        v = t
        while v != s:
            k = parent[v]
            cap[k] -= flow
            cap[k ^ 1] += flow
            v = to[k ^ 1]
    # after the last (failed) search, parent marks the residual-reachable set
    sel = np.zeros(nrot, np.bool_)
    for r in range(nrot):
        sel[r] = parent[r] != -1
    return sel


@jit
def rotation_weights(offsets, men, women, weight):
    newp = rotation_targets(offsets, women)
    nrot = offsets.shape[0] - 1
    out = np.zeros(nrot, np.int64)
    for r in range(nrot):
        for t in range(offsets[r], offsets[r + 1]):
            out[r] += weight[men[t], newp[t]] - weight[men[t], women[t]]
    return out


@jit
def max_weight_stable(lpref, llen, lrank, rpref, rlen, rrank, weight):
    """Left partner array of a maximum-weight stable matching (integer weights)."""
    m0, _ = gale_shapley(lpref, llen, rrank)
    _, mz = gale_shapley(rpref, rlen, lrank)
    offsets, men, women, status = rotation_chain(lpref, llen, lrank, rrank, m0, mz)
    if status != OK:
        return m0, status
    src, dst = precedence_edges(offsets, men, women, lpref, lrank, rrank, m0)
    wts = rotation_weights(offsets, men, women, weight)
    sel = max_closure(wts, src, dst)
    newp = rotation_targets(offsets, women)
    out = m0.copy()
    for r in range(offsets.shape[0] - 1):
        if sel[r]:
            for t in range(offsets[r], offsets[r + 1]):
                out[men[t]] = newp[t]
    return out, OK


@jit
def iasm_branch_and_bound(order, lpref, llen, lrank, rpref, rlen, rrank, m1l, m1r,
                          b, bound, node_limit):
    """Depth-first search for a matching with at most ``b`` blocking pairs
    and symmetric difference to M₁ strictly below ``bound``.

    ``m1l``/``m1r`` hold the M₁ partners that are still acceptable (-1
    otherwise).  Men are decided in ``order``; each tries its M₁ partner,
    then its list in order, then staying single.  Returns ``(best, found,
    partners, nodes, exceeded)``; ``best`` counts only M₁ edges that are
    still acceptable.
    """
    n_l = lpref.shape[0]
    n_r = rrank.shape[0]
    lpart = np.full(n_l, -2, np.int64)
    rpart = np.full(n_r, -1, np.int64)
    best_l = np.full(n_l, -1, np.int64)
    opt = np.full(n_l + 1, -1, np.int64)
    chosen = np.full(n_l + 1, -3, np.int64)
    cost = np.zeros(n_l + 1, np.int64)
    blk = np.zeros(n_l + 1, np.int64)
    best = bound
    found = False
    nodes = 0
    d = 0
    while d >= 0:
        if d == n_l:
            extra = 0
            for w in range(n_r):
                if rpart[w] == -1:
                    for j in range(rlen[w]):
                        x = rpref[w, j]
                        px = lpart[x]
                        own = NONE_RANK if px < 0 else lrank[x, px]
                        if lrank[x, w] < own:
                            extra += 1
            if blk[d] + extra <= b and cost[d] < best:
                best = cost[d]
                found = True
                best_l[:] = lpart
            d -= 1
            continue
        m = order[d]
        if chosen[d] != -3:
            if chosen[d] >= 0:
                rpart[chosen[d]] = -1
            lpart[m] = -2
            chosen[d] = -3
        p = m1l[m]
        advanced = False
        while True:
            o = opt[d] + 1
            opt[d] = o
            if o > llen[m] + 1:
                break
            if o == 0:
                w = p
                if w < 0 or rpart[w] != -1:
                    continue
            elif o <= llen[m]:
                w = lpref[m, o - 1]
                if w == p or rpart[w] != -1:
                    continue
            else:
                w = -1
            nodes += 1
            if nodes > node_limit:
                return best, found, best_l, nodes, True
            dc = 0
            if p >= 0 and w != p and rpart[p] == -1:
                dc += 1
            if w >= 0 and w != p:
                dc += 1
                x = m1r[w]
                if x >= 0 and x != m and lpart[x] == -2:
                    dc += 1
            if cost[d] + dc >= best:
                continue
            own_m = NONE_RANK if w < 0 else lrank[m, w]
            db = 0
            for j in range(llen[m]):
                w2 = lpref[m, j]
                if lrank[m, w2] >= own_m:
                    break
                x = rpart[w2]
                if x >= 0 and rrank[w2, m] < rrank[w2, x]:
                    db += 1
            if w >= 0:
                rm = rrank[w, m]
                for j in range(rlen[w]):
                    x = rpref[w, j]
                    if rrank[w, x] >= rm:
                        break
                    px = lpart[x]
                    if px != -2:
                        ownx = NONE_RANK if px == -1 else lrank[x, px]
                        if lrank[x, w] < ownx:
                            db += 1
            if blk[d] + db > b:
                continue
            lpart[m] = w
            if w >= 0:
                rpart[w] = m
            chosen[d] = w
            cost[d + 1] = cost[d] + dc
            blk[d + 1] = blk[d] + db
            opt[d + 1] = -1
            chosen[d + 1] = -3
            d += 1
            advanced = True
            break
        if not advanced:
            opt[d] = -1
            d -= 1
    return best, found, best_l, nodes, False
