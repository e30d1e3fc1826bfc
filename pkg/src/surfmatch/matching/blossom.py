"""Maximum-weight matching on general graphs (Edmonds' blossom algorithm, O(n^3)).

This follows the classic primal-dual formulation with S/T labels, nested
blossoms and per-blossom least-slack edge lists. It is written over flat
integer arrays so it compiles under numba: recursion is replaced by explicit
work stacks and blossom child lists live in fixed-width rows.

Weights are integers. Dual variables are kept doubled so every slack stays
integral and the optimum is exact.
"""

from __future__ import annotations

import numpy as np

from .._jit import njit


@njit
def _slack(k, eu, ev, ew, dual):
    return dual[eu[k]] + dual[ev[k]] - 2 * ew[k]


@njit
def _leaves(b, n, childs, nchild, out, stack):
    if b < n:
        out[0] = b
        return 1
    cnt = 0
    stack[0] = b
    top = 1
    while top > 0:
        top -= 1
        x = stack[top]
        for i in range(nchild[x]):
            t = childs[x, i]
            if t < n:
                out[cnt] = t
                cnt += 1
            else:
                stack[top] = t
                top += 1
    return cnt


@njit
def _push(v, queue, inq, sc):
    if not inq[v]:
        inq[v] = True
        queue[sc[0]] = v
        sc[0] += 1


@njit
def _assign_label(w, t, p, n, endpoint, mate, label, labelend, inblossom, blossombase,
                  bestedge, childs, nchild, queue, inq, sc, buf, stack):
    while True:
        b = inblossom[w]
        label[w] = t
        label[b] = t
        labelend[w] = p
        labelend[b] = p
        bestedge[w] = -1
        bestedge[b] = -1
        if t == 1:
            cnt = _leaves(b, n, childs, nchild, buf, stack)
            for i in range(cnt):
                _push(buf[i], queue, inq, sc)
            return
        mb = mate[blossombase[b]]
        w = endpoint[mb]
        t = 1
        p = mb ^ 1


@njit
def _scan_blossom(v, w, endpoint, label, labelend, inblossom, blossombase, path):
    npath = 0
    base = -1
    while v != -1 or w != -1:
        b = inblossom[v]
        if label[b] & 4:
            base = blossombase[b]
            break
        path[npath] = b
        npath += 1
        label[b] = 5
        if labelend[b] == -1:
            v = -1
        else:
            v = endpoint[labelend[b]]
            b = inblossom[v]
            v = endpoint[labelend[b]]
        if w != -1:
            v, w = w, v
    for i in range(npath):
        label[path[i]] = 1
    return base


@njit
def _add_blossom(base, k, n, eu, ev, ew, endpoint, nb_ptr, nb_end, label, labelend,
                 inblossom, blossomparent, blossombase, childs, nchild, endps, bestedge,
                 bbe, nbbe, has_bbe, unused, dual, queue, inq, sc, buf, buf2, stack, bestedgeto):
    v = eu[k]
    w = ev[k]
    bb = inblossom[base]
    bv = inblossom[v]
    bw = inblossom[w]
    sc[1] -= 1
    b = unused[sc[1]]
    blossombase[b] = base
    blossomparent[b] = -1
    blossomparent[bb] = b
    cnt = 0
    while bv != bb:
        blossomparent[bv] = b
        childs[b, cnt] = bv
        endps[b, cnt] = labelend[bv]
        cnt += 1
        v = endpoint[labelend[bv]]
        bv = inblossom[v]
    childs[b, cnt] = bb
    cnt += 1
    childs[b, :cnt] = childs[b, :cnt][::-1].copy()
    endps[b, : cnt - 1] = endps[b, : cnt - 1][::-1].copy()
    endps[b, cnt - 1] = 2 * k
    while bw != bb:
        blossomparent[bw] = b
        childs[b, cnt] = bw
        endps[b, cnt] = labelend[bw] ^ 1
        cnt += 1
        w = endpoint[labelend[bw]]
        bw = inblossom[w]
    nchild[b] = cnt
    label[b] = 1
    labelend[b] = labelend[bb]
    dual[b] = 0
    nl = _leaves(b, n, childs, nchild, buf, stack)
    for i in range(nl):
        x = buf[i]
        if label[inblossom[x]] == 2:
            _push(x, queue, inq, sc)
        inblossom[x] = b
    bestedgeto[:] = -1
    for ci in range(cnt):
        bv = childs[b, ci]
        if has_bbe[bv]:
            for t in range(nbbe[bv]):
                k2 = bbe[bv, t]
                i = eu[k2]
                j = ev[k2]
                if inblossom[j] == b:
                    i, j = j, i
                bj = inblossom[j]
                if bj != b and label[bj] == 1 and (
                    bestedgeto[bj] == -1
                    or _slack(k2, eu, ev, ew, dual) < _slack(bestedgeto[bj], eu, ev, ew, dual)
                ):
                    bestedgeto[bj] = k2
        else:
            nl2 = _leaves(bv, n, childs, nchild, buf2, stack)
            for li in range(nl2):
                x = buf2[li]
                for idx in range(nb_ptr[x], nb_ptr[x + 1]):
                    k2 = nb_end[idx] >> 1
                    i = eu[k2]
                    j = ev[k2]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if bj != b and label[bj] == 1 and (
                        bestedgeto[bj] == -1
                        or _slack(k2, eu, ev, ew, dual) < _slack(bestedgeto[bj], eu, ev, ew, dual)
                    ):
                        bestedgeto[bj] = k2
        has_bbe[bv] = False
        bestedge[bv] = -1
    m = 0
    for x in range(bestedgeto.shape[0]):
        if bestedgeto[x] != -1:
            bbe[b, m] = bestedgeto[x]
            m += 1
    nbbe[b] = m
    has_bbe[b] = True
    bestedge[b] = -1
    for t in range(m):
        k2 = bbe[b, t]
        if bestedge[b] == -1 or _slack(k2, eu, ev, ew, dual) < _slack(bestedge[b], eu, ev, ew, dual):
            bestedge[b] = k2


@njit
def _release(b, label, labelend, nchild, blossombase, has_bbe, bestedge, unused, sc):
    label[b] = -1
    labelend[b] = -1
    nchild[b] = 0
    blossombase[b] = -1
    has_bbe[b] = False
    bestedge[b] = -1
    unused[sc[1]] = b
    sc[1] += 1


@njit
def _expand_endstage(b0, n, label, labelend, inblossom, blossomparent, blossombase, childs,
                     nchild, bestedge, has_bbe, unused, dual, sc, buf, stack, work):
    top = 1
    work[0] = b0
    while top > 0:
        top -= 1
        b = work[top]
        for ci in range(nchild[b]):
            s = childs[b, ci]
            blossomparent[s] = -1
            if s < n:
                inblossom[s] = s
            elif dual[s] == 0:
                work[top] = s
                top += 1
            else:
                nl = _leaves(s, n, childs, nchild, buf, stack)
                for i in range(nl):
                    inblossom[buf[i]] = s
        _release(b, label, labelend, nchild, blossombase, has_bbe, bestedge, unused, sc)


@njit
def _expand_t(b, n, endpoint, mate, label, labelend, inblossom, blossomparent, blossombase,
              childs, nchild, endps, bestedge, has_bbe, unused, allowedge, queue, inq, sc,
              buf, buf2, stack):
    L = nchild[b]
    for ci in range(L):
        s = childs[b, ci]
        blossomparent[s] = -1
        if s < n:
            inblossom[s] = s
        else:
            nl = _leaves(s, n, childs, nchild, buf, stack)
            for i in range(nl):
                inblossom[buf[i]] = s
    if label[b] == 2:
        entrychild = inblossom[endpoint[labelend[b] ^ 1]]
        j = 0
        while childs[b, j] != entrychild:
            j += 1
        if j & 1:
            j -= L
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        p = labelend[b]
        while j != 0:
            label[endpoint[p ^ 1]] = 0
            label[endpoint[endps[b, (j - endptrick) % L] ^ endptrick ^ 1]] = 0
            _assign_label(endpoint[p ^ 1], 2, p, n, endpoint, mate, label, labelend, inblossom,
                          blossombase, bestedge, childs, nchild, queue, inq, sc, buf, stack)
            allowedge[endps[b, (j - endptrick) % L] >> 1] = True
            j += jstep
            p = endps[b, (j - endptrick) % L] ^ endptrick
            allowedge[p >> 1] = True
            j += jstep
        bv = childs[b, j % L]
        label[endpoint[p ^ 1]] = 2
        label[bv] = 2
        labelend[endpoint[p ^ 1]] = p
        labelend[bv] = p
        bestedge[bv] = -1
        j += jstep
        while childs[b, j % L] != entrychild:
            bv = childs[b, j % L]
            if label[bv] == 1:
                j += jstep
                continue
            nl = _leaves(bv, n, childs, nchild, buf2, stack)
            found = -1
            for i in range(nl):
                if label[buf2[i]] != 0:
                    found = buf2[i]
                    break
            if found >= 0:
                v = found
                label[v] = 0
                label[endpoint[mate[blossombase[bv]]]] = 0
                _assign_label(v, 2, labelend[v], n, endpoint, mate, label, labelend, inblossom,
                              blossombase, bestedge, childs, nchild, queue, inq, sc, buf, stack)
            j += jstep
    _release(b, label, labelend, nchild, blossombase, has_bbe, bestedge, unused, sc)


@njit
def _augment_blossom(b0, v0, n, endpoint, mate, blossomparent, blossombase, childs, nchild,
                     endps, work_b, work_v, tmp):
    top = 1
    work_b[0] = b0
    work_v[0] = v0
    while top > 0:
        top -= 1
        b = work_b[top]
        v = work_v[top]
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= n:
            work_b[top] = t
            work_v[top] = v
            top += 1
        L = nchild[b]
        i = 0
        while childs[b, i] != t:
            i += 1
        j = i
        if i & 1:
            j -= L
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[b, j % L]
            p = endps[b, (j - endptrick) % L] ^ endptrick
            if t >= n:
                work_b[top] = t
                work_v[top] = endpoint[p]
                top += 1
            j += jstep
            t = childs[b, j % L]
            if t >= n:
                work_b[top] = t
                work_v[top] = endpoint[p ^ 1]
                top += 1
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        if i > 0:
            tmp[:L] = childs[b, :L]
            for x in range(L):
                childs[b, x] = tmp[(x + i) % L]
            tmp[:L] = endps[b, :L]
            for x in range(L):
                endps[b, x] = tmp[(x + i) % L]
        blossombase[b] = v


@njit
def _augment_matching(k, n, eu, ev, endpoint, mate, labelend, inblossom, blossomparent,
                      blossombase, childs, nchild, endps, work_b, work_v, tmp):
    for side in range(2):
        if side == 0:
            s = eu[k]
            p = 2 * k + 1
        else:
            s = ev[k]
            p = 2 * k
        while True:
            bs = inblossom[s]
            if bs >= n:
                _augment_blossom(bs, s, n, endpoint, mate, blossomparent, blossombase, childs,
                                 nchild, endps, work_b, work_v, tmp)
            mate[s] = p
            if labelend[bs] == -1:
                break
            t = endpoint[labelend[bs]]
            bt = inblossom[t]
            s = endpoint[labelend[bt]]
            j = endpoint[labelend[bt] ^ 1]
            if bt >= n:
                _augment_blossom(bt, j, n, endpoint, mate, blossomparent, blossombase, childs,
                                 nchild, endps, work_b, work_v, tmp)
            mate[j] = labelend[bt]
            p = labelend[bt] ^ 1


@njit
def max_weight_matching(n, eu, ev, ew, maxcardinality):
    """Mate array (-1 if unmatched) of a maximum-weight matching.

    ``eu``, ``ev``, ``ew`` describe the edges; weights must be integers and
    there may be at most one edge per vertex pair. With ``maxcardinality``
    the result is the heaviest among the maximum-cardinality matchings.
    """
    m = eu.shape[0]
    mate = np.full(n, -1, np.int64)
    if m == 0 or n == 0:
        return mate
    maxweight = 0
    for k in range(m):
        if ew[k] > maxweight:
            maxweight = ew[k]
    endpoint = np.empty(2 * m, np.int64)
    deg = np.zeros(n + 1, np.int64)
    for k in range(m):
        endpoint[2 * k] = eu[k]
        endpoint[2 * k + 1] = ev[k]
        deg[eu[k] + 1] += 1
        deg[ev[k] + 1] += 1
    nb_ptr = np.cumsum(deg)
    fill = nb_ptr[:-1].copy()
    nb_end = np.empty(2 * m, np.int64)
    for k in range(m):
        nb_end[fill[eu[k]]] = 2 * k + 1
        fill[eu[k]] += 1
        nb_end[fill[ev[k]]] = 2 * k
        fill[ev[k]] += 1

    n2 = 2 * n
    label = np.zeros(n2, np.int64)
    labelend = np.full(n2, -1, np.int64)
    inblossom = np.arange(n)
    blossomparent = np.full(n2, -1, np.int64)
    blossombase = np.full(n2, -1, np.int64)
    blossombase[:n] = np.arange(n)
    childs = np.zeros((n2, n + 1), np.int64)
    endps = np.zeros((n2, n + 1), np.int64)
    nchild = np.zeros(n2, np.int64)
    bestedge = np.full(n2, -1, np.int64)
    bbe = np.zeros((n2, n2), np.int64)
    nbbe = np.zeros(n2, np.int64)
    has_bbe = np.zeros(n2, np.bool_)
    unused = np.zeros(n, np.int64)
    for i in range(n):
        unused[i] = n + i
    dual = np.zeros(n2, np.int64)
    dual[:n] = maxweight
    allowedge = np.zeros(m, np.bool_)
    queue = np.zeros(n + 1, np.int64)
    inq = np.zeros(n, np.bool_)
    # sc[0]: queue length, sc[1]: number of unused blossom ids
    sc = np.zeros(2, np.int64)
    sc[1] = n
    buf = np.zeros(n, np.int64)
    buf2 = np.zeros(n, np.int64)
    stack = np.zeros(n2, np.int64)
    path = np.zeros(n2, np.int64)
    bestedgeto = np.full(n2, -1, np.int64)
    work_b = np.zeros(n2, np.int64)
    work_v = np.zeros(n2, np.int64)
    tmp = np.zeros(n + 1, np.int64)

    for _stage in range(n):
        label[:] = 0
        bestedge[:] = -1
        has_bbe[n:] = False
        allowedge[:] = False
        inq[:] = False
        sc[0] = 0
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                _assign_label(v, 1, -1, n, endpoint, mate, label, labelend, inblossom,
                              blossombase, bestedge, childs, nchild, queue, inq, sc, buf, stack)
        augmented = False
        while True:
            while sc[0] > 0 and not augmented:
                sc[0] -= 1
                v = queue[sc[0]]
                inq[v] = False
                for idx in range(nb_ptr[v], nb_ptr[v + 1]):
                    p = nb_end[idx]
                    k = p >> 1
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0
                    if not allowedge[k]:
                        kslack = _slack(k, eu, ev, ew, dual)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            _assign_label(w, 2, p ^ 1, n, endpoint, mate, label, labelend,
                                          inblossom, blossombase, bestedge, childs, nchild,
                                          queue, inq, sc, buf, stack)
                        elif label[inblossom[w]] == 1:
                            base = _scan_blossom(v, w, endpoint, label, labelend, inblossom,
                                                 blossombase, path)
                            if base >= 0:
                                _add_blossom(base, k, n, eu, ev, ew, endpoint, nb_ptr, nb_end,
                                             label, labelend, inblossom, blossomparent,
                                             blossombase, childs, nchild, endps, bestedge, bbe,
                                             nbbe, has_bbe, unused, dual, queue, inq, sc, buf,
                                             buf2, stack, bestedgeto)
                            else:
                                _augment_matching(k, n, eu, ev, endpoint, mate, labelend,
                                                  inblossom, blossomparent, blossombase, childs,
                                                  nchild, endps, work_b, work_v, tmp)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < _slack(bestedge[b], eu, ev, ew, dual):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < _slack(bestedge[w], eu, ev, ew, dual):
                            bestedge[w] = k
            if augmented:
                break
            deltatype = -1
            delta = 0
            deltaedge = -1
            deltablossom = -1
            if not maxcardinality:
                deltatype = 1
                delta = dual[0]
                for v in range(1, n):
                    if dual[v] < delta:
                        delta = dual[v]
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = _slack(bestedge[v], eu, ev, ew, dual)
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(n2):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    d = _slack(bestedge[b], eu, ev, ew, dual) // 2
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n, n2):
                if (blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2
                        and (deltatype == -1 or dual[b] < delta)):
                    delta = dual[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                deltatype = 1
                delta = dual[0]
                for v in range(1, n):
                    if dual[v] < delta:
                        delta = dual[v]
                if delta < 0:
                    delta = 0
            for v in range(n):
                lb = label[inblossom[v]]
                if lb == 1:
                    dual[v] -= delta
                elif lb == 2:
                    dual[v] += delta
            for b in range(n, n2):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dual[b] += delta
                    elif label[b] == 2:
                        dual[b] -= delta
            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                i = eu[deltaedge]
                if label[inblossom[i]] == 0:
                    i = ev[deltaedge]
                _push(i, queue, inq, sc)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                _push(eu[deltaedge], queue, inq, sc)
            else:
                _expand_t(deltablossom, n, endpoint, mate, label, labelend, inblossom,
                          blossomparent, blossombase, childs, nchild, endps, bestedge, has_bbe,
                          unused, allowedge, queue, inq, sc, buf, buf2, stack)
        if not augmented:
            break
        for b in range(n, n2):
            if blossomparent[b] == -1 and blossombase[b] >= 0 and label[b] == 1 and dual[b] == 0:
                _expand_endstage(b, n, label, labelend, inblossom, blossomparent, blossombase,
                                 childs, nchild, bestedge, has_bbe, unused, dual, sc, buf, stack,
                                 work_b)
    out = np.full(n, -1, np.int64)
    for v in range(n):
        if mate[v] >= 0:
            out[v] = endpoint[mate[v]]
    return out
