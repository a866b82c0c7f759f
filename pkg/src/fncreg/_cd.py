"""Compiled coordinate-descent kernels for the l1-penalized least squares problem.

All kernels minimize ``||y - X b||^2 / n + 2 * lam * ||b||_1`` cyclically over
coordinates, starting from the supplied iterate.  The Gram-form kernel works on
``G = X^T X / n`` and ``c = X^T y / n``; the residual-form kernel works on
``X`` directly and is used when ``p`` is too large to cache ``G``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _soft(v, lam):
    if v > lam:
        return v - lam
    if v < -lam:
        return v + lam
    return 0.0


@njit(cache=True)
def gram_objective(G, c, yy, b, lam, skip):
    # yy = ||y||^2 / n
    p = b.shape[0]
    quad = 0.0
    lin = 0.0
    l1 = 0.0
    for k in range(p):
        if k == skip or b[k] == 0.0:
            continue
        lin += b[k] * c[k]
        l1 += abs(b[k])
        row = 0.0
        for m in range(p):
            if m == skip or b[m] == 0.0:
                continue
            row += G[k, m] * b[m]
        quad += b[k] * row
    return yy - 2.0 * lin + quad + 2.0 * lam * l1


@njit(cache=True)
def gram_kkt(G, c, b, lam, skip):
    p = b.shape[0]
    worst = 0.0
    for k in range(p):
        if k == skip:
            continue
        g = c[k]
        for m in range(p):
            if m == skip or b[m] == 0.0:
                continue
            g -= G[k, m] * b[m]
        if b[k] > 0.0:
            v = abs(g - lam)
        elif b[k] < 0.0:
            v = abs(g + lam)
        else:
            v = abs(g) - lam
            if v < 0.0:
                v = 0.0
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def cd_gram(G, c, yy, lam, b, skip, tol, max_iter, track):
    """Cyclic CD in Gram form.  ``skip`` (or -1) is a coordinate pinned at zero.

    Returns (b, sweeps, converged, history); history holds the objective after
    each sweep when ``track`` is set, otherwise it is empty.
    """
    p = b.shape[0]
    q = np.zeros(p)  # q = G b
    for m in range(p):
        if m == skip or b[m] == 0.0:
            continue
        for k in range(p):
            q[k] += G[k, m] * b[m]
    hist = np.empty(max_iter if track else 0)
    active = np.empty(p, dtype=np.int64)
    converged = False
    sweeps = 0
    full = True
    while sweeps < max_iter:
        sweeps += 1
        delta_max = 0.0
        if full:
            na = 0
            for k in range(p):
                if k == skip:
                    continue
                delta_max = max(delta_max, _gram_update(G, c, q, b, lam, k))
                if b[k] != 0.0:
                    active[na] = k
                    na += 1
        else:
            for i in range(na):
                delta_max = max(delta_max, _gram_update(G, c, q, b, lam, active[i]))
        if track:
            hist[sweeps - 1] = gram_objective(G, c, yy, b, lam, skip)
        if delta_max < tol:
            if not full:
                # active set settled; confirm with a sweep over every coordinate
                full = True
                continue
            # guard against accumulated drift in q before declaring convergence
            if gram_kkt(G, c, b, lam, skip) <= tol:
                converged = True
                break
            q[:] = 0.0
            for m in range(p):
                if m == skip or b[m] == 0.0:
                    continue
                for k in range(p):
                    q[k] += G[k, m] * b[m]
        else:
            full = False
    return b, sweeps, converged, hist[:sweeps]


@njit(cache=True)
def _gram_update(G, c, q, b, lam, k):
    gkk = G[k, k]
    if gkk <= 0.0:
        new = 0.0
    else:
        new = _soft(c[k] - q[k] + gkk * b[k], lam) / gkk
    d = new - b[k]
    if d != 0.0:
        p = b.shape[0]
        for m in range(p):
            q[m] += G[m, k] * d
        b[k] = new
    return abs(d)


@njit(cache=True)
def cd_residual(X, y, lam, b, tol, max_iter, track):
    """Cyclic CD with residual updates; ``X`` should be Fortran-ordered."""
    n, p = X.shape
    r = y.copy()
    colsq = np.empty(p)
    for k in range(p):
        s = 0.0
        for i in range(n):
            s += X[i, k] * X[i, k]
        colsq[k] = s / n
        if b[k] != 0.0:
            for i in range(n):
                r[i] -= X[i, k] * b[k]
    hist = np.empty(max_iter if track else 0)
    converged = False
    sweeps = 0
    while sweeps < max_iter:
        sweeps += 1
        delta_max = 0.0
        for k in range(p):
            if colsq[k] <= 0.0:
                new = 0.0
            else:
                g = 0.0
                for i in range(n):
                    g += X[i, k] * r[i]
                new = _soft(g / n + colsq[k] * b[k], lam) / colsq[k]
            d = new - b[k]
            if d != 0.0:
                for i in range(n):
                    r[i] -= X[i, k] * d
                b[k] = new
                if abs(d) > delta_max:
                    delta_max = abs(d)
        if track:
            rss = 0.0
            for i in range(n):
                rss += r[i] * r[i]
            l1 = 0.0
            for k in range(p):
                l1 += abs(b[k])
            hist[sweeps - 1] = rss / n + 2.0 * lam * l1
        if delta_max < tol:
            worst = 0.0
            for k in range(p):
                g = 0.0
                for i in range(n):
                    g += X[i, k] * r[i]
                g /= n
                if b[k] > 0.0:
                    v = abs(g - lam)
                elif b[k] < 0.0:
                    v = abs(g + lam)
                else:
                    v = max(abs(g) - lam, 0.0)
                worst = max(worst, v)
            if worst <= tol:
                converged = True
                break
    return b, sweeps, converged, hist[:sweeps]
