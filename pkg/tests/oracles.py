"""Independent reference implementations used by the tests.

Nothing here imports the package under test except where a routine is the
explicit subject of comparison (the normal tail is shared so scalar loops can
be compared for exact equality; the tail itself is checked against mpmath).
"""

import math

import numpy as np
from fncreg.fnp import norm_sf


def upper_tail(t):
    return float(norm_sf(t))


def lasso_objective(x, y, b, lam):
    r = y - x @ b
    return float(r @ r / x.shape[0] + 2 * lam * np.abs(b).sum())


def lasso_fista(x, y, lam, max_iter=1_000_000, tol=1e-15):
    """Accelerated proximal gradient with adaptive restart.

    Step 1/L with L the Lipschitz constant of the smooth part's gradient,
    two times the top eigenvalue of X^T X / n.
    """
    n, p = x.shape
    G = x.T @ x / n
    c = x.T @ y / n
    L = 2 * max(np.linalg.eigvalsh(G)[-1], 1e-12)
    step = 1 / L
    b = np.zeros(p)
    v = b.copy()
    tk = 1.0
    for _ in range(max_iter):
        grad = 2 * (G @ v - c)
        u = v - step * grad
        b_new = np.sign(u) * np.maximum(np.abs(u) - 2 * lam * step, 0.0)
        if np.max(np.abs(b_new - b), initial=0.0) < tol:
            b = b_new
            break
        t_new = (1 + math.sqrt(1 + 4 * tk * tk)) / 2
        # restart momentum when it points uphill
        if (b_new - b) @ (v - b_new) > 0:
            t_new, v = 1.0, b_new.copy()
        else:
            v = b_new + (tk - 1) / t_new * (b_new - b)
        b, tk = b_new, t_new
    return b


def ista(x, y, lam, iters):
    """Plain proximal gradient for a fixed number of iterations."""
    n, p = x.shape
    G = x.T @ x / n
    c = x.T @ y / n
    step = 1 / (2 * np.linalg.eigvalsh(G)[-1])
    b = np.zeros(p)
    for _ in range(iters):
        u = b - step * 2 * (G @ b - c)
        b = np.sign(u) * np.maximum(np.abs(u) - 2 * lam * step, 0.0)
    return b


def ranked_abs(z):
    """``|z|`` sorted descending with ties by ascending index, as Python floats."""
    pairs = sorted(((abs(float(v)), i) for i, v in enumerate(z)), key=lambda q: (-q[0], q[1]))
    return [a for a, _ in pairs], [i for _, i in pairs]


def v_bruteforce(z):
    a, _ = ranked_abs(z)
    p = len(a)
    best = -math.inf
    for j in range(1, p + 1):
        if not (1 < j < p / 2):
            continue
        s = upper_tail(a[j - 1])
        var = 2 * s * (1 - 2 * s)
        if var < 1e-24:
            continue
        h = (j / p - 2 * s) / math.sqrt(var)
        best = max(best, h)
    return best


def pi_bruteforce(z, c):
    a, _ = ranked_abs(z)
    p = len(a)
    best = None
    for j in range(1, p + 1):
        if not (1 < j < p / 2):
            continue
        s = upper_tail(a[j - 1])
        den = 1 - 2 * s
        if den < 1e-12:
            continue
        num = j / p - 2 * s - c * math.sqrt(2 * s * (1 - 2 * s))
        val = num / den
        best = val if best is None else max(best, val)
    return best


def quantile_type7(values, q):
    """Linear-interpolation sample quantile (Hyndman and Fan type 7)."""
    v = sorted(float(x) for x in values)
    h = (len(v) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (h - lo) * (v[hi] - v[lo])


def fnp_table(z, s_hat):
    """Estimated FNP (clamped) at every |z| value, straight from the definition."""
    p = len(z)
    rows = []
    for t in sorted({abs(float(v)) for v in z}, reverse=True):
        r = sum(abs(float(v)) > t for v in z)
        phi_neg = 0.5 * math.erfc(t / math.sqrt(2))
        raw = 1 - (r - 2 * (p - s_hat) * phi_neg) / s_hat
        rows.append((t, r, min(1.0, max(0.0, raw))))
    return rows


def select_bruteforce(z, s_hat, eps):
    ok = [t for t, _, f in fnp_table(z, s_hat) if f <= eps]
    if not ok:
        return math.inf, set()
    t = max(ok)
    return t, {j for j, v in enumerate(z) if abs(float(v)) >= t}
