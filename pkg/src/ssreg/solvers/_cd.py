"""Coordinate descent kernel for ``0.5 b'Qb - p'b + t * ||b||_1``.

Both the Lasso (``Q = 2X'X/n``, ``p = 2X'y/n``) and the dual of the
l-infinity constrained quadratic program (``Q = Sigma``, ``p = xi``) have this
form, so one compiled kernel serves both.
"""

import numpy as np
from numba import njit

POLISH_AFTER = 50


@njit(cache=True)
def _sweep(Q, t, b, r, full):
    d = b.shape[0]
    dmax = 0.0
    for j in range(d):
        old = b[j]
        if not full and old == 0.0:
            continue
        qjj = Q[j, j]
        if qjj <= 0.0:
            new = 0.0
        else:
            z = r[j] + qjj * old
            if z > t:
                new = (z - t) / qjj
            elif z < -t:
                new = (z + t) / qjj
            else:
                new = 0.0
        if new != old:
            delta = new - old
            for k in range(d):
                r[k] -= delta * Q[j, k]
            b[j] = new
            if abs(delta) > dmax:
                dmax = abs(delta)
    return dmax


@njit(cache=True)
def kkt_residual(b, r, t):
    worst = 0.0
    for j in range(b.shape[0]):
        if b[j] > 0.0:
            v = abs(r[j] - t)
        elif b[j] < 0.0:
            v = abs(r[j] + t)
        else:
            v = abs(r[j]) - t
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _refresh(Q, p, b, r):
    d = b.shape[0]
    for k in range(d):
        acc = p[k]
        for j in range(d):
            if b[j] != 0.0:
                acc -= Q[k, j] * b[j]
        r[k] = acc


@njit(cache=True)
def _submatrix(Q, idx):
    k = idx.shape[0]
    out = np.empty((k, k))
    for a in range(k):
        for c in range(k):
            out[a, c] = Q[idx[a], idx[c]]
    return out


@njit(cache=True)
def _cholesky(A):
    """Lower Cholesky factor and whether every pivot is safely positive."""
    try:
        L = np.linalg.cholesky(A)
    except Exception:
        return np.zeros_like(A), False
    top = 0.0
    low = np.inf
    for a in range(A.shape[0]):
        top = max(top, A[a, a])
        low = min(low, L[a, a] * L[a, a])
    # pivots bound the smallest eigenvalue from above
    return L, low > 1e-10 * max(top, 1e-300)


@njit(cache=True)
def _cho_solve(L, rhs):
    k = rhs.shape[0]
    z = np.empty(k)
    for i in range(k):
        z[i] = (rhs[i] - L[i, :i] @ z[:i]) / L[i, i]
    x = np.empty(k)
    for i in range(k - 1, -1, -1):
        acc = z[i]
        for j in range(i + 1, k):
            acc -= L[j, i] * x[j]
        x[i] = acc / L[i, i]
    return x


@njit(cache=True)
def _purify(Q, trial):
    """Shrink the support along null directions of ``Q`` restricted to it.

    Moving along such a direction leaves ``Q trial`` unchanged, and the
    direction is oriented so that ``||trial||_1`` does not increase; each
    step zeroes one coordinate. Stops when the restricted matrix is regular.
    """
    while True:
        idx = np.flatnonzero(trial)
        k = idx.shape[0]
        if k == 0:
            return
        evals, evecs = np.linalg.eigh(_submatrix(Q, idx))
        scale = max(evals[-1], 1e-300)
        if evals[0] > 1e-10 * scale:
            return
        v = evecs[:, 0]
        slope = 0.0
        for a in range(k):
            slope += np.sign(trial[idx[a]]) * v[a]
        if slope > 0.0:
            v = -v
        step = np.inf
        hit = -1
        for a in range(k):
            ba = trial[idx[a]]
            if v[a] * ba < 0.0:
                s = -ba / v[a]
                if s < step:
                    step = s
                    hit = a
        if hit < 0:
            return
        for a in range(k):
            trial[idx[a]] += step * v[a]
        trial[idx[hit]] = 0.0


@njit(cache=True)
def _objective(Q, p, t, b):
    return 0.5 * b @ (Q @ b) - p @ b + t * np.sum(np.abs(b))


@njit(cache=True)
def _polish(Q, p, t, b, tol):
    """Finish from ``b`` with a sign-pattern active-set method.

    Alternates exact solves of the stationarity equations on the support
    (with a line search that drops coordinates whose sign would flip) and
    the addition of the most violating inactive coordinate. Every accepted
    step lowers the objective. The result replaces ``b`` only if its KKT
    residual is within ``tol``, so a successful polish is certified like
    any other exit.
    """
    d = b.shape[0]
    x = b.copy()
    _purify(Q, x)
    f = _objective(Q, p, t, x)
    for _ in range(10 * d + 100):
        r = p - Q @ x
        if kkt_residual(x, r, t) <= tol:
            b[:] = x
            return True
        idx = np.flatnonzero(x)
        k = idx.shape[0]
        active_ok = True
        for a in range(k):
            if abs(r[idx[a]] - t * np.sign(x[idx[a]])) > tol:
                active_ok = False
                break
        theta = np.sign(x)
        if active_ok:
            # add the worst inactive coordinate
            worst = -1
            gap = tol
            for jj in range(d):
                if x[jj] == 0.0 and abs(r[jj]) - t > gap:
                    gap = abs(r[jj]) - t
                    worst = jj
            if worst < 0:
                return False
            theta[worst] = np.sign(r[worst])
            idx = np.flatnonzero(theta)
            k = idx.shape[0]
        QA = _submatrix(Q, idx)
        L, regular = _cholesky(QA)
        if not regular:
            evals, evecs = np.linalg.eigh(QA)
            regular = evals[0] > 1e-10 * max(evals[-1], 1e-300)
        if not regular:
            # singular support: slide along the null direction (Q-invariant)
            v = evecs[:, 0]
            rate = 0.0
            for a in range(k):
                rate += (t * theta[idx[a]] - r[idx[a]]) * v[a]
            if rate > 0.0:
                v = -v
            step = np.inf
            hit = -1
            for a in range(k):
                xa = x[idx[a]]
                if xa != 0.0 and v[a] * xa < 0.0:
                    s = -xa / v[a]
                    if s < step:
                        step = s
                        hit = a
            if hit < 0:
                return False
            trial = x.copy()
            for a in range(k):
                trial[idx[a]] += step * v[a]
            trial[idx[hit]] = 0.0
        else:
            rhs = np.empty(k)
            for a in range(k):
                rhs[a] = p[idx[a]] - t * theta[idx[a]]
            if L[k - 1, k - 1] > 0.0 and L[0, 0] > 0.0:
                sol = _cho_solve(L, rhs)
            else:
                sol = np.linalg.solve(QA, rhs)
            # candidate points: the full step and every sign crossing on the way
            best = np.inf
            trial = x.copy()
            cands = [1.0]
            for a in range(k):
                xa = x[idx[a]]
                if xa != 0.0 and xa * sol[a] < 0.0:
                    cands.append(xa / (xa - sol[a]))
            for c in cands:
                y = x.copy()
                for a in range(k):
                    y[idx[a]] = x[idx[a]] + c * (sol[a] - x[idx[a]])
                    if c < 1.0 and abs(y[idx[a]]) <= 1e-14 * (1.0 + abs(x[idx[a]])):
                        y[idx[a]] = 0.0
                fy = _objective(Q, p, t, y)
                if fy < best:
                    best = fy
                    trial = y
        ft = _objective(Q, p, t, trial)
        if not ft <= f + 1e-15 * (1.0 + abs(f)):
            return False
        x = trial
        f = ft
    return False


@njit(cache=True)
def cd_solve(Q, p, t, b, max_sweeps, tol):
    """Cyclic coordinate descent in ascending column order, in place on ``b``.

    Returns ``(r, sweeps, converged, kkt)`` where ``r = p - Qb``. Convergence
    requires the largest coordinate move of a full sweep to be below
    ``tol * (1 + max|b|)`` and the stationarity residual to be below ``tol``.
    Between full sweeps the active set is iterated to its own fixed point.
    Once progress is slow (ill-conditioned supports, e.g. more columns than
    rows at small ``t``) the support equations are solved directly.
    """
    d = b.shape[0]
    r = np.empty(d)
    _refresh(Q, p, b, r)
    sweeps = 0
    converged = False
    kkt = np.inf
    while sweeps < max_sweeps:
        dmax = _sweep(Q, t, b, r, True)
        sweeps += 1
        bmax = 0.0
        for j in range(d):
            if abs(b[j]) > bmax:
                bmax = abs(b[j])
        if dmax <= tol * (1.0 + bmax):
            _refresh(Q, p, b, r)
            kkt = kkt_residual(b, r, t)
            if kkt <= tol:
                converged = True
                break
            continue
        if sweeps >= POLISH_AFTER and _polish(Q, p, t, b, tol):
            _refresh(Q, p, b, r)
            kkt = kkt_residual(b, r, t)
            converged = True
            break
        inner = 0
        while sweeps < max_sweeps:
            if inner == POLISH_AFTER and _polish(Q, p, t, b, tol):
                _refresh(Q, p, b, r)
                break
            inner += 1
            dmax = _sweep(Q, t, b, r, False)
            sweeps += 1
            bmax = 0.0
            for j in range(d):
                if abs(b[j]) > bmax:
                    bmax = abs(b[j])
            if dmax <= tol * (1.0 + bmax):
                break
    if not converged:
        _refresh(Q, p, b, r)
        kkt = kkt_residual(b, r, t)
    return r, sweeps, converged, kkt
