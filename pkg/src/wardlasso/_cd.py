"""Coordinate-descent kernels (numba).

All kernels avoid BLAS so that results do not depend on the thread layout
of the calling process.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def _col_dot(X, j, v):
    n = X.shape[0]
    acc = 0.0
    for i in range(n):
        acc += X[i, j] * v[i]
    return acc


@njit(cache=True)
def _enet_sweep(X, r, beta, norms, lam1, lam2, idx, n_idx):
    n = X.shape[0]
    max_upd = 0.0
    for t in range(n_idx):
        j = idx[t]
        denom = norms[j] + lam2
        old = beta[j]
        if denom <= 0.0:
            new = 0.0
        else:
            z = _col_dot(X, j, r) / n + norms[j] * old
            new = _soft(z, lam1) / denom
        d = new - old
        if d != 0.0:
            beta[j] = new
            for i in range(n):
                r[i] -= X[i, j] * d
            if abs(d) > max_upd:
                max_upd = abs(d)
    return max_upd


@njit(cache=True)
def enet_kkt_residual(X, r, beta, lam1, lam2):
    """Largest violation of the elastic-net subgradient conditions."""
    n, p = X.shape
    worst = 0.0
    for j in range(p):
        g = _col_dot(X, j, r) / n - lam2 * beta[j]
        if beta[j] == 0.0:
            v = abs(g) - lam1
        elif beta[j] > 0.0:
            v = abs(g - lam1)
        else:
            v = abs(g + lam1)
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _enet_value(r, beta, idx, n_idx, lam1, lam2):
    n = r.shape[0]
    acc = 0.0
    for i in range(n):
        acc += r[i] * r[i]
    pen1 = 0.0
    pen2 = 0.0
    for t in range(n_idx):
        b = beta[idx[t]]
        pen1 += abs(b)
        pen2 += b * b
    return 0.5 * acc / n + lam1 * pen1 + 0.5 * lam2 * pen2


@njit(cache=True)
def _solve_small(M, rhs):
    # Gaussian elimination with partial pivoting on a tiny dense system
    K = M.shape[0]
    A = M.copy()
    b = rhs.copy()
    for c in range(K):
        piv = c
        for r in range(c + 1, K):
            if abs(A[r, c]) > abs(A[piv, c]):
                piv = r
        if A[piv, c] == 0.0:
            return b, False
        if piv != c:
            for k in range(K):
                A[c, k], A[piv, k] = A[piv, k], A[c, k]
            b[c], b[piv] = b[piv], b[c]
        for r in range(c + 1, K):
            f = A[r, c] / A[c, c]
            for k in range(c, K):
                A[r, k] -= f * A[c, k]
            b[r] -= f * b[c]
    x = np.empty(K)
    for c in range(K - 1, -1, -1):
        acc = b[c]
        for k in range(c + 1, K):
            acc -= A[c, k] * x[k]
        x[c] = acc / A[c, c]
    return x, True


@njit(cache=True)
def _anderson_step(X, y, r, beta, hist, idx, n_idx, lam1, lam2):
    """Extrapolate the last iterates in ``hist`` (rows = iterates over
    ``idx``); keep the result only if it lowers the objective."""
    K = hist.shape[0] - 1
    U = np.empty((K, n_idx))
    for k in range(K):
        for t in range(n_idx):
            U[k, t] = hist[k + 1, t] - hist[k, t]
    M = np.empty((K, K))
    scale = 0.0
    for a in range(K):
        for b in range(K):
            acc = 0.0
            for t in range(n_idx):
                acc += U[a, t] * U[b, t]
            M[a, b] = acc
        scale += M[a, a]
    if scale == 0.0:
        return
    for a in range(K):
        M[a, a] += 1e-10 * scale
    z, ok = _solve_small(M, np.ones(K))
    if not ok:
        return
    zs = 0.0
    for k in range(K):
        zs += z[k]
    if zs == 0.0 or not np.isfinite(zs):
        return
    ext = np.zeros(n_idx)
    for k in range(K):
        c = z[k] / zs
        for t in range(n_idx):
            ext[t] += c * hist[k + 1, t]
    n = X.shape[0]
    r_ext = y.copy()
    for t in range(n_idx):
        b = ext[t]
        if b != 0.0:
            j = idx[t]
            for i in range(n):
                r_ext[i] -= X[i, j] * b
    # coefficients outside idx are zero on the inner problem
    old = beta.copy()
    for t in range(n_idx):
        beta[idx[t]] = ext[t]
    if _enet_value(r_ext, beta, idx, n_idx, lam1, lam2) < _enet_value(
            r, old, idx, n_idx, lam1, lam2):
        for i in range(n):
            r[i] = r_ext[i]
    else:
        for t in range(n_idx):
            beta[idx[t]] = old[idx[t]]


@njit(cache=True)
def enet_cd(X, y, beta, lam1, lam2, tol, max_iter):
    """Minimize (1/2n)||y - X b||^2 + lam1 ||b||_1 + lam2/2 ||b||^2 in place.

    ``max_iter`` bounds full sweeps; between full sweeps the solver
    iterates on the current active set, with Anderson extrapolation every
    few sweeps. Convergence requires both a maximum coefficient update
    below ``tol`` and a KKT residual below ``tol``.
    Returns (n_full_sweeps, converged).
    """
    n, p = X.shape
    n_hist = 6
    norms = np.empty(p)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += X[i, j] * X[i, j]
        norms[j] = acc / n
    r = y.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for i in range(n):
                r[i] -= X[i, j] * beta[j]
    all_idx = np.arange(p)
    active = np.empty(p, dtype=np.int64)
    n_sweeps = 0
    while n_sweeps < max_iter:
        max_upd = _enet_sweep(X, r, beta, norms, lam1, lam2, all_idx, p)
        n_sweeps += 1
        if max_upd < tol:
            if enet_kkt_residual(X, r, beta, lam1, lam2) <= tol:
                return n_sweeps, True
            continue
        n_active = 0
        for j in range(p):
            if beta[j] != 0.0:
                active[n_active] = j
                n_active += 1
        hist = np.empty((n_hist, n_active))
        for it in range(100 * max_iter):
            if _enet_sweep(X, r, beta, norms, lam1, lam2, active, n_active) < tol:
                break
            slot = it % n_hist
            for t in range(n_active):
                hist[slot, t] = beta[active[t]]
            if slot == n_hist - 1:
                _anderson_step(X, y, r, beta, hist, active, n_active, lam1, lam2)
    return n_sweeps, False


@njit(cache=True)
def _log1pexp_neg(m):
    # log(1 + exp(-m)), stable for both signs
    if m > 0.0:
        return np.log1p(np.exp(-m))
    return -m + np.log1p(np.exp(m))


@njit(cache=True)
def _sigmoid(t):
    if t >= 0.0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


@njit(cache=True)
def logistic_value(eta, y, beta, lam1, lam2):
    n = eta.shape[0]
    acc = 0.0
    for i in range(n):
        acc += _log1pexp_neg(y[i] * eta[i])
    l1 = 0.0
    l2 = 0.0
    for j in range(beta.shape[0]):
        l1 += abs(beta[j])
        l2 += beta[j] * beta[j]
    return acc / n + lam1 * l1 + 0.5 * lam2 * l2


@njit(cache=True)
def _linear_predictor(X, beta, b):
    n, p = X.shape
    eta = np.full(n, b)
    for j in range(p):
        if beta[j] != 0.0:
            for i in range(n):
                eta[i] += X[i, j] * beta[j]
    return eta


@njit(cache=True)
def logistic_loss_grad(X, y, eta):
    """Gradient of the mean logistic loss w.r.t. (beta, intercept)."""
    n, p = X.shape
    g = np.empty(n)
    for i in range(n):
        g[i] = -y[i] * _sigmoid(-y[i] * eta[i]) / n
    gb = 0.0
    for i in range(n):
        gb += g[i]
    gbeta = np.empty(p)
    for j in range(p):
        gbeta[j] = _col_dot(X, j, g)
    return gbeta, gb, g


@njit(cache=True)
def logistic_kkt_residual(X, y, beta, b, lam1, lam2, fit_intercept):
    eta = _linear_predictor(X, beta, b)
    gbeta, gb, _ = logistic_loss_grad(X, y, eta)
    worst = abs(gb) if fit_intercept else 0.0
    for j in range(beta.shape[0]):
        g = gbeta[j] + lam2 * beta[j]
        if beta[j] == 0.0:
            v = abs(g) - lam1
        elif beta[j] > 0.0:
            v = abs(g + lam1)
        else:
            v = abs(g - lam1)
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _quad_sweep(X, h, q, hx2, beta, lam1, lam2, idx, n_idx):
    # one CD pass on sum(q0 * d_eta) + 1/2 sum(h * d_eta^2) + penalty;
    # q holds the gradient of the quadratic model w.r.t. eta
    n = X.shape[0]
    max_upd = 0.0
    for t in range(n_idx):
        j = idx[t]
        a = hx2[j]
        if a + lam2 <= 0.0:
            continue
        G = _col_dot(X, j, q)
        old = beta[j]
        nb = _soft(a * old - G, lam1) / (a + lam2)
        d = nb - old
        if d != 0.0:
            beta[j] = nb
            for i in range(n):
                q[i] += h[i] * X[i, j] * d
            if abs(d) > max_upd:
                max_upd = abs(d)
    return max_upd


@njit(cache=True)
def _quad_intercept(h, q, hsum, b):
    gq = 0.0
    for i in range(q.shape[0]):
        gq += q[i]
    db = -gq / hsum
    if db != 0.0:
        for i in range(q.shape[0]):
            q[i] += h[i] * db
    return abs(db), b + db


@njit(cache=True)
def logistic_cd(X, y, beta, b, lam1, lam2, tol, max_iter, fit_intercept):
    """Proximal Newton for penalized logistic regression, y in {-1, +1}.

    Minimizes (1/n) sum log(1 + exp(-y (X beta + b))) + lam1 ||beta||_1
    + lam2/2 ||beta||^2 with an unpenalized intercept. Each outer step
    solves the local quadratic model by coordinate descent and takes a
    backtracking step on the true objective. ``beta`` is updated in
    place; returns (intercept, n_outer, converged).
    """
    n, p = X.shape
    new_beta = beta.copy()
    hx2 = np.empty(p)
    h = np.empty(n)
    q = np.empty(n)
    all_idx = np.arange(p)
    active = np.empty(p, dtype=np.int64)
    for it in range(max_iter):
        eta = _linear_predictor(X, beta, b)
        gbeta, gb, g = logistic_loss_grad(X, y, eta)
        # optimality check
        worst = abs(gb) if fit_intercept else 0.0
        for j in range(p):
            gj = gbeta[j] + lam2 * beta[j]
            if beta[j] == 0.0:
                v = abs(gj) - lam1
            elif beta[j] > 0.0:
                v = abs(gj + lam1)
            else:
                v = abs(gj - lam1)
            if v > worst:
                worst = v
        if worst <= tol:
            return b, it, True

        hsum = 0.0
        for i in range(n):
            s = _sigmoid(eta[i])
            h[i] = max(s * (1.0 - s), 1e-10) / n
            q[i] = g[i]
            hsum += h[i]
        for j in range(p):
            acc = 0.0
            for i in range(n):
                acc += h[i] * X[i, j] * X[i, j]
            hx2[j] = acc
            new_beta[j] = beta[j]
        new_b = b
        for _ in range(max_iter * 10):
            max_upd = _quad_sweep(X, h, q, hx2, new_beta, lam1, lam2, all_idx, p)
            if fit_intercept:
                db, new_b = _quad_intercept(h, q, hsum, new_b)
                max_upd = max(max_upd, db)
            if max_upd < 0.1 * tol:
                break
            n_active = 0
            for j in range(p):
                if new_beta[j] != 0.0:
                    active[n_active] = j
                    n_active += 1
            for _ in range(1000):
                max_upd = _quad_sweep(X, h, q, hx2, new_beta, lam1, lam2,
                                      active, n_active)
                if fit_intercept:
                    db, new_b = _quad_intercept(h, q, hsum, new_b)
                    max_upd = max(max_upd, db)
                if max_upd < 0.1 * tol:
                    break

        # backtracking line search along the Newton direction
        f0 = logistic_value(eta, y, beta, lam1, lam2)
        dec = 0.0
        l1_old = 0.0
        l1_new = 0.0
        for j in range(p):
            dj = new_beta[j] - beta[j]
            dec += (gbeta[j] + lam2 * beta[j]) * dj
            l1_old += abs(beta[j])
            l1_new += abs(new_beta[j])
        dec += gb * (new_b - b) + lam1 * (l1_new - l1_old)
        step = 1.0
        trial = np.empty(p)
        accepted = False
        for _ in range(60):
            for j in range(p):
                trial[j] = beta[j] + step * (new_beta[j] - beta[j])
            tb = b + step * (new_b - b)
            f1 = logistic_value(_linear_predictor(X, trial, tb), y, trial, lam1, lam2)
            if f1 <= f0 + 1e-4 * step * dec or f1 <= f0 and step < 1e-12:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return b, it + 1, False
        moved = 0.0
        for j in range(p):
            if abs(trial[j] - beta[j]) > moved:
                moved = abs(trial[j] - beta[j])
            beta[j] = trial[j]
        if abs(tb - b) > moved:
            moved = abs(tb - b)
        b = tb
        if moved == 0.0:
            return b, it + 1, logistic_kkt_residual(
                X, y, beta, b, lam1, lam2, fit_intercept) <= tol
    return b, max_iter, logistic_kkt_residual(
        X, y, beta, b, lam1, lam2, fit_intercept) <= tol
