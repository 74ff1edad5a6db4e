"""Pure-numpy reference implementations of the hot kernels.

Mirrors `_core.pyx` exactly; selected at import time when the compiled
extension is unavailable (or OVERICA_PURE_PYTHON=1).
"""

import numpy as np

_SQRT2 = np.sqrt(2.0)


def project_simplex(v):
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - css) / j > 0.0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_psd_trace1(B):
    w, V = np.linalg.eigh(B)
    lam = project_simplex(w)
    return (V * lam) @ V.T


def fista_mm(g, U, mu, max_iter, mm_rounds, tol, b0, p):
    """Projected accelerated gradient with rank-1 restarts.

    Maximizes <G,B> - (mu/2)||P_perp B||^2 over {B >= 0, Tr B = 1}, working
    in isometric coordinates of the symmetric matrices. `U` holds orthonormal
    rows spanning the feasible subspace, so the penalty is
    (mu/2)(||b||^2 - ||U b||^2). Objective values recorded are of the
    *minimized* composite f(b) = -<g,b> + penalty.

    Returns (b_star, trace, round_ends, converged) where round_ends holds
    the objective at the end of each completed restart round.
    """
    rows, cols = np.triu_indices(p)
    off = rows != cols

    def to_sym(c):
        vals = c.copy()
        vals[off] /= _SQRT2
        M = np.zeros((p, p))
        M[rows, cols] = vals
        M[cols, rows] = vals
        return M

    def to_coords(M):
        c = M[rows, cols].copy()
        c[off] *= _SQRT2
        return c

    def project_K(c):
        w, V = np.linalg.eigh(to_sym(c))
        lam = project_simplex(w)
        return to_coords((V * lam) @ V.T)

    def objective(b):
        t = U @ b
        pen = max(b @ b - t @ t, 0.0)
        return -(g @ b) + 0.5 * mu * pen

    g = np.asarray(g, dtype=float)
    inv_mu = 1.0 / mu
    trace = np.empty(max_iter * mm_rounds)
    n_trace = 0
    round_ends = []
    b_init = np.asarray(b0, dtype=float).copy()
    best_b = None
    best_f = np.inf
    prev_round_f = np.inf
    converged = False

    for _ in range(mm_rounds):
        b_prev = b_init.copy()
        y = b_init.copy()
        z = 1.0
        f_prev = np.inf
        b = b_prev
        for _ in range(max_iter):
            # y - (1/mu) grad f(y) collapses to P_W y + g/mu since L = mu
            w = U.T @ (U @ y) + inv_mu * g
            b = project_K(w)
            z_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * z * z))
            y = b + ((z - 1.0) / z_next) * (b - b_prev)
            b_prev = b
            z = z_next
            f = objective(b)
            trace[n_trace] = f
            n_trace += 1
            if abs(f - f_prev) <= tol * max(1.0, abs(f)):
                break
            f_prev = f
        f_round = objective(b)
        round_ends.append(f_round)
        if f_round < best_f:
            best_f = f_round
            best_b = b.copy()
        else:
            # deterministic restart map: a non-improving round is a fixed point
            converged = abs(f_round - best_f) <= tol * max(1.0, abs(best_f))
            break
        if abs(f_round - prev_round_f) <= tol * max(1.0, abs(f_round)):
            converged = True
            break
        prev_round_f = f_round
        w_eig, V = np.linalg.eigh(to_sym(best_b))
        v = V[:, -1]
        b_init = to_coords(np.outer(v, v))

    return best_b, trace[:n_trace].copy(), np.asarray(round_ends), converged
