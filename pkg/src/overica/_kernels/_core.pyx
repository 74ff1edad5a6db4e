# Compiled kernels: simplex projection, PSD/trace-1 projection, and the
# FISTA + rank-1-restart loop, working in isometric coordinates of the
# symmetric p x p matrices. Mirrors pyref.py; keep the two in sync.

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_blas cimport ddot, dgemv
from scipy.linalg.cython_lapack cimport dsyevd

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)
cdef double INF = float("inf")


cdef void _simplex_inplace(double* v, double* buf, int n) noexcept nogil:
    cdef int i, j, rho = 0
    cdef double key, css = 0.0, css_rho = 0.0, theta
    for i in range(n):
        buf[i] = v[i]
    for i in range(1, n):  # insertion sort, descending; n is small
        key = buf[i]
        j = i - 1
        while j >= 0 and buf[j] < key:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = key
    for i in range(n):
        css += buf[i]
        if buf[i] + (1.0 - css) / (i + 1) > 0.0:
            rho = i
            css_rho = css
    theta = (css_rho - 1.0) / (rho + 1)
    for i in range(n):
        v[i] -= theta
        if v[i] < 0.0:
            v[i] = 0.0


cdef int _proj_K(double* c, int p, int m, long* rows, long* cols,
                 double* A, double* B, double* wr, double* lambuf,
                 double* work, int lwork, int* iwork, int liwork) noexcept nogil:
    """Project coords c onto {PSD, trace 1}; returns LAPACK info."""
    cdef int i, j, k, info = 0
    cdef double lam, vij
    for k in range(m):
        i = rows[k]
        j = cols[k]
        if i == j:
            A[i * p + i] = c[k]
        else:
            A[i * p + j] = c[k] / SQRT2
            A[j * p + i] = c[k] / SQRT2
    dsyevd('V', 'L', &p, A, &p, wr, work, &lwork, iwork, &liwork, &info)
    if info != 0:
        return info
    _simplex_inplace(wr, lambuf, p)
    for k in range(p * p):
        B[k] = 0.0
    for k in range(p):
        lam = wr[k]
        if lam > 0.0:
            for i in range(p):
                vij = lam * A[i + k * p]
                for j in range(p):
                    B[i * p + j] += vij * A[j + k * p]
    for k in range(m):
        i = rows[k]
        j = cols[k]
        if i == j:
            c[k] = B[i * p + i]
        else:
            c[k] = SQRT2 * B[i * p + j]
    return 0


cdef void _rank1_coords(double* c, double* v, int m, long* rows,
                        long* cols) noexcept nogil:
    cdef int k, i, j
    for k in range(m):
        i = rows[k]
        j = cols[k]
        if i == j:
            c[k] = v[i] * v[i]
        else:
            c[k] = SQRT2 * v[i] * v[j]


def _syevd_workspace(int p):
    cdef double wq
    cdef int iwq, lwork = -1, liwork = -1, info = 0
    cdef cnp.ndarray[double, ndim=1] a = np.zeros(p * p)
    cdef cnp.ndarray[double, ndim=1] w = np.zeros(p)
    dsyevd('V', 'L', &p, &a[0], &p, &w[0], &wq, &lwork, &iwq, &liwork, &info)
    return max(int(wq), 1), max(iwq, 1)


def project_simplex(double[::1] v):
    cdef int n = v.shape[0]
    out = np.array(v, dtype=np.float64)
    buf = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] b = buf
    _simplex_inplace(&o[0], &b[0], n)
    return out


def project_psd_trace1(double[:, ::1] B):
    cdef int p = B.shape[0]
    cdef int m = p * (p + 1) // 2
    rows_np, cols_np = np.triu_indices(p)
    rows_np = np.ascontiguousarray(rows_np, dtype=np.int64)
    cols_np = np.ascontiguousarray(cols_np, dtype=np.int64)
    cdef long[::1] rows = rows_np
    cdef long[::1] cols = cols_np
    cdef int k, i, j
    c_np = np.empty(m)
    cdef double[::1] c = c_np
    for k in range(m):
        i = rows[k]
        j = cols[k]
        c[k] = B[i, j] if i == j else SQRT2 * B[i, j]
    lwork, liwork = _syevd_workspace(p)
    A = np.empty(p * p)
    Bs = np.empty(p * p)
    wr = np.empty(p)
    lamb = np.empty(p)
    work = np.empty(lwork)
    iw = np.empty(liwork, dtype=np.int32)
    cdef double[::1] A_ = A
    cdef double[::1] Bs_ = Bs
    cdef double[::1] wr_ = wr
    cdef double[::1] lam_ = lamb
    cdef double[::1] wk_ = work
    cdef int[::1] iw_ = iw
    cdef int info
    info = _proj_K(&c[0], p, m, &rows[0], &cols[0], &A_[0], &Bs_[0],
                   &wr_[0], &lam_[0], &wk_[0], <int> lwork, &iw_[0],
                   <int> liwork)
    if info != 0:
        raise ArithmeticError(f"dsyevd failed with info={info}")
    out = np.empty((p, p))
    cdef double[:, ::1] O = out
    for k in range(m):
        i = rows[k]
        j = cols[k]
        if i == j:
            O[i, i] = c[k]
        else:
            O[i, j] = c[k] / SQRT2
            O[j, i] = c[k] / SQRT2
    return out


def fista_mm(double[::1] g, double[:, ::1] U, double mu, int max_iter,
             int mm_rounds, double tol, double[::1] b0, int p):
    """See pyref.fista_mm; identical semantics, compiled inner loop."""
    cdef int m = g.shape[0]
    cdef int r = U.shape[0]
    if U.shape[1] != m or b0.shape[0] != m or p * (p + 1) // 2 != m:
        raise ValueError("inconsistent kernel dimensions")

    rows_np, cols_np = np.triu_indices(p)
    rows_np = np.ascontiguousarray(rows_np, dtype=np.int64)
    cols_np = np.ascontiguousarray(cols_np, dtype=np.int64)
    cdef long[::1] rows = rows_np
    cdef long[::1] cols = cols_np

    lwork_i, liwork_i = _syevd_workspace(p)
    cdef int lwork = lwork_i
    cdef int liwork = liwork_i

    b_np = np.empty(m)
    bprev_np = np.empty(m)
    y_np = np.empty(m)
    w_np = np.empty(m)
    binit_np = np.array(b0, dtype=np.float64)
    best_np = np.empty(m)
    t_np = np.empty(max(r, 1))
    trace_np = np.empty(max_iter * mm_rounds)
    rounds_np = np.empty(mm_rounds)
    A_np = np.empty(p * p)
    B_np = np.empty(p * p)
    wr_np = np.empty(p)
    lam_np = np.empty(p)
    work_np = np.empty(lwork)
    iwork_np = np.empty(liwork, dtype=np.int32)

    cdef double[::1] b = b_np
    cdef double[::1] bprev = bprev_np
    cdef double[::1] y = y_np
    cdef double[::1] w = w_np
    cdef double[::1] binit = binit_np
    cdef double[::1] best = best_np
    cdef double[::1] t = t_np
    cdef double[::1] trace = trace_np
    cdef double[::1] round_ends = rounds_np
    cdef double[::1] A_ = A_np
    cdef double[::1] B_ = B_np
    cdef double[::1] wr = wr_np
    cdef double[::1] lam = lam_np
    cdef double[::1] work = work_np
    cdef int[::1] iwork = iwork_np
    cdef double[::1] gv = g

    cdef double* Up = NULL
    if r > 0:
        Up = <double*> &U[0, 0]

    cdef double one = 1.0, zero = 0.0
    cdef int inc = 1
    cdef double inv_mu = 1.0 / mu
    cdef double z, z_next, f, f_prev, f_round, best_f, prev_round_f
    cdef double pen, coef
    cdef int n_trace = 0, rounds = 0, i, it, rnd, info = 0
    cdef bint converged = False, have_best = False, stop = False

    best_f = INF
    prev_round_f = INF

    with nogil:
        for rnd in range(mm_rounds):
            for i in range(m):
                bprev[i] = binit[i]
                y[i] = binit[i]
            z = 1.0
            f_prev = INF
            for it in range(max_iter):
                # w = P_W y + g/mu  (gradient step with L = mu)
                if r > 0:
                    dgemv('T', &m, &r, &one, Up, &m, &y[0], &inc, &zero, &t[0], &inc)
                    dgemv('N', &m, &r, &one, Up, &m, &t[0], &inc, &zero, &w[0], &inc)
                else:
                    for i in range(m):
                        w[i] = 0.0
                for i in range(m):
                    w[i] += inv_mu * gv[i]
                info = _proj_K(&w[0], p, m, &rows[0], &cols[0], &A_[0], &B_[0],
                               &wr[0], &lam[0], &work[0], lwork, &iwork[0], liwork)
                if info != 0:
                    stop = True
                    break
                for i in range(m):
                    b[i] = w[i]
                z_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * z * z))
                coef = (z - 1.0) / z_next
                for i in range(m):
                    y[i] = b[i] + coef * (b[i] - bprev[i])
                    bprev[i] = b[i]
                z = z_next
                if r > 0:
                    dgemv('T', &m, &r, &one, Up, &m, &b[0], &inc, &zero, &t[0], &inc)
                    pen = ddot(&m, &b[0], &inc, &b[0], &inc) - ddot(&r, &t[0], &inc, &t[0], &inc)
                else:
                    pen = ddot(&m, &b[0], &inc, &b[0], &inc)
                if pen < 0.0:
                    pen = 0.0
                f = -ddot(&m, &gv[0], &inc, &b[0], &inc) + 0.5 * mu * pen
                trace[n_trace] = f
                n_trace += 1
                if fabs(f - f_prev) <= tol * max(1.0, fabs(f)):
                    break
                f_prev = f
            if stop:
                break
            f_round = f
            round_ends[rounds] = f_round
            rounds += 1
            if f_round < best_f:
                best_f = f_round
                for i in range(m):
                    best[i] = b[i]
                have_best = True
            else:
                converged = fabs(f_round - best_f) <= tol * max(1.0, fabs(best_f))
                break
            if fabs(f_round - prev_round_f) <= tol * max(1.0, fabs(f_round)):
                converged = True
                break
            prev_round_f = f_round
            # rank-1 restart from the top eigenvector of the incumbent
            for i in range(m):
                w[i] = best[i]
            info = 0
            for it in range(m):
                i = rows[it]
                if i == cols[it]:
                    A_[i * p + i] = w[it]
                else:
                    A_[i * p + cols[it]] = w[it] / SQRT2
                    A_[cols[it] * p + i] = w[it] / SQRT2
            dsyevd('V', 'L', &p, &A_[0], &p, &wr[0], &work[0], &lwork,
                   &iwork[0], &liwork, &info)
            if info != 0:
                stop = True
                break
            for i in range(p):
                lam[i] = A_[i + (p - 1) * p]
            _rank1_coords(&binit[0], &lam[0], m, &rows[0], &cols[0])

    if info != 0:
        raise ArithmeticError(f"dsyevd failed with info={info}")
    if not have_best:
        raise ArithmeticError("no FISTA round completed")
    return (best_np, trace_np[:n_trace].copy(), rounds_np[:rounds].copy(),
            bool(converged))
