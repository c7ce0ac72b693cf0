"""Compiled eigen-kernels.

Cyclic complex Jacobi for Hermitian matrices, and Householder Hessenberg
reduction followed by single-shift complex QR (Wilkinson shift) for general
matrices.  The Python-facing wrappers live in ``dense.py``; these functions
take and return plain arrays plus integer status codes.
"""
import numpy as np
from numba import njit

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 30
QR_DEFLATE_TOL = 1e-14
QR_ITER_FACTOR = 40


@njit(cache=True)
def _offdiag_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j].real ** 2 + a[i, j].imag ** 2
    return np.sqrt(s)


@njit(cache=True)
def jacobi_hermitian(h, tol, max_sweeps):
    """Return (values, vectors, sweeps, status); status 0 = converged."""
    n = h.shape[0]
    a = h.copy()
    for i in range(n):
        a[i, i] = a[i, i].real
    v = np.eye(n, dtype=np.complex128)
    fro = np.sqrt(np.sum(a.real ** 2 + a.imag ** 2))
    target = tol * fro
    sweeps = 0
    status = 1
    while sweeps <= max_sweeps:
        if _offdiag_norm(a) <= target:
            status = 0
            break
        if sweeps == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                spc = s * np.conj(phase)
                # columns: A <- A J
                for i in range(n):
                    x = a[i, p]
                    y = a[i, q]
                    a[i, p] = c * x - spc * y
                    a[i, q] = sp * x + c * y
                    x = v[i, p]
                    y = v[i, q]
                    v[i, p] = c * x - spc * y
                    v[i, q] = sp * x + c * y
                # rows: A <- J* A
                for j in range(n):
                    x = a[p, j]
                    y = a[q, j]
                    a[p, j] = c * x - sp * y
                    a[q, j] = spc * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(w, kind="mergesort")
    return w[order], v[:, order], sweeps, status


@njit(cache=True)
def jacobi_hermitian_batch(hs, tol, max_sweeps):
    m = hs.shape[0]
    n = hs.shape[1]
    ws = np.empty((m, n))
    vs = np.empty((m, n, n), dtype=np.complex128)
    status = np.zeros(m, dtype=np.int64)
    for b in range(m):
        w, v, _, st = jacobi_hermitian(hs[b], tol, max_sweeps)
        ws[b] = w
        vs[b] = v
        status[b] = st
    return ws, vs, status


@njit(cache=True)
def hessenberg(a, want_q):
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        xn = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
        if xn == 0.0:
            continue
        x0 = x[0]
        ax0 = abs(x0)
        ph = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -ph * xn
        x[0] = x[0] - alpha
        vn = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
        if vn == 0.0:
            continue
        x = x / vn
        # H <- (I - 2vv*) H (I - 2vv*)
        for j in range(n):
            s = 0.0j
            for i in range(x.shape[0]):
                s += np.conj(x[i]) * h[k + 1 + i, j]
            for i in range(x.shape[0]):
                h[k + 1 + i, j] -= 2.0 * x[i] * s
        for i in range(n):
            s = 0.0j
            for j in range(x.shape[0]):
                s += h[i, k + 1 + j] * x[j]
            for j in range(x.shape[0]):
                h[i, k + 1 + j] -= 2.0 * s * np.conj(x[j])
        if want_q:
            for i in range(n):
                s = 0.0j
                for j in range(x.shape[0]):
                    s += q[i, k + 1 + j] * x[j]
                for j in range(x.shape[0]):
                    q[i, k + 1 + j] -= 2.0 * s * np.conj(x[j])
        h[k + 1, k] = alpha
        for i in range(k + 2, n):
            h[i, k] = 0.0
    return h, q


@njit(cache=True)
def _givens(x, y):
    ax = abs(x)
    ay = abs(y)
    if ay == 0.0:
        return 1.0, 0.0j
    if ax == 0.0:
        return 0.0, np.conj(y) / ay
    r = np.hypot(ax, ay)
    return ax / r, (x / ax) * np.conj(y) / r


@njit(cache=True)
def schur(a, want_z, deflate_tol, iter_factor):
    """Complex Schur form ``a = Z T Z*``.

    Returns (T, Z, iterations, hi, status).  On failure (status 1) the
    entries of diag(T) with index > hi have deflated, the rest have not.
    """
    n = a.shape[0]
    h, z = hessenberg(a, want_z)
    fro = np.sqrt(np.sum(h.real ** 2 + h.imag ** 2))
    if fro == 0.0:
        fro = 1.0
    hi = n - 1
    iters = 0
    since = 0
    cap = iter_factor * n
    while hi > 0:
        l = hi
        while l > 0:
            s = abs(h[l - 1, l - 1]) + abs(h[l, l])
            if s == 0.0:
                s = fro
            if abs(h[l, l - 1]) <= deflate_tol * s:
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            since = 0
            continue
        if iters >= cap:
            return h, z, iters, hi, 1
        iters += 1
        since += 1
        if since % 10 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            aa = h[hi - 1, hi - 1]
            bb = h[hi - 1, hi]
            cc = h[hi, hi - 1]
            dd = h[hi, hi]
            half = 0.5 * (aa - dd)
            disc = np.sqrt(half * half + bb * cc)
            mu1 = 0.5 * (aa + dd) + disc
            mu2 = 0.5 * (aa + dd) - disc
            mu = mu1 if abs(mu1 - dd) <= abs(mu2 - dd) else mu2
        x = h[l, l] - mu
        y = h[l + 1, l]
        for k in range(l, hi):
            if k > l:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            c, s = _givens(x, y)
            cs = np.conj(s)
            j0 = k - 1 if k > l else l
            for j in range(j0, n):
                h1 = h[k, j]
                h2 = h[k + 1, j]
                h[k, j] = c * h1 + s * h2
                h[k + 1, j] = -cs * h1 + c * h2
            if k > l:
                h[k + 1, k - 1] = 0.0
            imax = k + 3 if k + 3 < hi + 1 else hi + 1
            for i in range(0, imax):
                h1 = h[i, k]
                h2 = h[i, k + 1]
                h[i, k] = c * h1 + cs * h2
                h[i, k + 1] = -s * h1 + c * h2
            if want_z:
                for i in range(n):
                    z1 = z[i, k]
                    z2 = z[i, k + 1]
                    z[i, k] = c * z1 + cs * z2
                    z[i, k + 1] = -s * z1 + c * z2
    for i in range(1, n):
        for j in range(i):
            h[i, j] = 0.0
    return h, z, iters, -1, 0


@njit(cache=True)
def triangular_eigvecs(t):
    """Unit eigenvectors of an upper-triangular ``t`` (columns)."""
    n = t.shape[0]
    fro = np.sqrt(np.sum(t.real ** 2 + t.imag ** 2))
    small = 1e-15 * (fro if fro > 0.0 else 1.0)
    y = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        lam = t[i, i]
        y[i, i] = 1.0
        for j in range(i - 1, -1, -1):
            s = 0.0j
            for m in range(j + 1, i + 1):
                s += t[j, m] * y[m, i]
            d = t[j, j] - lam
            if abs(d) < small:
                d = small
            y[j, i] = -s / d
        nrm = np.sqrt(np.sum(y[:, i].real ** 2 + y[:, i].imag ** 2))
        for j in range(i + 1):
            y[j, i] /= nrm
    return y


@njit(cache=True)
def eig_batch(ms, want_vectors, deflate_tol, iter_factor):
    """Eigenvalues (and optionally eigenvectors) of a stack of matrices."""
    m = ms.shape[0]
    n = ms.shape[1]
    vals = np.empty((m, n), dtype=np.complex128)
    vecs = np.empty((m, n, n) if want_vectors else (0, n, n), dtype=np.complex128)
    status = np.zeros(m, dtype=np.int64)
    for b in range(m):
        if n == 1:
            vals[b, 0] = ms[b, 0, 0]
            if want_vectors:
                vecs[b, 0, 0] = 1.0
            continue
        t, z, _, _, st = schur(ms[b], want_vectors, deflate_tol, iter_factor)
        status[b] = st
        for i in range(n):
            vals[b, i] = t[i, i]
        if want_vectors:
            y = triangular_eigvecs(t)
            for i in range(n):
                for j in range(n):
                    acc = 0.0j
                    for m2 in range(j + 1):
                        acc += z[i, m2] * y[m2, j]
                    vecs[b, i, j] = acc
    return vals, vecs, status
