# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Boyd p-norm power iteration and bisection enumeration.

Numerically identical in intent to ``_pykernels``; the update rule and the
stopping test are the same, only the loop runs in C, one restart at a time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt, hypot
from libc.stdint cimport uint64_t

cnp.import_array()


cdef inline double cabs_(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef double pnorm_vec(double complex[::1] v, Py_ssize_t n, double p) nogil:
    cdef Py_ssize_t i
    cdef double scale = 0.0, s = 0.0, a
    for i in range(n):
        a = cabs_(v[i])
        if a > scale:
            scale = a
    if scale == 0.0:
        return 0.0
    for i in range(n):
        s += pow(cabs_(v[i]) / scale, p)
    return scale * pow(s, 1.0 / p)


cdef void dualize(double complex[::1] v, double complex[::1] out, Py_ssize_t n, double r) nogil:
    cdef Py_ssize_t i
    cdef double scale = 0.0, s = 0.0, a, norm
    for i in range(n):
        a = cabs_(v[i])
        if a > scale:
            scale = a
    if scale == 0.0:
        for i in range(n):
            out[i] = 0.0
        return
    for i in range(n):
        s += pow(cabs_(v[i]) / scale, r)
    norm = pow(s, (r - 1.0) / r)
    for i in range(n):
        a = cabs_(v[i])
        if a > 0.0:
            # componentwise division by a real stays finite for subnormal entries
            out[i] = (v[i].real / a + 1j * (v[i].imag / a)) * (pow(a / scale, r - 1.0) / norm)
        else:
            out[i] = 0.0


cdef void matvec(double complex[:, ::1] M, double complex[::1] x, double complex[::1] y,
                 Py_ssize_t m, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double complex acc
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc = acc + M[i, j] * x[j]
        y[i] = acc


def boyd_pnorm(M, double p, starts, int max_iter, double tol):
    """Same contract as ``_pykernels.boyd_pnorm``."""
    cdef double complex[:, ::1] A = np.ascontiguousarray(M, dtype=np.complex128)
    cdef double complex[:, ::1] AH = np.ascontiguousarray(np.conj(np.asarray(M, dtype=np.complex128)).T)
    cdef double complex[:, ::1] X0 = np.ascontiguousarray(np.asarray(starts, dtype=np.complex128).T)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1], R = X0.shape[0]
    cdef double q = p / (p - 1.0)
    cdef double complex[::1] x = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] y = np.zeros(m, dtype=np.complex128)
    cdef double complex[::1] z = np.zeros(m, dtype=np.complex128)
    cdef double complex[::1] w = np.zeros(n, dtype=np.complex128)
    best_x_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] best_x = best_x_arr
    cdef double best = -1.0, val, val_new, xn
    cdef int it, used, max_used = 0
    cdef bint all_conv = True, conv
    cdef Py_ssize_t r, i
    with nogil:
        for r in range(R):
            for i in range(n):
                x[i] = X0[r, i]
            xn = pnorm_vec(x, n, p)
            if xn == 0.0:
                continue
            for i in range(n):
                x[i] = x[i] / xn
            matvec(A, x, y, m, n)
            val = pnorm_vec(y, m, p)
            if val > best:
                best = val
                for i in range(n):
                    best_x[i] = x[i]
            if val == 0.0:
                continue
            conv = False
            used = 0
            for it in range(1, max_iter + 1):
                used = it
                dualize(y, z, m, p)
                matvec(AH, z, w, n, m)
                dualize(w, x, n, q)
                matvec(A, x, y, m, n)
                val_new = pnorm_vec(y, m, p)
                if val_new > best:
                    best = val_new
                    for i in range(n):
                        best_x[i] = x[i]
                if fabs(val_new - val) <= tol * (val_new if val_new > 1.0 else 1.0):
                    conv = True
                    val = val_new
                    break
                val = val_new
            if used > max_used:
                max_used = used
            if not conv:
                all_conv = False
    if best < 0.0:
        best = 0.0
    return float(best), best_x_arr, int(max_used), bool(all_conv)


def enumerate_bisection_masks(source, range_, Py_ssize_t limit):
    """Same contract as ``_pykernels.enumerate_bisection_masks``; needs < 64 arrows and units."""
    cdef long[::1] src = np.ascontiguousarray(source, dtype=np.int_)
    cdef long[::1] rng = np.ascontiguousarray(range_, dtype=np.int_)
    cdef Py_ssize_t n = src.shape[0]
    if n >= 64:
        raise OverflowError("compiled enumeration supports fewer than 64 arrows")
    # explicit stack: position i, chosen-flag per level
    cdef uint64_t mask = 0, used_s = 0, used_r = 0
    cdef int[64] state
    cdef Py_ssize_t i = 0, count = 0
    out = []
    for i in range(64):
        state[i] = 0
    i = 0
    while True:
        if i == n:
            out.append(mask)
            count += 1
            if count > limit:
                raise OverflowError("bisection count exceeds limit")
            i -= 1
            # backtrack to the deepest level that can still branch
            while i >= 0:
                if state[i] == 1:
                    mask &= ~((<uint64_t>1) << i)
                    used_s &= ~((<uint64_t>1) << src[i])
                    used_r &= ~((<uint64_t>1) << rng[i])
                    state[i] = 2
                    i -= 1
                    continue
                if state[i] == 2:
                    state[i] = 0
                    i -= 1
                    continue
                # state 0: excluded branch done, try including
                if not (used_s & ((<uint64_t>1) << src[i])) and not (used_r & ((<uint64_t>1) << rng[i])):
                    state[i] = 1
                    mask |= (<uint64_t>1) << i
                    used_s |= (<uint64_t>1) << src[i]
                    used_r |= (<uint64_t>1) << rng[i]
                    i += 1
                    break
                state[i] = 2
                i -= 1
            if i < 0:
                break
            continue
        state[i] = 0
        i += 1
    return out
