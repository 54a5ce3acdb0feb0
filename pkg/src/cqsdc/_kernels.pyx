# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def apply_1q(const double complex[::1] psi, int n, int pos, gate):
    cdef Py_ssize_t dim = psi.shape[0], i, j
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n - 1 - pos)
    cdef double complex g00 = gate[0, 0], g01 = gate[0, 1]
    cdef double complex g10 = gate[1, 0], g11 = gate[1, 1]
    cdef double complex a0, a1
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        a0 = psi[i]
        a1 = psi[j]
        o[i] = g00 * a0 + g01 * a1
        o[j] = g10 * a0 + g11 * a1
    return out


def apply_2q(const double complex[::1] psi, int n, int p1, int p2, gate):
    cdef Py_ssize_t dim = psi.shape[0], i, r, c
    cdef Py_ssize_t s1 = (<Py_ssize_t>1) << (n - 1 - p1)
    cdef Py_ssize_t s2 = (<Py_ssize_t>1) << (n - 1 - p2)
    cdef double complex g[4][4]
    cdef double complex a[4]
    cdef Py_ssize_t idx[4]
    cdef double complex acc
    for r in range(4):
        for c in range(4):
            g[r][c] = gate[r, c]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(dim):
        if (i & s1) or (i & s2):
            continue
        idx[0] = i
        idx[1] = i | s2
        idx[2] = i | s1
        idx[3] = i | s1 | s2
        for c in range(4):
            a[c] = psi[idx[c]]
        for r in range(4):
            acc = 0
            for c in range(4):
                acc = acc + g[r][c] * a[c]
            o[idx[r]] = acc
    return out


def apply_cnot(const double complex[::1] psi, int n, int control, int target):
    cdef Py_ssize_t dim = psi.shape[0], i
    cdef Py_ssize_t sc = (<Py_ssize_t>1) << (n - 1 - control)
    cdef Py_ssize_t st = (<Py_ssize_t>1) << (n - 1 - target)
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(dim):
        if i & sc:
            o[i] = psi[i ^ st]
        else:
            o[i] = psi[i]
    return out


def marginal(const double complex[::1] psi, int n, positions):
    cdef Py_ssize_t dim = psi.shape[0], i, loc
    cdef int k = len(positions), j
    cdef int shifts[64]
    cdef double complex a
    for j in range(k):
        shifts[j] = n - 1 - positions[j]
    out = np.zeros((<Py_ssize_t>1) << k, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(dim):
        loc = 0
        for j in range(k):
            loc = (loc << 1) | ((i >> shifts[j]) & 1)
        a = psi[i]
        o[loc] += a.real * a.real + a.imag * a.imag
    return out


def project(const double complex[::1] psi, int n, positions, Py_ssize_t outcome):
    cdef Py_ssize_t dim = psi.shape[0], i, loc
    cdef int k = len(positions), j
    cdef int shifts[64]
    for j in range(k):
        shifts[j] = n - 1 - positions[j]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(dim):
        loc = 0
        for j in range(k):
            loc = (loc << 1) | ((i >> shifts[j]) & 1)
        o[i] = psi[i] if loc == outcome else 0
    return out


def norm2(const double complex[::1] psi):
    cdef Py_ssize_t i
    cdef double s = 0
    for i in range(psi.shape[0]):
        s += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return s


def kron(const double complex[::1] left, const double complex[::1] right):
    cdef Py_ssize_t m = left.shape[0], k = right.shape[0], i, j
    out = np.empty(m * k, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(m):
        for j in range(k):
            o[i * k + j] = left[i] * right[j]
    return out


def sample(const double[::1] probs, double u, double dust=1e-12):
    cdef Py_ssize_t i, m = probs.shape[0], last = m - 1
    cdef double total = 0, c = 0, x
    for i in range(m):
        if probs[i] >= dust:
            total += probs[i]
            last = i
    x = u * total
    for i in range(m):
        if probs[i] < dust:
            continue
        c += probs[i]
        if x < c:
            return i
    return last
