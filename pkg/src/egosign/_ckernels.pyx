# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""

from libc.stdlib cimport malloc, free
from libc.math cimport fabs


cdef long *_to_array(seq, Py_ssize_t n) except NULL:
    cdef long *buf = <long *> malloc((n + 1) * sizeof(long))
    cdef Py_ssize_t i
    if buf == NULL:
        raise MemoryError()
    for i in range(n):
        buf[i] = seq[i]
    return buf


def fit_line(xs, ys):
    cdef Py_ssize_t n = len(xs), i
    if n != len(ys) or n < 2:
        raise ValueError("need at least two (x, y) pairs of equal length")
    cdef double sx = 0.0, sy = 0.0, mx, my, sxy = 0.0, syy = 0.0, dy, slope
    cdef double *x = <double *> malloc(n * sizeof(double))
    cdef double *y = <double *> malloc(n * sizeof(double))
    if x == NULL or y == NULL:
        free(x)
        free(y)
        raise MemoryError()
    try:
        for i in range(n):
            x[i] = xs[i]
            y[i] = ys[i]
        for i in range(n):
            sx += x[i]
            sy += y[i]
        mx = sx / n
        my = sy / n
        for i in range(n):
            dy = y[i] - my
            sxy += dy * (x[i] - mx)
            syy += dy * dy
    finally:
        free(x)
        free(y)
    if syy == 0.0:
        raise ZeroDivisionError("all y values are equal")
    slope = sxy / syy
    return slope, mx - slope * my


def nearest_labels(mids, double left, double centre, double right):
    cdef double m, dl, dc, dr, lo
    out = []
    for obj in mids:
        m = obj
        dl = fabs(m - left)
        dc = fabs(m - centre)
        dr = fabs(m - right)
        lo = dl
        if dc < lo:
            lo = dc
        if dr < lo:
            lo = dr
        if dl == lo:
            out.append(0)
        elif dc == lo:
            out.append(1)
        else:
            out.append(2)
    return out


def lcs_length(a, b):
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t na = len(a), nb = len(b), i, j
    if nb == 0:
        return 0
    cdef long *pa = _to_array(a, na)
    cdef long *pb = NULL
    cdef long *prev = NULL
    cdef long *cur = NULL
    cdef long *tmp
    cdef long result
    try:
        pb = _to_array(b, nb)
        prev = <long *> malloc((nb + 1) * sizeof(long))
        cur = <long *> malloc((nb + 1) * sizeof(long))
        if prev == NULL or cur == NULL:
            raise MemoryError()
        for j in range(nb + 1):
            prev[j] = 0
        cur[0] = 0
        for i in range(na):
            for j in range(nb):
                if pa[i] == pb[j]:
                    cur[j + 1] = prev[j] + 1
                elif cur[j] > prev[j + 1]:
                    cur[j + 1] = cur[j]
                else:
                    cur[j + 1] = prev[j + 1]
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[nb]
    finally:
        free(pa)
        free(pb)
        free(prev)
        free(cur)
    return result


def ngram_matches(pred, ref, Py_ssize_t n):
    cdef Py_ssize_t np_ = len(pred), nr = len(ref)
    cdef Py_ssize_t total = np_ - n + 1, nref = nr - n + 1, i, j, k
    cdef long matched = 0
    cdef bint same
    if total <= 0:
        return 0, 0
    if nref <= 0:
        return 0, total
    cdef long *pp = _to_array(pred, np_)
    cdef long *pr = NULL
    cdef char *used = NULL
    try:
        pr = _to_array(ref, nr)
        used = <char *> malloc(nref)
        if used == NULL:
            raise MemoryError()
        for j in range(nref):
            used[j] = 0
        # greedy: each candidate n-gram consumes the first unused equal
        # reference n-gram, which yields the clipped count
        for i in range(total):
            for j in range(nref):
                if used[j]:
                    continue
                same = True
                for k in range(n):
                    if pp[i + k] != pr[j + k]:
                        same = False
                        break
                if same:
                    used[j] = 1
                    matched += 1
                    break
    finally:
        free(pp)
        free(pr)
        free(used)
    return matched, total
