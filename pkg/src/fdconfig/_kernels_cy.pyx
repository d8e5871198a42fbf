# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernel: interval-set and linear-arithmetic primitives.

Semantics must match fdconfig._kernels_py exactly (there is a parity
test). Values are kept within signed 64-bit range by the translator's
overflow guard, so plain C arithmetic is safe here.
"""

BACKEND = "cython"


def normalize(pairs):
    """Sort and merge raw (lo, hi) pairs into a canonical interval set."""
    cdef long long lo, hi, cur_lo, cur_hi
    items = []
    for p in pairs:
        lo = p[0]
        hi = p[1]
        if lo <= hi:
            items.append((lo, hi))
    if not items:
        return ()
    items.sort()
    out = []
    cur_lo = items[0][0]
    cur_hi = items[0][1]
    cdef Py_ssize_t i
    for i in range(1, len(items)):
        lo = items[i][0]
        hi = items[i][1]
        if lo <= cur_hi + 1:
            if hi > cur_hi:
                cur_hi = hi
        else:
            out.append((cur_lo, cur_hi))
            cur_lo = lo
            cur_hi = hi
    out.append((cur_lo, cur_hi))
    return tuple(out)


def intersect(a, b):
    cdef Py_ssize_t i = 0, j = 0, la = len(a), lb = len(b)
    cdef long long alo, ahi, blo, bhi, lo, hi
    out = []
    while i < la and j < lb:
        alo = a[i][0]
        ahi = a[i][1]
        blo = b[j][0]
        bhi = b[j][1]
        lo = alo if alo > blo else blo
        hi = ahi if ahi < bhi else bhi
        if lo <= hi:
            out.append((lo, hi))
        if ahi < bhi:
            i += 1
        else:
            j += 1
    return tuple(out)


def clip(a, lo_bound, hi_bound):
    """Intersect interval set a with the single interval [lo, hi]."""
    cdef long long lo = lo_bound, hi = hi_bound, ilo, ihi
    if lo > hi:
        return ()
    out = []
    for iv in a:
        ilo = iv[0]
        ihi = iv[1]
        if ihi < lo:
            continue
        if ilo > hi:
            break
        out.append((ilo if ilo > lo else lo, ihi if ihi < hi else hi))
    return tuple(out)


def remove_value(a, value):
    cdef long long v = value, lo, hi
    out = []
    for iv in a:
        lo = iv[0]
        hi = iv[1]
        if lo <= v <= hi:
            if lo <= v - 1:
                out.append((lo, v - 1))
            if v + 1 <= hi:
                out.append((v + 1, hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def contains(a, value):
    cdef long long v = value, ilo, ihi
    cdef Py_ssize_t lo = 0, hi = len(a) - 1, mid
    while lo <= hi:
        mid = (lo + hi) // 2
        ilo = a[mid][0]
        ihi = a[mid][1]
        if v < ilo:
            hi = mid - 1
        elif v > ihi:
            lo = mid + 1
        else:
            return True
    return False


def count_values(a):
    cdef long long n = 0
    for iv in a:
        n += <long long> iv[1] - <long long> iv[0] + 1
    return n


def sum_bounds(coefs, los, his):
    """Range of sum(c_i * x_i) with x_i in [los[i], his[i]]."""
    cdef long long smin = 0, smax = 0, c
    cdef Py_ssize_t i, n = len(coefs)
    for i in range(n):
        c = coefs[i]
        if c >= 0:
            smin += c * <long long> los[i]
            smax += c * <long long> his[i]
        else:
            smin += c * <long long> his[i]
            smax += c * <long long> los[i]
    return smin, smax


cdef inline long long _floor_div(long long a, long long b):
    cdef long long q = a // b
    return q


def tighten_le(coefs, los, his, k_in):
    """Bounds-consistent tightening of sum(c_i * x_i) <= k.

    Returns a list of per-term (lo, hi) bounds clamped inside the current
    ones, or None when the minimum of the sum already exceeds k.
    """
    cdef long long k = k_in, smin = 0, c, lo, hi, slack, b
    cdef Py_ssize_t i, n = len(coefs)
    for i in range(n):
        c = coefs[i]
        smin += c * (<long long> los[i] if c >= 0 else <long long> his[i])
    if smin > k:
        return None
    out = []
    for i in range(n):
        c = coefs[i]
        lo = los[i]
        hi = his[i]
        slack = k - (smin - (c * lo if c >= 0 else c * hi))
        if c > 0:
            b = _floor_div(slack, c)
            if b < hi:
                hi = b
        elif c < 0:
            b = -_floor_div(-slack, c)
            if b > lo:
                lo = b
        out.append((lo, hi))
    return out
