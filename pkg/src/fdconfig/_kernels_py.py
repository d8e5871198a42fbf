"""Pure-Python kernel: interval-set and linear-arithmetic primitives.

These functions are the innermost loop of propagation and probing. The
compiled twin in _kernels_cy.pyx has byte-identical semantics; callers go
through fdconfig.kernels which selects one at import time.

An interval set is a tuple of (lo, hi) pairs: disjoint, non-adjacent,
ascending, lo <= hi. The empty set is ().
"""

from __future__ import annotations

BACKEND = "python"


def normalize(pairs):
    """Sort and merge raw (lo, hi) pairs into a canonical interval set."""
    items = [(lo, hi) for lo, hi in pairs if lo <= hi]
    if not items:
        return ()
    items.sort()
    out = []
    cur_lo, cur_hi = items[0]
    for lo, hi in items[1:]:
        if lo <= cur_hi + 1:
            if hi > cur_hi:
                cur_hi = hi
        else:
            out.append((cur_lo, cur_hi))
            cur_lo, cur_hi = lo, hi
    out.append((cur_lo, cur_hi))
    return tuple(out)


def intersect(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = a[i][0] if a[i][0] > b[j][0] else b[j][0]
        hi = a[i][1] if a[i][1] < b[j][1] else b[j][1]
        if lo <= hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def clip(a, lo, hi):
    """Intersect interval set a with the single interval [lo, hi]."""
    if lo > hi:
        return ()
    out = []
    for ilo, ihi in a:
        if ihi < lo:
            continue
        if ilo > hi:
            break
        out.append((ilo if ilo > lo else lo, ihi if ihi < hi else hi))
    return tuple(out)


def remove_value(a, v):
    out = []
    for lo, hi in a:
        if lo <= v <= hi:
            if lo <= v - 1:
                out.append((lo, v - 1))
            if v + 1 <= hi:
                out.append((v + 1, hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def contains(a, v):
    lo, hi = 0, len(a) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        ilo, ihi = a[mid]
        if v < ilo:
            hi = mid - 1
        elif v > ihi:
            lo = mid + 1
        else:
            return True
    return False


def count_values(a):
    n = 0
    for lo, hi in a:
        n += hi - lo + 1
    return n


def sum_bounds(coefs, los, his):
    """Range of sum(c_i * x_i) with x_i in [los[i], his[i]]."""
    smin = 0
    smax = 0
    for i in range(len(coefs)):
        c = coefs[i]
        if c >= 0:
            smin += c * los[i]
            smax += c * his[i]
        else:
            smin += c * his[i]
            smax += c * los[i]
    return smin, smax


def tighten_le(coefs, los, his, k):
    """Bounds-consistent tightening of sum(c_i * x_i) <= k.

    Returns a list of per-term (lo, hi) bounds clamped inside the current
    ones, or None when the minimum of the sum already exceeds k.
    """
    smin = 0
    for i in range(len(coefs)):
        c = coefs[i]
        smin += c * (los[i] if c >= 0 else his[i])
    if smin > k:
        return None
    out = []
    for i in range(len(coefs)):
        c = coefs[i]
        lo, hi = los[i], his[i]
        # slack available to this term on top of its own minimum
        slack = k - (smin - (c * lo if c >= 0 else c * hi))
        if c > 0:
            b = slack // c
            if b < hi:
                hi = b
        elif c < 0:
            b = -((-slack) // c)  # ceil(slack / c), c negative
            if b > lo:
                lo = b
        out.append((lo, hi))
    return out
