# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

Mirrors ``switchwalk._pure`` function by function; the reference semantics
(and the bit-exactness contract between the two lanes) are documented
there.  Floating-point reductions follow the same operation order as the
pure lane so results are identical, not merely close.
"""

from libc.math cimport pow as cpow
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

ctypedef cnp.uint64_t u64
ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8
ctypedef cnp.uint8_t u8

BACKEND_NAME = "compiled"

cdef extern from *:
    """
    #include <stdint.h>
    static inline int popcnt64(uint64_t x) { return __builtin_popcountll(x); }
    """
    int popcnt64(u64 x) nogil


cdef inline u64 _prefix_xor(u64 y) nogil:
    # bit i of the result is the XOR of bits 0..i of the input
    y ^= y << 1
    y ^= y << 2
    y ^= y << 4
    y ^= y << 8
    y ^= y << 16
    y ^= y << 32
    return y


cdef inline u64 _lowmask(int cnt) nogil:
    if cnt >= 64:
        return <u64>0xFFFFFFFFFFFFFFFFULL
    return ((<u64>1) << cnt) - 1


cdef inline i64 _imin(i64 a, i64 b) nogil:
    return a if a < b else b


cdef inline i64 _imax(i64 a, i64 b) nogil:
    return a if a > b else b


# -- segment tree over the switch path (see ReflectTree in _pure) ---------------

cdef struct Tree:
    i64* mn
    i64* mx
    i64* off
    i8* sg
    int n


cdef inline void _tree_apply(Tree* t, int v, int s, i64 c) nogil:
    cdef i64 a, b
    if s == 1:
        t.mn[v] += c
        t.mx[v] += c
    else:
        a = t.mn[v]
        b = t.mx[v]
        t.mn[v] = c - b
        t.mx[v] = c - a
    t.off[v] = s * t.off[v] + c
    t.sg[v] = <i8>(t.sg[v] * s)


cdef inline void _tree_push(Tree* t, int v) nogil:
    cdef int s = t.sg[v]
    cdef i64 c = t.off[v]
    if s != 1 or c != 0:
        _tree_apply(t, 2 * v, s, c)
        _tree_apply(t, 2 * v + 1, s, c)
        t.sg[v] = 1
        t.off[v] = 0


cdef void _tree_build(Tree* t, int v, int lo, int hi, const i64* z, const i64* b) nogil:
    cdef int mid
    t.sg[v] = 1
    t.off[v] = 0
    if lo == hi:
        t.mn[v] = z[lo] - b[lo]
        t.mx[v] = z[lo] + b[lo]
        return
    mid = (lo + hi) >> 1
    _tree_build(t, 2 * v, lo, mid, z, b)
    _tree_build(t, 2 * v + 1, mid + 1, hi, z, b)
    t.mn[v] = _imin(t.mn[2 * v], t.mn[2 * v + 1])
    t.mx[v] = _imax(t.mx[2 * v], t.mx[2 * v + 1])


cdef i64 _tree_point(Tree* t, int i) nogil:
    cdef int v = 1, lo = 0, hi = t.n - 1, mid
    cdef i64 s = 1, c = 0
    while lo < hi:
        c = s * t.off[v] + c
        s = s * t.sg[v]
        mid = (lo + hi) >> 1
        if i <= mid:
            v = 2 * v
            hi = mid
        else:
            v = 2 * v + 1
            lo = mid + 1
    return s * ((t.mn[v] + t.mx[v]) >> 1) + c


cdef void _tree_reflect(Tree* t, int v, int lo, int hi, int l, i64 c) nogil:
    cdef int mid
    if hi < l:
        return
    if l <= lo:
        _tree_apply(t, v, -1, c)
        return
    _tree_push(t, v)
    mid = (lo + hi) >> 1
    _tree_reflect(t, 2 * v, lo, mid, l, c)
    _tree_reflect(t, 2 * v + 1, mid + 1, hi, l, c)
    t.mn[v] = _imin(t.mn[2 * v], t.mn[2 * v + 1])
    t.mx[v] = _imax(t.mx[2 * v], t.mx[2 * v + 1])


cdef int _tree_alloc(Tree* t, int n) except -1:
    t.n = n
    t.mn = <i64*>malloc(4 * n * sizeof(i64))
    t.mx = <i64*>malloc(4 * n * sizeof(i64))
    t.off = <i64*>malloc(4 * n * sizeof(i64))
    t.sg = <i8*>malloc(4 * n * sizeof(i8))
    if t.mn == NULL or t.mx == NULL or t.off == NULL or t.sg == NULL:
        _tree_free(t)
        raise MemoryError()
    return 0


cdef void _tree_free(Tree* t):
    free(t.mn)
    free(t.mx)
    free(t.off)
    free(t.sg)


cdef void _switch_fill(const i8* bits, int n, i64* z) nogil:
    cdef int i
    cdef int s = 1
    cdef i64 acc = 0
    for i in range(n):
        s *= bits[i]
        acc += s
        z[i] = acc


def timeline_segments(const i64[::1] barrier, const i8[::1] init_bits,
                      const double[::1] ev_time, const i64[::1] ev_bit,
                      const i8[::1] ev_val):
    """See _pure.timeline_segments."""
    cdef int n = barrier.shape[0]
    cdef Py_ssize_t ne = ev_time.shape[0]
    status_arr = np.empty(ne + 1, dtype=np.uint8)
    cdef u8[::1] status = status_arr
    cdef Tree t
    cdef i64* z = NULL
    cdef i8* bits = NULL
    cdef Py_ssize_t e
    cdef int j
    cdef i8 v
    cdef i64 c
    _tree_alloc(&t, n)
    z = <i64*>malloc(n * sizeof(i64))
    bits = <i8*>malloc(n * sizeof(i8))
    if z == NULL or bits == NULL:
        _tree_free(&t)
        free(z)
        free(bits)
        raise MemoryError()
    try:
        with nogil:
            for j in range(n):
                bits[j] = init_bits[j]
            _switch_fill(bits, n, z)
            _tree_build(&t, 1, 0, n - 1, z, &barrier[0])
            status[0] = t.mn[1] >= 0
            for e in range(ne):
                j = <int>ev_bit[e]
                v = ev_val[e]
                if bits[j] != v:
                    bits[j] = v
                    c = 0 if j == 0 else 2 * _tree_point(&t, j - 1)
                    _tree_reflect(&t, 1, 0, n - 1, j, c)
                status[e + 1] = t.mn[1] >= 0
    finally:
        _tree_free(&t)
        free(z)
        free(bits)
    return np.asarray(ev_time, dtype=np.float64), status_arr


cdef double _pair_energy_c(const double* a, const double* b, int m, double gamma) nogil:
    # mirrors _pure.pair_energy_segments, same accumulation order
    cdef double q = (1.0 - gamma) * (2.0 - gamma)
    cdef double e = 2.0 - gamma
    cdef double total = 0.0
    cdef int i, k
    for i in range(m):
        total += 2.0 * (cpow(b[i] - a[i], e) / q)
        for k in range(i + 1, m):
            total += 2.0 * (
                ((cpow(b[k] - a[i], e) / q - cpow(b[k] - b[i], e) / q)
                 - cpow(a[k] - a[i], e) / q)
                + cpow(a[k] - b[i], e) / q
            )
    return total


def timeline_stats_chunk(const i64[::1] barrier, const i8[:, ::1] init_bits,
                         const i64[::1] ev_off, const double[::1] ev_time,
                         const i64[::1] ev_bit, const i8[::1] ev_val,
                         double gamma):
    """See _pure.timeline_stats_chunk."""
    cdef int trials = init_bits.shape[0]
    cdef int n = init_bits.shape[1]
    kappa_arr = np.zeros(trials, dtype=np.float64)
    phi_arr = np.zeros(trials, dtype=np.float64)
    cdef double[::1] kappa = kappa_arr
    cdef double[::1] phi = phi_arr
    cdef Tree t
    cdef i64* z = NULL
    cdef i8* bits = NULL
    cdef double* sa = NULL
    cdef double* sb = NULL
    cdef Py_ssize_t maxev = 1, k, s, e
    cdef int tr, j, m
    cdef i8 v
    cdef i64 c
    cdef bint cur, now
    cdef double seg_start, acc, tk
    for tr in range(trials):
        if ev_off[tr + 1] - ev_off[tr] > maxev:
            maxev = ev_off[tr + 1] - ev_off[tr]
    _tree_alloc(&t, n)
    z = <i64*>malloc(n * sizeof(i64))
    bits = <i8*>malloc(n * sizeof(i8))
    sa = <double*>malloc((maxev + 1) * sizeof(double))
    sb = <double*>malloc((maxev + 1) * sizeof(double))
    if z == NULL or bits == NULL or sa == NULL or sb == NULL:
        _tree_free(&t)
        free(z)
        free(bits)
        free(sa)
        free(sb)
        raise MemoryError()
    try:
        with nogil:
            for tr in range(trials):
                for j in range(n):
                    bits[j] = init_bits[tr, j]
                _switch_fill(bits, n, z)
                _tree_build(&t, 1, 0, n - 1, z, &barrier[0])
                cur = t.mn[1] >= 0
                seg_start = 0.0
                acc = 0.0
                m = 0
                s = ev_off[tr]
                e = ev_off[tr + 1]
                for k in range(s, e):
                    j = <int>ev_bit[k]
                    v = ev_val[k]
                    if bits[j] != v:
                        bits[j] = v
                        c = 0 if j == 0 else 2 * _tree_point(&t, j - 1)
                        _tree_reflect(&t, 1, 0, n - 1, j, c)
                    now = t.mn[1] >= 0
                    if now != cur:
                        tk = ev_time[k]
                        if cur:
                            acc += tk - seg_start
                            sa[m] = seg_start
                            sb[m] = tk
                            m += 1
                        else:
                            seg_start = tk
                        cur = now
                if cur:
                    acc += 1.0 - seg_start
                    sa[m] = seg_start
                    sb[m] = 1.0
                    m += 1
                kappa[tr] = acc
                if gamma >= 0.0:
                    phi[tr] = _pair_energy_c(sa, sb, m, gamma)
    finally:
        _tree_free(&t)
        free(z)
        free(bits)
        free(sa)
        free(sb)
    return kappa_arr, phi_arr


# -- word-parallel endpoint kernels ----------------------------------------------


def ns_endpoints_chunk(int n, const u64[:, ::1] words, const i64[::1] flip_flat,
                       const i64[::1] flip_off, int kind):
    """See _pure.ns_endpoints_chunk."""
    cdef int trials = words.shape[0]
    cdef int nwords = (n + 63) >> 6
    if words.shape[1] < nwords:
        raise ValueError("word matrix narrower than n bits")
    a0_arr = np.empty(trials, dtype=np.int64)
    at_arr = np.empty(trials, dtype=np.int64)
    cdef i64[::1] a0 = a0_arr
    cdef i64[::1] at = at_arr
    cdef int tr, w, cnt
    cdef Py_ssize_t fi, fend
    cdef i64 lo, v0, vt
    cdef u64 xw, fw, y, fy, bs, bsf, msk, s_carry, f_carry
    with nogil:
        for tr in range(trials):
            fi = flip_off[tr]
            fend = flip_off[tr + 1]
            v0 = 0
            vt = 0
            s_carry = 0
            f_carry = 0
            for w in range(nwords):
                lo = (<i64>w) << 6
                cnt = <int>(n - lo) if n - lo < 64 else 64
                xw = words[tr, w]
                fw = 0
                while fi < fend and flip_flat[fi] <= lo + 64:
                    fw |= (<u64>1) << <int>(flip_flat[fi] - 1 - lo)
                    fi += 1
                msk = _lowmask(cnt)
                if kind == 1:
                    v0 += cnt - 2 * popcnt64(xw & msk)
                    vt += cnt - 2 * popcnt64((xw ^ fw) & msk)
                else:
                    y = _prefix_xor(xw)
                    fy = _prefix_xor(fw)
                    bs = (<u64>0) - s_carry
                    bsf = (<u64>0) - (s_carry ^ f_carry)
                    v0 += cnt - 2 * popcnt64((y ^ bs) & msk)
                    vt += cnt - 2 * popcnt64(((y ^ fy) ^ bsf) & msk)
                    if cnt == 64:
                        s_carry ^= (y >> 63) & 1
                        f_carry ^= (fy >> 63) & 1
            a0[tr] = v0
            at[tr] = vt
    return a0_arr, at_arr


def uv_captures_chunk(const i64[:, ::1] ipos, const u64[:, ::1] words):
    """See _pure.uv_captures_chunk."""
    cdef int trials = ipos.shape[0]
    cdef int K = ipos.shape[1]
    cdef i64 maxlast = 0
    cdef int tr
    for tr in range(trials):
        if ipos[tr, K - 1] > maxlast:
            maxlast = ipos[tr, K - 1]
    if words.shape[1] < (maxlast + 63) >> 6:
        raise ValueError("word matrix narrower than the last change position")
    C_arr = np.empty((trials, K), dtype=np.int64)
    z0_arr = np.empty(trials, dtype=np.int64)
    zt_arr = np.empty(trials, dtype=np.int64)
    cdef i64[:, ::1] C = C_arr
    cdef i64[::1] z0 = z0_arr
    cdef i64[::1] zt = zt_arr
    cdef i64* caps = <i64*>malloc((K + 1) * sizeof(i64))
    if caps == NULL:
        raise MemoryError()
    cdef int w, nw, cnt, kp, fp, off
    cdef i64 lk, lo, zc, vt, q, val
    cdef u64 xw, fw, y, fy, bs, bsf, msk, s_carry, f_carry
    try:
        with nogil:
            for tr in range(trials):
                lk = ipos[tr, K - 1]
                for kp in range(K):
                    caps[kp] = ipos[tr, kp] - 1
                caps[K] = lk
                nw = <int>((lk + 63) >> 6)
                zc = 0
                vt = 0
                s_carry = 0
                f_carry = 0
                kp = 0
                fp = 0
                for w in range(nw):
                    lo = (<i64>w) << 6
                    cnt = <int>(lk - lo) if lk - lo < 64 else 64
                    xw = words[tr, w]
                    fw = 0
                    while fp < K and ipos[tr, fp] <= lo + 64:
                        fw |= (<u64>1) << <int>(ipos[tr, fp] - 1 - lo)
                        fp += 1
                    y = _prefix_xor(xw)
                    fy = _prefix_xor(fw)
                    bs = (<u64>0) - s_carry
                    bsf = (<u64>0) - (s_carry ^ f_carry)
                    while kp <= K and caps[kp] <= lo + cnt:
                        q = caps[kp]
                        off = <int>(q - lo)
                        if off == 0:
                            val = zc
                        else:
                            val = zc + off - 2 * popcnt64((y ^ bs) & _lowmask(off))
                        if kp < K:
                            C[tr, kp] = val
                        else:
                            z0[tr] = val
                        kp += 1
                    msk = _lowmask(cnt)
                    vt += cnt - 2 * popcnt64(((y ^ fy) ^ bsf) & msk)
                    if cnt == 64:
                        zc += 64 - 2 * popcnt64(y ^ bs)
                        s_carry ^= (y >> 63) & 1
                        f_carry ^= (fy >> 63) & 1
                zt[tr] = vt
    finally:
        free(caps)
    return C_arr, z0_arr, zt_arr
