# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``.

Same signatures and return conventions; see that module for the contracts.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, fabs, pow, INFINITY, isfinite

cnp.import_array()

cdef double[15] NODES
cdef double[15] KW
cdef double[15] GW

cdef void _init_rule():
    cdef double xgk[8]
    cdef double wgk[8]
    cdef double wg[4]
    cdef int i
    xgk[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
              0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
              0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
              0.207784955007898467600689403773245, 0.0]
    wgk[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
              0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
              0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
              0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
    wg[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
             0.381830050505118944950369775488975, 0.417959183673469387755102040816327]
    for i in range(7):
        NODES[i] = -xgk[i]
        NODES[14 - i] = xgk[i]
        KW[i] = wgk[i]
        KW[14 - i] = wgk[i]
        GW[i] = 0.0
        GW[14 - i] = 0.0
    NODES[7] = 0.0
    KW[7] = wgk[7]
    GW[7] = wg[3]
    GW[1] = wg[0]
    GW[13] = wg[0]
    GW[3] = wg[1]
    GW[11] = wg[1]
    GW[5] = wg[2]
    GW[9] = wg[2]

_init_rule()


cdef inline double _logw(int code, double p0, double p1, double x) nogil:
    cdef double ax = fabs(x)
    if code == 0:
        return log(p0)
    elif code == 1:
        return p0 * log1p(ax)
    elif code == 2:
        if ax == 0.0:
            return 0.0
        return p0 * log(ax)
    elif code == 3:
        return p0 * x
    elif code == 4:
        return p0 * ax
    elif code == 5:
        return p0 * pow(ax, p1)
    elif code == 6:
        if x < 0:
            return pow(ax, p0)
        return pow(ax, p1)
    else:
        if x <= 0:
            return p0 * x
        return p0 * (x + x * x)


cdef inline double _logaddexp(double a, double b) nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


cdef void _panel(int code, double p0, double p1, double s, double a, double b,
                 double* log_k, double* rel) nogil:
    cdef double half = 0.5 * (b - a)
    cdef double mid = 0.5 * (b + a)
    cdef double g[15]
    cdef double m = -INFINITY
    cdef double k = 0.0, gs = 0.0, e
    cdef int i
    for i in range(15):
        g[i] = s * _logw(code, p0, p1, mid + half * NODES[i])
        if g[i] > m:
            m = g[i]
    if not isfinite(m):
        log_k[0] = m
        rel[0] = 0.0
        return
    for i in range(15):
        e = exp(g[i] - m)
        k += KW[i] * e
        gs += GW[i] * e
    log_k[0] = m + log(k * half)
    rel[0] = fabs(k - gs) / k


def log_power_integrals(int code, double p0, double p1, double s, lo, hi,
                        double rtol=1e-10, int max_depth=60):
    cdef cnp.ndarray[double, ndim=1] lo_a = np.ascontiguousarray(lo, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] hi_a = np.ascontiguousarray(hi, dtype=float).ravel()
    cdef Py_ssize_t n = lo_a.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] achieved = np.empty(n)
    cdef double stack_a[256]
    cdef double stack_b[256]
    cdef int stack_d[256]
    cdef int top, d
    cdef Py_ssize_t j
    cdef double a, b, width, log_k, rel, total, err, est, log_rtol = log(rtol), mid
    with nogil:
        for j in range(n):
            width = hi_a[j] - lo_a[j]
            if not (width > 0):
                out[j] = -INFINITY
                achieved[j] = 0.0
                continue
            total = -INFINITY
            err = -INFINITY
            est = -INFINITY
            top = 0
            stack_a[0] = lo_a[j]
            stack_b[0] = hi_a[j]
            stack_d[0] = 0
            top = 1
            while top > 0:
                top -= 1
                a = stack_a[top]
                b = stack_b[top]
                d = stack_d[top]
                _panel(code, p0, p1, s, a, b, &log_k, &rel)
                if log_k > est:
                    est = log_k
                if (rel <= rtol or d >= max_depth or top >= 254 or not isfinite(log_k)
                        or log_k + log(rel) <= est + log_rtol + log((b - a) / width)):
                    total = _logaddexp(total, log_k)
                    if rel > 0:
                        err = _logaddexp(err, log_k + log(rel))
                else:
                    mid = 0.5 * (a + b)
                    stack_a[top] = mid
                    stack_b[top] = b
                    stack_d[top] = d + 1
                    stack_a[top + 1] = a
                    stack_b[top + 1] = mid
                    stack_d[top + 1] = d + 1
                    top += 2
            out[j] = total
            if isfinite(total):
                achieved[j] = exp(err - total)
            else:
                achieved[j] = 0.0
    return out, achieved


def cantor_membership(x, ell, gap):
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(x, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] el = np.ascontiguousarray(ell, dtype=float)
    cdef cnp.ndarray[double, ndim=1] gp = np.ascontiguousarray(gap, dtype=float)
    cdef Py_ssize_t n = xs.shape[0], i
    cdef int k, depth = el.shape[0] - 1
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.empty(n, dtype=np.uint8)
    cdef double pos
    cdef cnp.uint8_t inside
    with nogil:
        for i in range(n):
            pos = xs[i]
            inside = 1 if (pos >= 0.0 and pos <= 1.0) else 0
            k = 1
            while inside and k <= depth:
                if pos > el[k]:
                    if pos < el[k] + gp[k]:
                        inside = 0
                    else:
                        pos -= el[k] + gp[k]
                k += 1
            out[i] = inside
    return out.view(bool).reshape(np.shape(x))


def cantor_cdf(x, ell, gap, mass):
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(x, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] el = np.ascontiguousarray(ell, dtype=float)
    cdef cnp.ndarray[double, ndim=1] gp = np.ascontiguousarray(gap, dtype=float)
    cdef cnp.ndarray[double, ndim=1] ms = np.ascontiguousarray(mass, dtype=float)
    cdef Py_ssize_t n = xs.shape[0], i
    cdef int k, depth = el.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double pos, acc
    cdef bint done
    with nogil:
        for i in range(n):
            pos = xs[i]
            if pos < 0.0:
                pos = 0.0
            elif pos > 1.0:
                pos = 1.0
            acc = 0.0
            done = False
            for k in range(1, depth + 1):
                if pos > el[k]:
                    acc += ms[k]
                    if pos < el[k] + gp[k]:
                        done = True
                        break
                    pos -= el[k] + gp[k]
            out[i] = acc if done else acc + pos
    return out.reshape(np.shape(x))
