"""Pure-numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one for one and are used whenever the compiled
extension is unavailable (or ``FMLAB_PURE_PYTHON=1`` is set).
"""
import numpy as np

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes ordered -x0..-x6, 0, x6..x0 with matching Kronrod / Gauss weights
NODES = np.concatenate([-XGK[:7], [0.0], XGK[6::-1]])
KWEIGHTS = np.concatenate([WGK[:7], [WGK[7]], WGK[6::-1]])
GWEIGHTS = np.zeros(15)
GWEIGHTS[[1, 3, 5]] = WG[:3]
GWEIGHTS[7] = WG[3]
GWEIGHTS[[9, 11, 13]] = WG[2::-1]

# weight family codes shared with the compiled kernel
CONSTANT, POWER_ONE_PLUS, POWER_ABS, EXP, EXP_ABS, SUB_EXP, SUPER_EXP, PHI_EXP = range(8)


def log_weight(code, p0, p1, x):
    """Natural log of the weight family ``code`` at ``x`` (vectorized)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if code == CONSTANT:
        return np.full_like(x, np.log(p0))
    if code == POWER_ONE_PLUS:
        return p0 * np.log1p(ax)
    if code == POWER_ABS:
        with np.errstate(divide="ignore"):
            out = p0 * np.log(ax)
        return np.where(ax == 0.0, 0.0, out)
    if code == EXP:
        return p0 * x
    if code == EXP_ABS:
        return p0 * ax
    if code == SUB_EXP:
        return p0 * ax ** p1
    if code == SUPER_EXP:
        return np.where(x < 0, ax ** p0, ax ** p1)
    if code == PHI_EXP:
        return p0 * np.where(x <= 0, x, x + x * x)
    raise ValueError(f"unknown weight code {code}")


def _panel(code, p0, p1, s, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    g = s * log_weight(code, p0, p1, x)
    m = np.max(g, axis=1)
    finite = np.isfinite(m)
    m_safe = np.where(finite, m, 0.0)
    e = np.exp(g - m_safe[:, None])
    k = e @ KWEIGHTS
    gs = e @ GWEIGHTS
    with np.errstate(divide="ignore", invalid="ignore"):
        log_k = m_safe + np.log(k * half)
        rel = np.abs(k - gs) / k
    log_k = np.where(finite, log_k, m)
    rel = np.where(finite, rel, 0.0)
    return log_k, rel


def log_power_integrals(code, p0, p1, s, lo, hi, rtol=1e-10, max_depth=60):
    """log of int_lo^hi w(x)**s dx for every interval, adaptive GK15 in log space.

    Returns ``(log_values, achieved_rel_err)``.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    n = lo.size
    log_total = np.full(n, -np.inf)
    log_err = np.full(n, -np.inf)
    log_est = np.full(n, -np.inf)
    width = hi - lo
    positive = width > 0
    owner = np.nonzero(positive)[0]
    a = lo[owner]
    b = hi[owner]
    depth = 0
    log_rtol = np.log(rtol)
    while owner.size:
        log_k, rel = _panel(code, p0, p1, s, a, b)
        np.maximum.at(log_est, owner, log_k)
        with np.errstate(divide="ignore"):
            frac = np.log((b - a) / width[owner])
            log_rel = np.log(rel)
        small = log_k + log_rel <= log_est[owner] + log_rtol + frac
        accept = (rel <= rtol) | small | (depth >= max_depth) | ~np.isfinite(log_k)
        idx = owner[accept]
        _logadd_at(log_total, idx, log_k[accept])
        _logadd_at(log_err, idx, (log_k + log_rel)[accept])
        keep = ~accept
        mid = 0.5 * (a[keep] + b[keep])
        owner = np.concatenate([owner[keep], owner[keep]])
        a, b = np.concatenate([a[keep], mid]), np.concatenate([mid, b[keep]])
        depth += 1
    with np.errstate(invalid="ignore"):
        achieved = np.where(np.isfinite(log_total), np.exp(log_err - log_total), 0.0)
    return log_total, achieved


def _logadd_at(target, idx, values):
    # unbuffered log-add-exp scatter; indices may repeat
    if idx.size == 0:
        return
    order = np.argsort(idx, kind="stable")
    idx = idx[order]
    values = values[order]
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    uniq = idx[starts]
    m = np.maximum.reduceat(values, starts)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        summed = m_safe + np.log(np.add.reduceat(np.exp(values - np.repeat(m_safe, np.diff(np.r_[starts, idx.size]))), starts))
    summed = np.where(np.isfinite(m), summed, m)
    target[uniq] = np.logaddexp(target[uniq], summed)


def cantor_membership(x, ell, gap):
    """True where x lies in the depth-d fat Cantor set (closed intervals)."""
    x = np.asarray(x, dtype=float)
    pos = x.copy()
    inside = (x >= 0.0) & (x <= 1.0)
    for k in range(1, len(ell)):
        in_gap = (pos > ell[k]) & (pos < ell[k] + gap[k])
        inside &= ~in_gap
        right = pos >= ell[k] + gap[k]
        pos = np.where(right, pos - (ell[k] + gap[k]), pos)
    return inside


def cantor_cdf(x, ell, gap, mass):
    """Measure of G_d intersected with [0, x]."""
    x = np.asarray(x, dtype=float)
    pos = np.clip(x, 0.0, 1.0)
    acc = np.zeros_like(pos)
    done = np.zeros(pos.shape, dtype=bool)
    for k in range(1, len(ell)):
        in_gap = ~done & (pos > ell[k]) & (pos < ell[k] + gap[k])
        right = ~done & (pos >= ell[k] + gap[k])
        acc = np.where(in_gap | right, acc + mass[k], acc)
        pos = np.where(right, pos - (ell[k] + gap[k]), pos)
        done |= in_gap
    return np.where(done, acc, acc + pos)
