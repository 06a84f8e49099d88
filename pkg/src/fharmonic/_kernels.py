"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``FHARMONIC_NUMBA`` is not
``0``.  Both paths follow the same arithmetic order, so results are
bit-identical; ``tests/test_kernels.py`` checks this and
``benchmarks/bench_kernels.py`` times them against each other.
"""
import math
import os

import numpy as np

try:
    import numba
    from numba import njit, prange
    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # TBB in this image is too old and only produces warnings
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover - numba ships with the env
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("FHARMONIC_NUMBA", "1") != "0"
BACKEND = "numba" if USE_NUMBA else "numpy"


def set_threads(count):
    """Apply a thread count to the numba runtime (no-op on numpy)."""
    if USE_NUMBA and count:
        numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))


# -- pairwise summation ------------------------------------------------------

def pairwise_sum_numpy(x):
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        return 0.0
    while x.size > 1:
        if x.size % 2:
            x = np.concatenate((x[:-1:2] + x[1::2], x[-1:]))
        else:
            x = x[0::2] + x[1::2]
    return float(x[0])


def _pairwise_sum_loop(x):
    n = x.size
    if n == 0:
        return 0.0
    buf = x.copy()
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]


# -- conformal flow on S^n ---------------------------------------------------

def _dot_rows(Y, u):
    # sequential over the last axis, same order as the loop kernels
    c = Y[..., 0] * u[0]
    for j in range(1, Y.shape[-1]):
        c = c + Y[..., j] * u[j]
    return c


def flow_points_numpy(u, Y, tau):
    Y = np.asarray(Y, dtype=np.float64)
    c = _dot_rows(Y, u)
    ch, sh = math.cosh(tau), math.sinh(tau)
    out = (c * ch + sh)[..., None] * u + (Y - c[..., None] * u)
    out = out / (ch + c * sh)[..., None]
    return out / np.sqrt(_dot_rows(out * out, np.ones(out.shape[-1])))[..., None]


def _flow_points_loop(u, Y, tau):
    n, d = Y.shape
    out = np.empty((n, d))
    ch, sh = math.cosh(tau), math.sinh(tau)
    for k in prange(n):
        c = 0.0
        for j in range(d):
            c += Y[k, j] * u[j]
        den = ch + c * sh
        a = c * ch + sh
        for j in range(d):
            out[k, j] = (a * u[j] + (Y[k, j] - c * u[j])) / den
        nrm = 0.0
        for j in range(d):
            nrm += out[k, j] * out[k, j]
        nrm = math.sqrt(nrm)
        for j in range(d):
            out[k, j] = out[k, j] / nrm
    return out


def conformal_factors_numpy(u, Y, tau):
    c = _dot_rows(np.asarray(Y, dtype=np.float64), u)
    return 1.0 / (math.cosh(tau) + c * math.sinh(tau))


def _conformal_factors_loop(u, Y, tau):
    n, d = Y.shape
    out = np.empty(n)
    ch, sh = math.cosh(tau), math.sinh(tau)
    for k in prange(n):
        c = 0.0
        for j in range(d):
            c += Y[k, j] * u[j]
        out[k] = 1.0 / (ch + c * sh)
    return out


def _rk4_flow_loop(u, y, tau, steps):
    d = y.size
    h = tau / steps
    cur = y.copy()
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    tmp = np.empty(d)
    for _ in range(steps):
        _field(u, cur, k1)
        for j in range(d):
            tmp[j] = cur[j] + 0.5 * h * k1[j]
        _field(u, tmp, k2)
        for j in range(d):
            tmp[j] = cur[j] + 0.5 * h * k2[j]
        _field(u, tmp, k3)
        for j in range(d):
            tmp[j] = cur[j] + h * k3[j]
        _field(u, tmp, k4)
        nrm = 0.0
        for j in range(d):
            cur[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            nrm += cur[j] * cur[j]
        nrm = math.sqrt(nrm)
        for j in range(d):
            cur[j] /= nrm
    return cur


def _field(u, y, out):
    c = 0.0
    for j in range(y.size):
        c += u[j] * y[j]
    for j in range(y.size):
        out[j] = u[j] - c * y[j]


def rk4_flow_numpy(u, y, tau, steps):
    u = np.asarray(u, dtype=np.float64)

    def field(p):
        return u - _dot_rows(p, u) * p

    h = tau / steps
    cur = np.array(y, dtype=np.float64)
    for _ in range(steps):
        k1 = field(cur)
        k2 = field(cur + 0.5 * h * k1)
        k3 = field(cur + 0.5 * h * k2)
        k4 = field(cur + h * k3)
        cur = cur + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        cur = cur / math.sqrt(_dot_rows(cur, cur))
    return cur


if HAVE_NUMBA:
    pairwise_sum_numba = njit(cache=True)(_pairwise_sum_loop)
    flow_points_numba = njit(cache=True, parallel=True)(_flow_points_loop)
    conformal_factors_numba = njit(cache=True, parallel=True)(_conformal_factors_loop)
    _field = njit(cache=True)(_field)
    rk4_flow_numba = njit(cache=True)(_rk4_flow_loop)
else:  # pragma: no cover
    pairwise_sum_numba = _pairwise_sum_loop
    flow_points_numba = _flow_points_loop
    conformal_factors_numba = _conformal_factors_loop
    rk4_flow_numba = _rk4_flow_loop


def _as2d(Y):
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    return Y.reshape(-1, Y.shape[-1]), Y.shape


def pairwise_sum(x):
    """Sum with a fixed balanced tree: adjacent pairs, level by level."""
    if USE_NUMBA:
        return float(pairwise_sum_numba(np.ascontiguousarray(x, dtype=np.float64).ravel()))
    return pairwise_sum_numpy(x)


def flow_points(u, Y, tau):
    if USE_NUMBA:
        flat, shape = _as2d(Y)
        return flow_points_numba(np.ascontiguousarray(u, dtype=np.float64), flat,
                                 float(tau)).reshape(shape)
    return flow_points_numpy(u, Y, tau)


def conformal_factors(u, Y, tau):
    if USE_NUMBA:
        flat, shape = _as2d(Y)
        return conformal_factors_numba(np.ascontiguousarray(u, dtype=np.float64), flat,
                                       float(tau)).reshape(shape[:-1])
    return conformal_factors_numpy(u, Y, tau)


def rk4_flow(u, y, tau, steps):
    if USE_NUMBA:
        return rk4_flow_numba(np.ascontiguousarray(u, dtype=np.float64),
                              np.ascontiguousarray(y, dtype=np.float64), float(tau), int(steps))
    return rk4_flow_numpy(u, y, tau, steps)
