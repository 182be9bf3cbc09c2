"""Hot loops of the discrete Pucci operator.

Each kernel has a numba implementation and a vectorised numpy one with the
same floating point evaluation order.  Set ``PUCCI_LAB_NUMBA=0`` to force the
numpy path (it is also used when numba is not importable).

Array conventions (``n`` interior nodes, ``D`` directions, ``F`` frames)::

    u      (n,)       current interior values
    nbr    (n, D, 2)  neighbour index, -1 for a Dirichlet arm
    bval   (n, D, 2)  Dirichlet value for arms with nbr == -1
    t      (n, D, 2)  arm lengths
    frames (F, 2)     direction indices of each orthogonal frame
    sign   +1 for M+ (max over frames), -1 for M- (min over frames)
"""

from __future__ import annotations

import os

import numpy as np

# the bundled TBB is too old for numba; pick a layer that needs no extras
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the environment
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("PUCCI_LAB_NUMBA", "1") != "0"


def backend():
    return "numba" if USE_NUMBA else "numpy"


def set_workers(n):
    """Set the numba thread count (no-op on the numpy path)."""
    if USE_NUMBA and n:
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------


def _second_differences_np(u, nbr, bval, t):
    up = np.where(nbr[:, :, 0] >= 0, u[nbr[:, :, 0]], bval[:, :, 0])
    um = np.where(nbr[:, :, 1] >= 0, u[nbr[:, :, 1]], bval[:, :, 1])
    tp, tm = t[:, :, 0], t[:, :, 1]
    uc = u[:, None]
    return 2.0 / (tp + tm) * ((up - uc) / tp + (um - uc) / tm)


def _weights_np(s2, lam, Lam, sign):
    if sign > 0:
        return np.where(s2 >= 0, Lam, lam)
    return np.where(s2 >= 0, lam, Lam)


def operator_values_np(u, nbr, bval, t, frames, lam, Lam, sign):
    s2 = _second_differences_np(u, nbr, bval, t)
    w = _weights_np(s2, lam, Lam, sign)
    term = w * s2
    fv = term[:, frames[:, 0]] + term[:, frames[:, 1]]
    arg = np.argmax(fv, axis=1) if sign > 0 else np.argmin(fv, axis=1)
    rows = np.arange(len(u))
    coef = np.stack([w[rows, frames[arg, 0]], w[rows, frames[arg, 1]]], axis=1)
    return fv[rows, arg], arg.astype(np.int64), coef


def diag_bound_np(t, frames, Lam):
    inv = 2.0 / (t[:, :, 0] * t[:, :, 1])
    return Lam * (inv[:, frames[:, 0]] + inv[:, frames[:, 1]]).max(axis=1)


def jacobi_sweeps_np(u, f, tau, nbr, bval, t, frames, lam, Lam, sign, n_sweeps):
    u = u.copy()
    hist = np.empty(n_sweeps)
    for it in range(n_sweeps):
        F = operator_values_np(u, nbr, bval, t, frames, lam, Lam, sign)[0]
        r = F - f
        hist[it] = np.abs(r).max() if r.size else 0.0
        u = u + tau * r
    return u, hist


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _node_operator(k, u, nbr, bval, t, frames, lam, Lam, sign):
        uk = u[k]
        best = 0.0
        bw0 = 0.0
        bw1 = 0.0
        barg = 0
        for fi in range(frames.shape[0]):
            val = 0.0
            w0 = 0.0
            w1 = 0.0
            for m in range(2):
                d = frames[fi, m]
                tp = t[k, d, 0]
                tm = t[k, d, 1]
                j = nbr[k, d, 0]
                up = u[j] if j >= 0 else bval[k, d, 0]
                j = nbr[k, d, 1]
                um = u[j] if j >= 0 else bval[k, d, 1]
                s2 = 2.0 / (tp + tm) * ((up - uk) / tp + (um - uk) / tm)
                if sign > 0:
                    w = Lam if s2 >= 0 else lam
                else:
                    w = lam if s2 >= 0 else Lam
                if m == 0:
                    w0 = w
                    val = w * s2
                else:
                    w1 = w
                    val = val + w * s2
            if fi == 0 or (sign > 0 and val > best) or (sign < 0 and val < best):
                best = val
                barg = fi
                bw0 = w0
                bw1 = w1
        return best, barg, bw0, bw1

    @njit(cache=True, parallel=True)
    def _operator_values_nb(u, nbr, bval, t, frames, lam, Lam, sign, out, arg, coef):
        for k in prange(u.shape[0]):
            v, a, w0, w1 = _node_operator(k, u, nbr, bval, t, frames, lam, Lam, sign)
            out[k] = v
            arg[k] = a
            coef[k, 0] = w0
            coef[k, 1] = w1

    @njit(cache=True, parallel=True)
    def _diag_bound_nb(t, frames, Lam, out):
        for k in prange(t.shape[0]):
            best = 0.0
            for fi in range(frames.shape[0]):
                a = frames[fi, 0]
                b = frames[fi, 1]
                v = 2.0 / (t[k, a, 0] * t[k, a, 1]) + 2.0 / (t[k, b, 0] * t[k, b, 1])
                if v > best:
                    best = v
            out[k] = Lam * best

    @njit(cache=True, parallel=True)
    def _jacobi_sweeps_nb(u, f, tau, nbr, bval, t, frames, lam, Lam, sign, n_sweeps, hist):
        n = u.shape[0]
        cur = u.copy()
        nxt = np.empty_like(cur)
        res = np.empty(n)
        for it in range(n_sweeps):
            for k in prange(n):
                v = _node_operator(k, cur, nbr, bval, t, frames, lam, Lam, sign)[0]
                r = v - f[k]
                res[k] = abs(r)
                nxt[k] = cur[k] + tau[k] * r
            m = 0.0
            for k in range(n):
                if res[k] > m:
                    m = res[k]
            hist[it] = m
            cur, nxt = nxt, cur
        return cur


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def operator_values(u, nbr, bval, t, frames, lam, Lam, sign):
    """Discrete M+ or M- at every interior node.

    Returns ``(values, frame_index, coefficients)`` where ``coefficients[k]``
    holds the ellipticity weight chosen for each direction of the active frame.
    """
    if not USE_NUMBA:
        return operator_values_np(u, nbr, bval, t, frames, lam, Lam, sign)
    n = len(u)
    out = np.empty(n)
    arg = np.empty(n, dtype=np.int64)
    coef = np.empty((n, 2))
    _operator_values_nb(u, nbr, bval, t, frames, float(lam), float(Lam), int(sign), out, arg, coef)
    return out, arg, coef


def diag_bound(t, frames, Lam):
    """Upper bound on ``-dF/du(x)``: ``Lam * max_frames sum 2/(t+ t-)``."""
    if not USE_NUMBA:
        return diag_bound_np(t, frames, Lam)
    out = np.empty(t.shape[0])
    _diag_bound_nb(t, frames, float(Lam), out)
    return out


def jacobi_sweeps(u, f, tau, nbr, bval, t, frames, lam, Lam, sign, n_sweeps):
    """Run ``n_sweeps`` damped Jacobi updates ``u += tau * (F[u] - f)``.

    Returns the new iterate and the residual inf-norm seen before each sweep.
    """
    if not USE_NUMBA:
        return jacobi_sweeps_np(u, f, tau, nbr, bval, t, frames, lam, Lam, sign, n_sweeps)
    hist = np.empty(n_sweeps)
    out = _jacobi_sweeps_nb(u, f, tau, nbr, bval, t, frames, float(lam), float(Lam),
                            int(sign), int(n_sweeps), hist)
    return out, hist
