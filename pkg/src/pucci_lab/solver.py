"""Monotone wide-stencil scheme for ``M+(D^2u) = f`` and ``M-(D^2u) = f``.

The discrete operator is the frame formulation

    M+_h[u](x) = max over frames (e, e_perp) of sum_e [Lam*(d2_e u)^+ - lam*(d2_e u)^-]
    M-_h[u](x) = min over frames of sum_e [lam*(d2_e u)^+ - Lam*(d2_e u)^-]

with unequal-arm second differences ``d2_e`` whose arms end on the boundary
where a lattice ray leaves the domain.  It is nondecreasing in neighbour values
and strictly decreasing in the centre value, so the discrete comparison
principle holds.

Two solvers are provided.  ``howard`` (policy iteration with sparse LU on each
linearisation) is the default; ``jacobi`` is the damped fixed-point iteration
``u += tau * (F_h[u] - f)`` with ``tau = theta / L(x)``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .errors import AssemblyError, NonConvergenceError
from .geometry import INTERIOR, ROLE_NAMES
from .pucci import EllipticityPair
from .stencil import StencilSet, build_stencil  # noqa: F401  (re-export)

OPERATORS = ("pucci_plus", "pucci_minus", "laplace")
METHODS = ("howard", "jacobi")

DEFAULT_TOL = 1e-8
JACOBI_THETA = 0.9
JACOBI_MAX_ITER = 5_000_000
JACOBI_CHUNK = 500
DIVERGENCE_WINDOW = 10_000
HOWARD_MAX_ITER = 200


def second_difference(u_center, u_plus, u_minus, t_plus, t_minus):
    """Three-point second difference with arms ``t_plus`` and ``t_minus``."""
    if t_plus <= 0 or t_minus <= 0:
        raise ValueError("arm lengths must be positive")
    return 2.0 / (t_plus + t_minus) * ((u_plus - u_center) / t_plus + (u_minus - u_center) / t_minus)


def operator_sign(operator_tag):
    if operator_tag not in OPERATORS:
        raise ValueError(f"unknown operator {operator_tag!r}")
    return -1 if operator_tag == "pucci_minus" else 1


def effective_ell(operator_tag, ell):
    return EllipticityPair(1.0, 1.0) if operator_tag == "laplace" else ell


def boundary_values(mask, g):
    """Dirichlet value for every arm whose far end is a boundary point."""
    bval = np.zeros(mask.t.shape)
    need = mask.nbr < 0
    if need.any():
        hx = mask.hit[..., 0][need]
        hy = mask.hit[..., 1][need]
        if np.isnan(hx).any():
            raise AssemblyError("cut arm without a boundary hit point")
        vals = np.asarray(g(hx, hy, mask.piece[need]), dtype=float)
        if vals.shape != hx.shape or not np.all(np.isfinite(vals)):
            raise AssemblyError("boundary data returned missing or non-finite values")
        bval[need] = vals
    return bval


def _sample_source(mask, f):
    if f is None:
        return np.zeros(mask.n_interior)
    if callable(f):
        return np.asarray(f(mask.x[:, 0], mask.x[:, 1]), dtype=float).reshape(mask.n_interior)
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 0:
        return np.full(mask.n_interior, float(arr))
    if arr.shape != (mask.n_interior,):
        raise ValueError("source array must have one value per interior node")
    return arr


@dataclass(eq=False)
class SolutionField:
    mask: object
    values: np.ndarray
    f: np.ndarray
    bval: np.ndarray
    dirichlet_values: np.ndarray  # one per Dirichlet lattice node, see mask.dirichlet_nodes()
    residual: np.ndarray
    residual_inf: float
    iterations: int
    operator_tag: str
    ell: EllipticityPair
    tol: float
    method: str
    f_handle: object = None
    g_handle: object = None
    history: list = field(default_factory=list)

    @property
    def sign(self):
        return operator_sign(self.operator_tag)

    def grid_values(self):
        """Values on the full lattice (NaN on exterior nodes)."""
        m = self.mask
        out = np.full(m.shape, np.nan)
        ij, _, _ = m.dirichlet_nodes()
        out[ij[:, 1] + m.N, ij[:, 0] + m.N] = self.dirichlet_values
        out[m.ij[:, 1] + m.N, m.ij[:, 0] + m.N] = self.values
        return out

    def scaled(self, factor):
        """Field with values, data and residual multiplied by ``factor`` (> 0)."""
        return SolutionField(
            self.mask, self.values * factor, self.f * factor, self.bval * factor,
            self.dirichlet_values * factor, self.residual * factor,
            self.residual_inf * factor, self.iterations, self.operator_tag, self.ell,
            self.tol, self.method, self.f_handle, self.g_handle, list(self.history),
        )

    def metadata(self):
        return {
            "operator": self.operator_tag,
            "ell": self.ell.to_dict(),
            "h": self.mask.h,
            "W": self.mask.stencil.width,
            "tol": self.tol,
            "method": self.method,
            "iterations": self.iterations,
            "residual_inf": self.residual_inf,
            "n_interior": int(self.mask.n_interior),
            "domain": self.mask.spec.to_dict(),
            "f": self.f_handle,
            "g": self.g_handle,
        }

    def write_csv(self, path):
        m = self.mask
        rows = []
        ij, pts, pieces = m.dirichlet_nodes()
        for (i, j), (x1, x2), p, v in zip(ij, pts, pieces, self.dirichlet_values):
            rows.append((int(j), int(i), x1, x2, ROLE_NAMES[int(p)], v, 0.0))
        for n in range(m.n_interior):
            i, j = m.ij[n]
            rows.append((int(j), int(i), m.x[n, 0], m.x[n, 1], ROLE_NAMES[INTERIOR],
                         self.values[n], self.residual[n]))
        rows.sort(key=lambda r: (r[0], r[1]))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x1", "x2", "role", "u", "residual"])
            for j, i, x1, x2, role, u, r in rows:
                w.writerow([i, j, f"{x1:.17g}", f"{x2:.17g}", role, f"{u:.17g}", f"{r:.17g}"])

    def write_metadata(self, path):
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _operator(mask, u, bval, ell, sign):
    return kernels.operator_values(u, mask.nbr, bval, mask.t, mask.stencil.frames,
                                   ell.lam, ell.Lam, sign)


def residual_profile(field):
    """Recompute ``F_h[u] - f`` per node and its inf-norm."""
    m = field.mask
    ell = effective_ell(field.operator_tag, field.ell)
    F = _operator(m, field.values, field.bval, ell, field.sign)[0]
    r = F - field.f
    return r, float(np.abs(r).max()) if r.size else 0.0


def discrete_pucci(mask, u, node, ell, sign, bval):
    """Discrete M+ (``sign=1``) or M- (``sign=-1``) at one interior node.

    Plain-python evaluation used to cross-check the vectorised kernels.
    """
    frames = mask.stencil.frames
    best = None
    for a, b in frames:
        val = 0.0
        for d in (a, b):
            vals = []
            for s in (0, 1):
                j = mask.nbr[node, d, s]
                vals.append(u[j] if j >= 0 else bval[node, d, s])
            s2 = second_difference(u[node], vals[0], vals[1], mask.t[node, d, 0], mask.t[node, d, 1])
            if sign > 0:
                val += ell.Lam * max(s2, 0.0) - ell.lam * max(-s2, 0.0)
            else:
                val += ell.lam * max(s2, 0.0) - ell.Lam * max(-s2, 0.0)
        if best is None or (sign > 0 and val > best) or (sign < 0 and val < best):
            best = val
    return best


def _assemble(mask, bval, arg, coef):
    """Sparse matrix of the linear operator selected by a policy.

    Returns ``(A, b)`` with ``F_policy[u] = A @ u + b``.
    """
    n = mask.n_interior
    frames = mask.stencil.frames
    rows = np.arange(n)
    diag = np.zeros(n)
    b = np.zeros(n)
    ri, ci, vv = [rows], [rows], None
    offd = []
    for m in (0, 1):
        d = frames[arg, m]
        a = coef[:, m]
        tp = mask.t[rows, d, 0]
        tm = mask.t[rows, d, 1]
        wp = a * 2.0 / ((tp + tm) * tp)
        wm = a * 2.0 / ((tp + tm) * tm)
        diag -= wp + wm
        for s, w in ((0, wp), (1, wm)):
            j = mask.nbr[rows, d, s]
            inner = j >= 0
            ri.append(rows[inner])
            ci.append(j[inner])
            offd.append(w[inner])
            b[~inner] += w[~inner] * bval[rows[~inner], d[~inner], s]
    vv = np.concatenate([diag] + offd)
    A = sp.csc_matrix((vv, (np.concatenate(ri), np.concatenate(ci))), shape=(n, n))
    return A, b


def solve_dirichlet(mask, operator_tag, ell, f=None, g=None, tol=DEFAULT_TOL, max_iter=None,
                    method="howard", u0=None, workers=None, f_handle=None, g_handle=None):
    """Solve ``F_h[u] = f`` on ``mask`` with Dirichlet data ``g``.

    Parameters
    ----------
    mask : GridMask
    operator_tag : {"pucci_plus", "pucci_minus", "laplace"}
    ell : EllipticityPair
        Ignored for ``laplace`` (which uses ``lambda = Lambda = 1``).
    f : array, scalar, callable ``f(x1, x2)`` or None
        Source sampled at interior nodes.
    g : callable ``g(x1, x2, piece)``
        Boundary data; ``piece`` is ``WALL`` or ``OUTER`` per point.
    tol : float
        Required inf-norm of ``F_h[u] - f``.
    method : {"howard", "jacobi"}
    workers : int, optional
        numba thread count for this solve.

    Raises
    ------
    NonConvergenceError
        ``max_iter`` exhausted (or Jacobi divergence) with residual above ``tol``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if g is None:
        raise AssemblyError("boundary data g is required")
    sign = operator_sign(operator_tag)
    ell_eff = effective_ell(operator_tag, ell)
    if workers:
        kernels.set_workers(workers)
    fv = _sample_source(mask, f)
    bval = boundary_values(mask, g)
    u = np.zeros(mask.n_interior) if u0 is None else np.array(u0, dtype=float)

    if method == "howard":
        u, its, hist = _howard(mask, u, fv, bval, ell_eff, sign, tol,
                               HOWARD_MAX_ITER if max_iter is None else max_iter)
    else:
        u, its, hist = _jacobi(mask, u, fv, bval, ell_eff, sign, tol,
                               JACOBI_MAX_ITER if max_iter is None else max_iter)

    F = _operator(mask, u, bval, ell_eff, sign)[0]
    r = F - fv
    rinf = float(np.abs(r).max()) if r.size else 0.0
    if rinf > tol:
        raise NonConvergenceError(
            f"{method} stopped after {its} iterations with residual {rinf:.3e} > {tol:.1e}",
            residual_history=hist[-20:],
        )
    _, pts, pieces = mask.dirichlet_nodes()
    dvals = np.asarray(g(pts[:, 0], pts[:, 1], pieces), dtype=float) if len(pts) else np.zeros(0)
    return SolutionField(mask, u, fv, bval, dvals, r, rinf, its, operator_tag, ell_eff, tol,
                         method, f_handle, g_handle, hist)


def _howard(mask, u, fv, bval, ell, sign, tol, max_iter):
    # u <- u - A_pi^{-1} (F[u] - f) with pi the active policy; for a fixed
    # policy this is one exact linear solve plus iterative refinement
    hist = []
    prev = None
    lu = None
    for it in range(max_iter + 1):
        F, arg, coef = _operator(mask, u, bval, ell, sign)
        r = F - fv
        rinf = float(np.abs(r).max()) if r.size else 0.0
        hist.append(rinf)
        if rinf <= tol or it == max_iter:
            return u, it, hist
        key = (arg, coef)
        same = prev is not None and np.array_equal(arg, prev[0]) and np.array_equal(coef, prev[1])
        if not same:
            A, _ = _assemble(mask, bval, arg, coef)
            # rows are diagonally dominant, so no pivoting is needed
            lu = splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                      options={"SymmetricMode": True})
        elif len(hist) > 4 and rinf >= hist[-2]:
            # same policy and no progress: roundoff floor reached
            return u, it, hist
        prev = key
        # Newton form of the policy solve doubles as iterative refinement
        u = u - lu.solve(r)
    return u, max_iter, hist


def _jacobi(mask, u, fv, bval, ell, sign, tol, max_iter):
    frames = mask.stencil.frames
    tau = JACOBI_THETA / kernels.diag_bound(mask.t, frames, ell.Lam)
    hist = []
    best = np.inf
    since_best = 0
    done = 0
    while done < max_iter:
        n = min(JACOBI_CHUNK, max_iter - done)
        u, h = kernels.jacobi_sweeps(u, fv, tau, mask.nbr, bval, mask.t, frames,
                                     ell.lam, ell.Lam, sign, n)
        done += n
        hist.extend(h.tolist())
        cur = h[-1]
        if cur < best:
            best = cur
            since_best = 0
        else:
            since_best += n
        if since_best >= DIVERGENCE_WINDOW:
            break
        F = _operator(mask, u, bval, ell, sign)[0]
        if np.abs(F - fv).max(initial=0.0) <= tol:
            break
    return u, done, hist[-1000:]
