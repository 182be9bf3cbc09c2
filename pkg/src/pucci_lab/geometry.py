"""Model domains, their rasterisation, and cut-cell arm lengths.

Coordinates are ``x = (x1, x2)`` with the boundary point of interest at the
origin and the inward normal ``e_n = (0, 1)``.  Every domain is intersected
with the open ball ``B_R``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .dini import Modulus
from .errors import ResolutionError
from .stencil import StencilSet, build_stencil

KINDS = ("half_ball", "graph", "notch", "wedge")
SIDES = ("exterior_minus", "interior_plus")

EXTERIOR, INTERIOR, WALL, OUTER = 0, 1, 2, 3
ROLE_NAMES = {EXTERIOR: "exterior", INTERIOR: "interior", WALL: "dirichlet_wall", OUTER: "dirichlet_outer"}

BISECTION_STEPS = 60
SNAP_FRACTION = 1e-3
THIN_FRACTION = 0.25


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    R: float = 1.0
    side: str = "exterior_minus"
    omega: Modulus = field(default_factory=Modulus.zero)
    a: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.side not in SIDES:
            raise ValueError(f"unknown graph side {self.side!r}")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.kind == "notch" and not (0 <= self.a < 0.5):
            raise ValueError("notch offset must lie in [0, 1/2)")
        if self.kind == "wedge" and self.k < 0:
            raise ValueError("wedge slope must be >= 0")

    @classmethod
    def half_ball(cls, R=1.0):
        return cls("half_ball", R=R)

    @classmethod
    def graph(cls, side, omega, R=1.0):
        return cls("graph", R=R, side=side, omega=omega)

    @classmethod
    def notch(cls, a, R=1.0):
        return cls("notch", R=R, a=float(a))

    @classmethod
    def wedge(cls, k, R=1.0, side="exterior_minus"):
        return cls("wedge", R=R, side=side, k=float(k))

    def boundary_modulus(self):
        if self.kind == "wedge":
            return Modulus.constant(self.k)
        if self.kind == "half_ball":
            return Modulus.zero()
        return self.omega

    def to_dict(self):
        d = {"kind": self.kind, "R": self.R}
        if self.kind == "graph":
            d.update(side=self.side, omega=self.omega.to_dict())
        elif self.kind == "notch":
            d["a"] = self.a
        elif self.kind == "wedge":
            d.update(k=self.k, side=self.side)
        return d

    @classmethod
    def from_dict(cls, d, base_dir=None):
        kind = d["kind"]
        R = float(d.get("R", 1.0))
        if kind == "half_ball":
            return cls.half_ball(R)
        if kind == "graph":
            return cls.graph(d["side"], Modulus.from_dict(d["omega"], base_dir), R)
        if kind == "notch":
            return cls.notch(d["a"], R)
        if kind == "wedge":
            return cls.wedge(d["k"], R, d.get("side", "exterior_minus"))
        raise ValueError(f"unknown domain kind {kind!r}")


def modulus_of_domain(spec):
    """The boundary modulus a graph or wedge domain was built from."""
    if spec.kind not in ("graph", "wedge"):
        raise ValueError(f"{spec.kind} domains have no boundary modulus")
    return spec.boundary_modulus()


def _in_ball(spec, x1, x2):
    return x1 * x1 + x2 * x2 < spec.R * spec.R


def _in_region(spec, x1, x2):
    if spec.kind == "half_ball":
        return x2 > 0
    if spec.kind == "notch":
        return (x2 > 0) & ((np.abs(x1) < 0.25 * spec.R) | (x2 > spec.a * spec.R))
    omega = spec.boundary_modulus()
    ax = np.abs(x1)
    bump = ax * omega(np.minimum(ax, omega.domain_radius))
    if spec.side == "interior_plus":
        return x2 > bump
    return x2 > -bump


def inside(spec, x):
    """Inside predicate; ``x`` is a point ``(x1, x2)`` or an array ``(..., 2)``."""
    arr = np.asarray(x, dtype=float)
    x1, x2 = arr[..., 0], arr[..., 1]
    res = _in_ball(spec, x1, x2) & _in_region(spec, x1, x2)
    return bool(res) if res.ndim == 0 else res


def inside_xy(spec, x1, x2):
    return _in_ball(spec, x1, x2) & _in_region(spec, x1, x2)


def boundary_piece(spec, x1, x2):
    """WALL or OUTER for points at (or just beyond) the boundary."""
    out = ~_in_ball(spec, x1, x2) | (np.hypot(x1, x2) >= spec.R * (1 - 1e-12))
    return np.where(out, OUTER, WALL).astype(np.int8)


@dataclass(eq=False)
class GridMask:
    """Rasterised domain.

    Lattice node ``(i, j)`` sits at ``(i*h, j*h)`` for ``-N <= i, j <= N``; grid
    arrays are indexed ``[j + N, i + N]``.  Per interior node ``n``, direction
    ``d`` and side ``s`` (0 for ``+e``, 1 for ``-e``):

    * ``t[n, d, s]``     arm length, ``0 < t <= nominal``
    * ``nbr[n, d, s]``   interior index of the far node, or -1
    * ``hit[n, d, s]``   point supplying the Dirichlet value when ``nbr == -1``
    * ``piece[n, d, s]`` WALL or OUTER for Dirichlet sources, 0 otherwise
    """

    spec: DomainSpec
    h: float
    stencil: StencilSet
    N: int
    roles: np.ndarray
    node_index: np.ndarray
    ij: np.ndarray
    x: np.ndarray
    nbr: np.ndarray
    t: np.ndarray
    hit: np.ndarray
    piece: np.ndarray

    @property
    def n_interior(self):
        return len(self.ij)

    @property
    def shape(self):
        return self.roles.shape

    @property
    def origin_index(self):
        return (self.N, self.N)

    def coords(self):
        c = np.arange(-self.N, self.N + 1) * self.h
        return np.meshgrid(c, c)

    def dirichlet_nodes(self):
        """Lattice indices, coordinates and pieces of Dirichlet nodes."""
        jj, ii = np.nonzero((self.roles == WALL) | (self.roles == OUTER))
        pieces = self.roles[jj, ii]
        pts = np.stack([(ii - self.N) * self.h, (jj - self.N) * self.h], axis=1)
        return np.stack([ii - self.N, jj - self.N], axis=1), pts, pieces

    def write_csv(self, path, arms=False):
        X1, X2 = self.coords()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x1", "x2", "role"])
            for jr in range(self.roles.shape[0]):
                for ir in range(self.roles.shape[1]):
                    w.writerow([ir - self.N, jr - self.N, repr(float(X1[jr, ir])),
                                repr(float(X2[jr, ir])), ROLE_NAMES[int(self.roles[jr, ir])]])
        if arms:
            self.write_arms_csv(str(path) + ".arms.csv")

    def write_arms_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "p", "q", "side", "t", "nbr", "hit_x1", "hit_x2", "piece"])
            vec = self.stencil.vectors
            for n in range(self.n_interior):
                i, j = self.ij[n]
                for d in range(len(vec)):
                    for s in (0, 1):
                        w.writerow([int(i), int(j), int(vec[d, 0]), int(vec[d, 1]), "+-"[s],
                                    repr(float(self.t[n, d, s])), int(self.nbr[n, d, s]),
                                    repr(float(self.hit[n, d, s, 0])),
                                    repr(float(self.hit[n, d, s, 1])), int(self.piece[n, d, s])])


def _boundary_nodes(spec, X1, X2, ins, h):
    eps = 1e-9 * h
    near = np.zeros_like(ins)
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)):
        near |= inside_xy(spec, X1 + dx * eps, X2 + dy * eps)
    return near & ~ins


def _cast_rays(spec, px, py, ux, uy, length, n_samples):
    """Distance along each ray to the first exit from the domain.

    Returns ``(t, cut, hit_piece)``; ``t == length`` and ``cut == False`` for
    rays that stay inside up to their nominal length.
    """
    m = len(px)
    t = np.full(m, length)
    cut = np.zeros(m, dtype=bool)
    lo = np.zeros(m)
    hi = np.full(m, length)
    for k in range(1, n_samples + 1):
        tk = length * k / n_samples
        todo = ~cut
        if not todo.any():
            break
        ok = inside_xy(spec, px[todo] + tk * ux, py[todo] + tk * uy)
        idx = np.flatnonzero(todo)
        exit_now = idx[~ok]
        cut[exit_now] = True
        lo[exit_now] = length * (k - 1) / n_samples
        hi[exit_now] = tk
    piece = np.zeros(m, dtype=np.int8)
    c = np.flatnonzero(cut)
    if c.size:
        a, b = lo[c], hi[c]
        qx, qy = px[c], py[c]
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (a + b)
            ok = inside_xy(spec, qx + mid * ux, qy + mid * uy)
            a = np.where(ok, mid, a)
            b = np.where(ok, b, mid)
        t[c] = 0.5 * (a + b)
        piece[c] = boundary_piece(spec, qx + b * ux, qy + b * uy)
    return t, cut, piece


def rasterize(spec, h, stencil=None, thin="raise"):
    """Assign node roles and per-direction arm lengths on the lattice ``hZ^2``.

    ``thin="raise"`` raises :class:`ResolutionError` at the first interior node
    whose chord ``t+ + t-`` in some direction is below ``h/4``; ``thin="snap"``
    turns such nodes into Dirichlet nodes instead.
    """
    if stencil is None:
        stencil = build_stencil(3)
    if h > spec.R / 8 * (1 + 1e-12):
        raise ValueError("grid spacing must satisfy h <= R/8")
    if thin not in ("raise", "snap"):
        raise ValueError("thin must be 'raise' or 'snap'")
    N = int(math.ceil(spec.R / h)) + 1
    c = np.arange(-N, N + 1) * h
    X1, X2 = np.meshgrid(c, c)
    ins = inside_xy(spec, X1, X2)
    bnd = _boundary_nodes(spec, X1, X2, ins, h)

    W = stencil.width
    box = np.ones((2 * W + 3, 2 * W + 3), dtype=bool)
    deep = ndimage.binary_erosion(ins, structure=box, border_value=0)

    jj, ii = np.nonzero(ins)
    n0 = len(jj)
    D = stencil.n_directions
    t = np.empty((n0, D, 2))
    cut = np.zeros((n0, D, 2), dtype=bool)
    piece = np.zeros((n0, D, 2), dtype=np.int8)
    px, py = X1[jj, ii], X2[jj, ii]
    shallow = ~deep[jj, ii]
    for d in range(D):
        L = stencil.lengths[d] * h
        n_samples = 8 * int(np.abs(stencil.vectors[d]).max())
        for s, sgn in enumerate((1.0, -1.0)):
            ux, uy = sgn * stencil.units[d]
            t[:, d, s] = L
            sel = np.flatnonzero(shallow)
            ts, cs, ps = _cast_rays(spec, px[sel], py[sel], ux, uy, L, n_samples)
            t[sel, d, s] = ts
            cut[sel, d, s] = cs
            piece[sel, d, s] = ps

    # snapping: very short arms and (optionally) thin chords
    short = (cut & (t < SNAP_FRACTION * h)).any(axis=(1, 2))
    thin_mask = ((t[:, :, 0] + t[:, :, 1]) < THIN_FRACTION * h).any(axis=1) & ~short
    if thin_mask.any():
        if thin == "raise":
            n = int(np.flatnonzero(thin_mask)[0])
            node = (int(ii[n] - N), int(jj[n] - N))
            raise ResolutionError(f"domain too thin for h={h} at lattice node {node}", node=node)
        short |= thin_mask
    snap_piece = np.zeros(n0, dtype=np.int8)
    if short.any():
        for n in np.flatnonzero(short):
            tt = np.where(cut[n], t[n], np.inf)
            d, s = np.unravel_index(np.argmin(tt), tt.shape)
            snap_piece[n] = piece[n, d, s]

    roles = np.zeros(ins.shape, dtype=np.int8)
    roles[bnd] = boundary_piece(spec, X1[bnd], X2[bnd])
    roles[jj, ii] = INTERIOR
    roles[jj[short], ii[short]] = snap_piece[short]

    keep = ~short
    node_index = np.full(ins.shape, -1, dtype=np.int64)
    node_index[jj[keep], ii[keep]] = np.arange(int(keep.sum()))

    jk, ik = jj[keep], ii[keep]
    n = len(jk)
    nbr = np.full((n, D, 2), -1, dtype=np.int64)
    hit = np.full((n, D, 2, 2), np.nan)
    t_k = np.ascontiguousarray(t[keep])
    cut_k = cut[keep]
    piece_k = piece[keep].copy()
    xk = np.stack([X1[jk, ik], X2[jk, ik]], axis=1)
    for d in range(D):
        p, q = stencil.vectors[d]
        for s, sgn in enumerate((1, -1)):
            full = ~cut_k[:, d, s]
            fj = jk + sgn * q
            fi = ik + sgn * p
            target = np.where(full, node_index[np.clip(fj, 0, 2 * N), np.clip(fi, 0, 2 * N)], -1)
            nbr[:, d, s] = target
            # full arm landing on a snapped node: Dirichlet value at that node
            to_snapped = full & (target < 0)
            if to_snapped.any():
                hit[to_snapped, d, s, 0] = (fi[to_snapped] - N) * h
                hit[to_snapped, d, s, 1] = (fj[to_snapped] - N) * h
                piece_k[to_snapped, d, s] = roles[fj[to_snapped], fi[to_snapped]]
            cs = cut_k[:, d, s]
            if cs.any():
                ux, uy = sgn * stencil.units[d]
                hit[cs, d, s, 0] = xk[cs, 0] + t_k[cs, d, s] * ux
                hit[cs, d, s, 1] = xk[cs, 1] + t_k[cs, d, s] * uy
    piece_k[nbr >= 0] = 0

    ij = np.stack([ik - N, jk - N], axis=1)
    mask = GridMask(spec, h, stencil, N, roles, node_index, ij, xk, nbr, t_k, hit, piece_k)
    for arr in (roles, node_index, ij, xk, nbr, t_k, hit, piece_k):
        arr.setflags(write=False)
    return mask
