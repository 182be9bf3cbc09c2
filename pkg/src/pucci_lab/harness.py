"""Boundary-growth experiments on solved extremal equations.

A :class:`ProblemSpec` names a scenario (one of ``SCENARIOS``), a domain, the
data and the numerics.  :func:`run_scenario` solves it and measures the
dyadic profiles

    Q(r) = sup_{Omega cap B_r} |u - u(0)| / r
    q(r) = u(r l) / (r l_2)

from which the scenario verdicts (bounded, positive floor, growth, decay) are
computed.  The flat-boundary checks :func:`flat_c1alpha_check`,
:func:`flat_hopf_check` and :func:`notch_hopf_check` run the half-ball and
notch configurations at several resolutions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .certify import growth_product
from .dini import Modulus, dini_integral
from .errors import ResolutionError
from .geometry import OUTER, WALL, DomainSpec, rasterize
from .pucci import EllipticityPair
from .solver import DEFAULT_TOL, operator_sign, solve_dirichlet
from .stencil import build_stencil

SCENARIOS = ("lipschitz", "anti_lipschitz", "hopf", "anti_hopf", "flat_c1alpha",
             "flat_hopf", "notch_hopf")
DEFAULT_OPERATOR = {
    "lipschitz": "pucci_plus",
    "anti_lipschitz": "pucci_minus",
    "hopf": "pucci_minus",
    "anti_hopf": "pucci_plus",
    "flat_c1alpha": "pucci_plus",
    "flat_hopf": "pucci_minus",
    "notch_hopf": "pucci_minus",
}
NORMALIZED = ("anti_lipschitz", "hopf", "flat_hopf")

# verdict margins, fixed from the first refinement runs
LIPSCHITZ_FACTOR = 4.0
HOPF_FLOOR = 0.25
ANTI_LIPSCHITZ_FRACTION = 0.5
ANTI_HOPF_FACTOR = 2.0
GROWTH_C0 = 0.125
GROWTH_ETA = 0.5
TREND_START = 3
RESOLVE_FACTOR = 2.0  # verdicts use radii r_k >= RESOLVE_FACTOR * h
HOPF_DELTA = 0.125
FLAT_FIT_RADIUS = 0.125
FLAT_RADII = tuple(2.0**-k for k in range(2, 7))
DATA_KINDS = ("zero", "constant", "linear", "product", "radial_power", "half_plane_harmonic",
              "wall_outer", "notch_shelf")


# --------------------------------------------------------------------------
# data descriptors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DataSpec:
    """Boundary data or source description.

    ``zero``; ``constant(value)``; ``linear(c)`` = c0 + c1 x1 + c2 x2;
    ``product(scale)`` = scale x1 x2; ``radial_power(p, scale)`` = scale |x|^p;
    ``half_plane_harmonic(p, scale)`` = scale r^p cos(p theta);
    ``wall_outer(wall, outer)`` piecewise by boundary piece;
    ``notch_shelf(value)`` = value on the raised shelf of a notch domain, 0 elsewhere.
    """

    kind: str = "zero"
    value: float = 0.0
    c: tuple = (0.0, 0.0, 0.0)
    scale: float = 1.0
    p: float = 1.0
    wall: float = 0.0
    outer: float = 1.0

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ValueError(f"unknown data kind {self.kind!r}")
        if len(self.c) != 3:
            raise ValueError("linear data needs three coefficients")

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("constant", "notch_shelf"):
            d["value"] = self.value
        elif self.kind == "linear":
            d["c"] = list(self.c)
        elif self.kind == "product":
            d["scale"] = self.scale
        elif self.kind in ("radial_power", "half_plane_harmonic"):
            d.update(p=self.p, scale=self.scale)
        elif self.kind == "wall_outer":
            d.update(wall=self.wall, outer=self.outer)
        return d

    @classmethod
    def from_dict(cls, d):
        kw = {k: v for k, v in d.items() if k != "kind"}
        if "c" in kw:
            kw["c"] = tuple(float(v) for v in kw["c"])
        return cls(d["kind"], **kw)

    def scaled(self, t):
        """The same data multiplied by ``t``."""
        return replace(self, value=self.value * t, c=tuple(t * v for v in self.c),
                       scale=self.scale * t, wall=self.wall * t, outer=self.outer * t)


def make_function(desc, domain=None):
    """Callable ``fn(x1, x2, piece=None)`` for a :class:`DataSpec`."""
    k = desc.kind

    def fn(x1, x2, piece=None):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if k == "zero":
            return np.zeros(np.broadcast(x1, x2).shape)
        if k == "constant":
            return np.full(np.broadcast(x1, x2).shape, desc.value)
        if k == "linear":
            c0, c1, c2 = desc.c
            return c0 + c1 * x1 + c2 * x2
        if k == "product":
            return desc.scale * x1 * x2
        if k == "radial_power":
            r = np.hypot(x1, x2)
            with np.errstate(divide="ignore"):
                return desc.scale * np.where(r > 0, r ** desc.p, 0.0 if desc.p > 0 else np.inf)
        if k == "half_plane_harmonic":
            r = np.hypot(x1, x2)
            th = np.arctan2(x2, x1)
            return desc.scale * r**desc.p * np.cos(desc.p * th)
        if piece is None:
            raise ValueError(f"{k} data needs the boundary piece")
        piece = np.asarray(piece)
        if k == "wall_outer":
            return np.where(piece == OUTER, desc.outer, desc.wall).astype(float)
        # notch_shelf
        if domain is None or domain.kind != "notch":
            raise ValueError("notch_shelf data needs a notch domain")
        R = domain.R
        eps = 1e-9 * R
        shelf = (piece == WALL) & (np.abs(x1) >= 0.25 * R - eps) & (x2 >= domain.a * R - eps)
        return np.where(shelf, desc.value, 0.0)

    return fn


# --------------------------------------------------------------------------
# problem specification
# --------------------------------------------------------------------------


def _default_g(scenario):
    if scenario == "lipschitz":
        return DataSpec("radial_power", p=1.5)
    if scenario == "notch_hopf":
        return DataSpec("notch_shelf", value=1.0)
    return DataSpec("wall_outer", wall=0.0, outer=1.0)


@dataclass(frozen=True)
class ProblemSpec:
    scenario: str
    domain: DomainSpec
    ell: EllipticityPair = EllipticityPair(1.0, 2.0)
    g: DataSpec = None
    f: DataSpec = DataSpec("zero")
    h: float = 1.0 / 128
    W: int = 3
    l: tuple = (0.0, 1.0)
    K: int = 6
    operator: str = None
    omega_g: Modulus = None
    omega_f: Modulus = None
    tol: float = DEFAULT_TOL
    method: str = "howard"
    max_iter: int = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.g is None:
            object.__setattr__(self, "g", _default_g(self.scenario))
        if self.operator is None:
            object.__setattr__(self, "operator", DEFAULT_OPERATOR[self.scenario])
        object.__setattr__(self, "l", tuple(float(v) for v in self.l))
        operator_sign(self.operator)
        if len(self.l) != 2 or abs(math.hypot(*self.l) - 1.0) > 1e-9 or self.l[1] <= 0:
            raise ValueError("probe direction l must be a unit vector with l2 > 0")
        if not (self.h > 0 and self.W >= 1 and self.K >= 3):
            raise ValueError("need h > 0, W >= 1 and K >= 3")
        if 2.0**-self.K < RESOLVE_FACTOR * self.h * (1 - 1e-12):
            raise ResolutionError(
                f"r_K = 2^-{self.K} is below {RESOLVE_FACTOR:g} h at h = {self.h:g}")
        self._check_domain()

    def _check_domain(self):
        d, s = self.domain, self.scenario
        if s in ("flat_c1alpha", "flat_hopf"):
            ok = d.kind == "half_ball"
        elif s == "notch_hopf":
            ok = d.kind == "notch"
        elif s in ("lipschitz", "hopf"):
            side = "exterior_minus" if s == "lipschitz" else "interior_plus"
            ok = d.kind == "half_ball" or (d.kind in ("graph", "wedge") and d.side == side)
            if ok and d.kind == "graph" and not dini_integral(d.omega).is_dini:
                raise ValueError(f"{s} needs a Dini boundary modulus")
        else:
            side = "exterior_minus" if s == "anti_lipschitz" else "interior_plus"
            ok = d.kind == "graph" and d.side == side
            if ok:
                if dini_integral(d.omega).is_dini:
                    raise ValueError(f"{s} needs a non-Dini boundary modulus")
                if not d.omega.vanishes_at_zero:
                    raise ValueError(f"{s} needs a modulus vanishing at 0")
        if not ok:
            raise ValueError(f"domain {d.kind}/{d.side} is incompatible with scenario {s}")

    @property
    def radii(self):
        return np.array([2.0**-k for k in range(2, self.K + 1)])

    def to_dict(self):
        num = {"h": self.h, "W": self.W, "tol": self.tol, "method": self.method}
        if self.max_iter is not None:
            num["max_iter"] = self.max_iter
        d = {
            "scenario": self.scenario,
            "domain": self.domain.to_dict(),
            "operator": {"tag": self.operator, "lambda": self.ell.lam, "Lambda": self.ell.Lam},
            "data": {"g": self.g.to_dict(), "f": self.f.to_dict()},
            "numerics": num,
            "probe": {"l": list(self.l), "K": self.K},
        }
        if self.omega_g is not None:
            d["data"]["omega_g"] = self.omega_g.to_dict()
        if self.omega_f is not None:
            d["data"]["omega_f"] = self.omega_f.to_dict()
        return d

    @classmethod
    def from_dict(cls, d, base_dir=None):
        op = d.get("operator", {})
        data = d.get("data", {})
        num = d.get("numerics", {})
        probe = d.get("probe", {})
        kw = {}
        if "tag" in op:
            kw["operator"] = op["tag"]
        if "lambda" in op or "Lambda" in op:
            kw["ell"] = EllipticityPair(float(op.get("lambda", 1.0)), float(op.get("Lambda", 1.0)))
        if "g" in data:
            kw["g"] = DataSpec.from_dict(data["g"])
        if "f" in data:
            kw["f"] = DataSpec.from_dict(data["f"])
        for key in ("omega_g", "omega_f"):
            if key in data:
                kw[key] = Modulus.from_dict(data[key], base_dir)
        for key, cast in (("h", float), ("W", int), ("tol", float), ("method", str),
                          ("max_iter", int)):
            if key in num:
                kw[key] = cast(num[key])
        if "l" in probe:
            kw["l"] = tuple(probe["l"])
        if "K" in probe:
            kw["K"] = int(probe["K"])
        return cls(d["scenario"], DomainSpec.from_dict(d["domain"], base_dir), **kw)


# --------------------------------------------------------------------------
# measurements on a solved field
# --------------------------------------------------------------------------


def probe(field, points):
    """Values of a solved field at arbitrary points.

    Lattice points return the node value.  Otherwise the value is linear on one
    of the two triangulations of the enclosing cell; a triangulation is used
    only when all three vertices of the containing triangle carry values.
    """
    grid = field.grid_values()
    m = field.mask
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts))
    for n, (x1, x2) in enumerate(pts):
        gx, gy = x1 / m.h + m.N, x2 / m.h + m.N
        i0, j0 = int(math.floor(gx + 1e-9)), int(math.floor(gy + 1e-9))
        s, t = gx - i0, gy - j0
        if abs(s) < 1e-9 and abs(t) < 1e-9:
            out[n] = grid[j0, i0] if 0 <= j0 < grid.shape[0] and 0 <= i0 < grid.shape[1] else np.nan
            if np.isnan(out[n]):
                raise ResolutionError(f"probe point ({x1:g}, {x2:g}) is not a known node")
            continue
        if not (0 <= i0 < grid.shape[1] - 1 and 0 <= j0 < grid.shape[0] - 1):
            raise ResolutionError(f"probe point ({x1:g}, {x2:g}) outside the lattice")
        u00, u10 = grid[j0, i0], grid[j0, i0 + 1]
        u01, u11 = grid[j0 + 1, i0], grid[j0 + 1, i0 + 1]
        if s >= t:
            tri_a = (u00, u10, u11), u00 + s * (u10 - u00) + t * (u11 - u10)
        else:
            tri_a = (u00, u01, u11), u00 + t * (u01 - u00) + s * (u11 - u01)
        if s + t <= 1:
            tri_b = (u00, u10, u01), u00 + s * (u10 - u00) + t * (u01 - u00)
        else:
            tri_b = (u10, u01, u11), u11 + (1 - s) * (u01 - u11) + (1 - t) * (u10 - u11)
        for verts, val in (tri_a, tri_b):
            if not np.isnan(verts).any():
                out[n] = val
                break
        else:
            raise ResolutionError(f"probe point ({x1:g}, {x2:g}) has no fully known triangle")
    return out


def _ball_sup(field, u0, radii):
    """``sup |u - u0|`` and node counts over interior nodes in each ``B_r``."""
    m = field.mask
    rr = np.hypot(m.x[:, 0], m.x[:, 1])
    dev = np.abs(field.values - u0)
    sup = np.empty(len(radii))
    cnt = np.empty(len(radii), dtype=int)
    for n, r in enumerate(radii):
        sel = rr <= r * (1 + 1e-12)
        cnt[n] = int(sel.sum())
        sup[n] = dev[sel].max() if cnt[n] else np.nan
    return sup, cnt


@dataclass(frozen=True)
class GrowthReport:
    scenario: str
    k: np.ndarray
    radii: np.ndarray
    Q: np.ndarray
    q: np.ndarray
    n_nodes: np.ndarray
    resolved: np.ndarray
    omega_tilde: np.ndarray  # certified product at each r_k (NaN when not applicable)
    row_verdict: np.ndarray
    fitted_exponent: float
    normalization: float
    verdicts: dict
    constants: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.verdicts.values())

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "r", "Q", "q", "omega_tilde_predicted", "verdict"])
            for n in range(len(self.k)):
                w.writerow([int(self.k[n]), f"{self.radii[n]:.17g}", f"{self.Q[n]:.17g}",
                            f"{self.q[n]:.17g}", f"{self.omega_tilde[n]:.17g}",
                            "pass" if self.row_verdict[n] else "fail"])

    def to_dict(self):
        def clean(v):
            v = float(v)
            return v if math.isfinite(v) else None

        return {
            "scenario": self.scenario,
            "k": [int(v) for v in self.k],
            "r": [clean(v) for v in self.radii],
            "Q": [clean(v) for v in self.Q],
            "q": [clean(v) for v in self.q],
            "fitted_exponent": clean(self.fitted_exponent),
            "normalization": clean(self.normalization),
            "verdicts": dict(self.verdicts),
            "constants": {k: clean(v) for k, v in self.constants.items()},
        }


def _strict(values, increasing):
    d = np.diff(values)
    return bool(np.all(d > 0)) if increasing else bool(np.all(d < 0))


def measure_growth(spec, field):
    """GrowthReport of an already solved field for ``spec``."""
    m = field.mask
    radii = spec.radii
    ks = np.arange(2, spec.K + 1)
    g_fn = make_function(spec.g, spec.domain)
    u0 = float(np.asarray(g_fn(np.array([0.0]), np.array([0.0]), np.array([WALL])))[0])
    norm = 1.0
    if spec.scenario in NORMALIZED:
        norm = float(probe(field, [(0.0, 0.5 * spec.domain.R)])[0])
        if not norm > 0:
            raise ResolutionError("normalisation value u(e2/2) is not positive")
    sup, cnt = _ball_sup(field, u0, radii)
    Q = sup / radii / norm
    l1, l2 = spec.l
    pts = np.stack([radii * l1, radii * l2], axis=1)
    q = (probe(field, pts) - u0) / (radii * l2) / norm
    resolved = radii >= RESOLVE_FACTOR * m.h * (1 - 1e-12)

    use = resolved & (sup > 0)
    slope = float(np.polyfit(np.log(radii[use]), np.log(sup[use]), 1)[0]) if use.sum() >= 2 else np.nan

    omega_tilde = np.full(len(ks), np.nan)
    verdicts = {}
    rows = np.ones(len(ks), dtype=bool)
    constants = {}
    s = spec.scenario
    trend = resolved & (ks >= TREND_START)
    if s == "lipschitz":
        bound = LIPSCHITZ_FACTOR * Q[0]
        rows = Q <= bound
        verdicts["bounded"] = bool(np.all(rows[resolved]))
        constants["max_Q_over_Q2"] = float(np.max(Q[resolved]) / Q[0])
    elif s in ("hopf", "flat_hopf", "notch_hopf"):
        floor = HOPF_FLOOR * q[0]
        rows = q >= floor
        verdicts["positive"] = bool(q[0] > 0)
        verdicts["floor"] = bool(np.all(rows[resolved]))
        constants["min_q_over_q2"] = float(np.min(q[resolved]) / q[0])
    elif s in ("anti_lipschitz", "anti_hopf"):
        sign = 1 if s == "anti_lipschitz" else -1
        seq = growth_product(spec.domain.omega, GROWTH_C0, GROWTH_ETA, spec.K, sign)
        omega_tilde = seq.a[ks]
        idx = np.nonzero(trend)[0]
        k_lo, k_hi = ks[idx[0]], ks[idx[-1]]
        ratio_cert = seq.ratio(k_lo, k_hi)
        ratio_meas = q[idx[-1]] / q[idx[0]]
        rows[1:] = np.diff(q) > 0 if sign > 0 else np.diff(q) < 0
        rows[0] = True
        rows &= ks >= TREND_START - 1
        verdicts["strict_trend"] = _strict(q[idx], increasing=sign > 0)
        if sign > 0:
            verdicts["certified_ratio"] = bool(ratio_meas >= ANTI_LIPSCHITZ_FRACTION * ratio_cert)
        else:
            verdicts["certified_ratio"] = bool(ratio_meas <= ANTI_HOPF_FACTOR * ratio_cert)
        constants["q_ratio"] = float(ratio_meas)
        constants["omega_tilde_ratio"] = float(ratio_cert)
    else:  # flat_c1alpha
        verdicts["slope_above_one"] = bool(slope > 1.0)
    rows &= resolved

    if spec.omega_g is not None:
        pts_g, vals_g = _boundary_samples(m, g_fn)
        res = check_pointwise_norms((pts_g, vals_g), "C1Dini", spec.omega_g, f0=u0)
        constants["g_C1Dini"] = res.C
    if spec.omega_f is not None and spec.f.kind != "zero":
        res = check_pointwise_norms((m.x, field.f), "Cm1Dini", spec.omega_f,
                                    cell_area=m.h * m.h)
        constants["f_Cm1Dini"] = res.C

    return GrowthReport(s, ks, radii, Q, q, cnt, resolved, omega_tilde, rows, slope, norm,
                        verdicts, constants)


def _boundary_samples(mask, g_fn):
    need = mask.nbr < 0
    hx = mask.hit[..., 0][need]
    hy = mask.hit[..., 1][need]
    pts = np.unique(np.round(np.stack([hx, hy], axis=1), 15), axis=0)
    vals = g_fn(pts[:, 0], pts[:, 1], np.full(len(pts), WALL))
    return pts, vals


def solve_spec(spec, workers=None):
    mask = rasterize(spec.domain, spec.h, build_stencil(spec.W))
    g_fn = make_function(spec.g, spec.domain)
    f_fn = make_function(spec.f, spec.domain)
    return solve_dirichlet(
        mask, spec.operator, spec.ell,
        f=None if spec.f.kind == "zero" else (lambda x1, x2: f_fn(x1, x2)),
        g=g_fn, tol=spec.tol, method=spec.method, max_iter=spec.max_iter, workers=workers,
        f_handle=spec.f.to_dict(), g_handle=spec.g.to_dict(),
    )


def run_scenario(spec, field=None, workers=None):
    """Solve ``spec`` (unless ``field`` is given) and measure its growth profile."""
    if field is None:
        field = solve_spec(spec, workers)
    return field, measure_growth(spec, field)


# --------------------------------------------------------------------------
# pointwise norms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PointwiseNorm:
    kind: str
    C: float
    passed: bool
    unbounded: bool
    gradient: tuple = (0.0, 0.0)


def _default_points(spacing=1.0 / 64, R=1.0):
    c = np.arange(-R, R + spacing / 2, spacing)
    X1, X2 = np.meshgrid(c, c)
    pts = np.stack([X1.ravel(), X2.ravel()], axis=1)
    return pts[np.hypot(pts[:, 0], pts[:, 1]) <= R]


def check_pointwise_norms(data, kind, omega=None, x0=(0.0, 0.0), points=None, f0=None,
                          gradient=None, cell_area=None, radii=None):
    """Pointwise constants of a sampled or callable function at ``x0``.

    ``data`` is a callable ``f(x1, x2)``, a ``(points, values)`` pair or a
    :class:`SolutionField` (interior nodes).  Kinds:

    ``C01``     sup |f(x) - f(x0)| / |x - x0|
    ``C1Dini``  sup |f(x) - f(x0) - l.(x - x0)| / (|x - x0| w(|x - x0|)) with l
                fitted by least squares unless ``gradient`` is given
    ``Cm1Dini`` max over dyadic r of ||f||_{L^2(B_r(x0))} / w(r), the norm being
                the cell-area weighted discrete sum
    """
    x0 = np.asarray(x0, dtype=float)
    if callable(data):
        pts = _default_points() if points is None else np.asarray(points, dtype=float)
        vals = np.asarray(data(pts[:, 0], pts[:, 1]), dtype=float)
        if f0 is None and kind != "Cm1Dini":
            f0 = float(np.asarray(data(np.array([x0[0]]), np.array([x0[1]])))[0])
        if cell_area is None and points is None:
            cell_area = (1.0 / 64) ** 2
    elif hasattr(data, "mask"):
        pts, vals = data.mask.x, data.values
        if cell_area is None:
            cell_area = data.mask.h**2
    else:
        pts, vals = (np.asarray(a, dtype=float) for a in data)
    d = pts - x0
    rr = np.hypot(d[:, 0], d[:, 1])
    away = rr > 0
    if kind in ("C01", "C1Dini") and f0 is None:
        at = ~away
        if not at.any():
            raise ValueError("value at x0 is not sampled; pass f0")
        f0 = float(vals[at][0])
    if kind == "C01":
        C = float(np.max(np.abs(vals[away] - f0) / rr[away], initial=0.0))
        return PointwiseNorm(kind, C, bool(np.isfinite(C)), False)
    if omega is None:
        raise ValueError(f"{kind} needs a modulus")
    if kind == "C1Dini":
        if gradient is None:
            sol = np.linalg.lstsq(d[away], vals[away] - f0, rcond=None)[0]
            gradient = (float(sol[0]), float(sol[1]))
        num = np.abs(vals[away] - f0 - d[away] @ np.asarray(gradient, dtype=float))
        den = rr[away] * omega(np.minimum(rr[away], omega.domain_radius))
        tiny = 1e-12 * max(1.0, float(np.max(np.abs(vals), initial=0.0)))
        bad = (den <= 0) & (num > tiny)
        ok = den > 0
        C = float(np.max(num[ok] / den[ok], initial=0.0))
        if bad.any():
            return PointwiseNorm(kind, math.inf, False, True, gradient)
        return PointwiseNorm(kind, C, True, False, gradient)
    if kind == "Cm1Dini":
        if cell_area is None:
            raise ValueError("Cm1Dini needs the cell area of the samples")
        if radii is None:
            radii = [2.0**-k for k in range(0, 8)]
        ratios = []
        unbounded = False
        for r in radii:
            sel = away & (rr <= r)
            norm = math.sqrt(math.fsum(vals[sel] ** 2) * cell_area)
            w = float(omega(min(r, omega.domain_radius)))
            if w <= 0:
                unbounded |= norm > 0
                continue
            ratios.append(norm / w)
        C = math.inf if unbounded else max(ratios, default=0.0)
        return PointwiseNorm(kind, C, not unbounded and math.isfinite(C), unbounded)
    raise ValueError(f"unknown norm kind {kind!r}")


# --------------------------------------------------------------------------
# flat and notch checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatFit:
    h: float
    a: float
    alpha: float  # nan for the exact-linear special case
    C_fit: float  # exp(intercept) of the log-log fit
    C_a: float  # |a| / ||u||_inf
    exact_linear: bool
    errors: tuple


@dataclass(frozen=True)
class FlatC1AlphaResult:
    fits: tuple
    stable: bool
    passed: bool

    @property
    def alpha(self):
        return self.fits[-1].alpha

    @property
    def a(self):
        return self.fits[-1].a


def fit_c1alpha(field, radii=FLAT_RADII, fit_radius=FLAT_FIT_RADIUS):
    """Slope ``a`` of ``u ~ a x2`` on ``B_fit^+`` and exponent of ``sup|u - a x2|``."""
    m = field.mask
    rr = np.hypot(m.x[:, 0], m.x[:, 1])
    sel = rr <= fit_radius
    x2 = m.x[sel, 1]
    a = float(np.dot(field.values[sel], x2) / np.dot(x2, x2))
    dev = np.abs(field.values - a * m.x[:, 1])
    errs = np.array([dev[rr <= r].max() for r in radii])
    unorm = max(float(np.abs(field.values).max()), float(np.abs(field.dirichlet_values).max()))
    if errs.max() <= 1e-9 * max(1.0, abs(a)):
        return FlatFit(m.h, a, math.nan, 0.0, abs(a) / unorm, True, tuple(errs))
    slope, icpt = np.polyfit(np.log(radii), np.log(errs), 1)
    return FlatFit(m.h, a, float(slope - 1.0), float(math.exp(icpt)), abs(a) / unorm, False,
                   tuple(errs))


def _relative_spread(values):
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / abs(v[-1]))


def flat_c1alpha_check(h_list, ell=EllipticityPair(1.0, 2.0), operator="pucci_plus",
                       g=None, W=3, tol=DEFAULT_TOL, stability=0.2):
    """Boundary ``C^{1,alpha}`` fit on the half ball at each ``h``."""
    g = DataSpec("wall_outer", wall=0.0, outer=1.0) if g is None else g
    fits = []
    for h in h_list:
        spec = ProblemSpec("flat_c1alpha", DomainSpec.half_ball(), ell, g=g, h=h, W=W,
                           operator=operator, tol=tol, K=max(3, min(6, int(-math.log2(2 * h)))))
        fits.append(fit_c1alpha(solve_spec(spec)))
    fits = tuple(fits)
    if all(f.exact_linear for f in fits):
        return FlatC1AlphaResult(fits, True, True)
    alphas = [f.alpha for f in fits]
    stable = len(fits) < 2 or _relative_spread(alphas) <= stability
    passed = all(a > 0 for a in alphas) and all(math.isfinite(f.C_a) for f in fits)
    return FlatC1AlphaResult(fits, stable, passed)


def hopf_constant(field, delta=HOPF_DELTA, normalize=True):
    """``min u(x) / x2`` over interior nodes of ``B_delta``, optionally per ``u(e2/2)``."""
    m = field.mask
    sel = np.hypot(m.x[:, 0], m.x[:, 1]) <= delta
    c = float(np.min(field.values[sel] / m.x[sel, 1]))
    if normalize:
        c /= float(probe(field, [(0.0, 0.5)])[0])
    return c


@dataclass(frozen=True)
class HopfResult:
    h_list: tuple
    c: tuple
    stable: bool
    passed: bool


def flat_hopf_check(h_list, ell=EllipticityPair(1.0, 2.0), W=3, tol=DEFAULT_TOL,
                    delta=HOPF_DELTA, stability=0.25):
    """Half-ball Hopf constant ``c = min_{B_delta^+} u / x2`` with ``u(e2/2) = 1``."""
    cs = []
    for h in h_list:
        spec = ProblemSpec("flat_hopf", DomainSpec.half_ball(), ell, h=h, W=W, tol=tol,
                           K=max(3, min(6, int(-math.log2(2 * h)))))
        cs.append(hopf_constant(solve_spec(spec), delta))
    stable = len(cs) < 2 or _relative_spread(cs) <= stability
    return HopfResult(tuple(h_list), tuple(cs), stable, all(c > 0 for c in cs))


@dataclass(frozen=True)
class NotchResult:
    a_values: tuple
    c: tuple  # min_{B_delta} u / x2 per a
    u_e8: tuple  # u(e2/8) per a
    c_min: float
    passed: bool


def notch_hopf_check(a_values=(0.0, 0.1, 0.2, 0.3, 0.4), h=1.0 / 128,
                     ell=EllipticityPair(1.0, 2.0), W=3, tol=DEFAULT_TOL, delta=HOPF_DELTA):
    """Hopf constant on ``notch(a)`` with unit data on the raised shelf."""
    cs, ue = [], []
    for a in a_values:
        spec = ProblemSpec("notch_hopf", DomainSpec.notch(a), ell, h=h, W=W, tol=tol,
                           K=max(3, min(6, int(-math.log2(2 * h)))))
        fld = solve_spec(spec)
        cs.append(hopf_constant(fld, delta, normalize=False))
        ue.append(float(probe(fld, [(0.0, 0.125)])[0]))
    c_min = min(cs)
    return NotchResult(tuple(a_values), tuple(cs), tuple(ue), c_min, c_min > 0)
