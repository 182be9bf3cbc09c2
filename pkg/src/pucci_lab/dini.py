"""Moduli of continuity and their Dini integrals.

A modulus is a nonnegative, nondecreasing function on ``[0, domain_radius]``.
Four analytic families are supported plus a tabulated fallback::

    zero            w(r) = 0
    constant(k)     w(r) = k
    power(a, c)     w(r) = c * r**a
    log_inverse(p, c)  w(r) = c / log(e / r)**p

Every modulus also carries ``arg_scale`` so that ``w(r) = base(arg_scale * r)``;
this is how :func:`rescale_to_small` represents ``s -> w(r1 * s)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DiniClassificationError, InconclusiveQuadratureError, PrecisionError

FAMILIES = ("zero", "constant", "power", "log_inverse", "tabulated")

# Partial sums above this value declare divergence.
DIVERGENCE_THRESHOLD = 1.0e3
DYADIC_FLOOR_EXPONENT = 40
MAX_PANELS = 1100


@dataclass(frozen=True)
class Modulus:
    family: str
    k: float = 0.0
    alpha: float = 1.0
    c: float = 1.0
    p: float = 1.0
    knots_r: tuple = field(default=(), repr=False)
    knots_w: tuple = field(default=(), repr=False)
    arg_scale: float = 1.0
    domain_radius: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown modulus family {self.family!r}")
        if self.family == "constant" and self.k < 0:
            raise ValueError("constant modulus needs k >= 0")
        if self.family == "power" and not (0 < self.alpha <= 1):
            raise ValueError("power modulus needs alpha in (0, 1]")
        if self.family == "log_inverse" and self.p <= 0:
            raise ValueError("log_inverse modulus needs p > 0")
        if self.family in ("power", "log_inverse") and self.c < 0:
            raise ValueError("scale c must be >= 0")
        if self.family == "tabulated":
            r = np.asarray(self.knots_r, dtype=float)
            w = np.asarray(self.knots_w, dtype=float)
            if r.ndim != 1 or r.shape != w.shape or r.size < 2:
                raise ValueError("tabulated modulus needs at least two (r, w) knots")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise ValueError("knots must be sorted, distinct and nonnegative")
            if np.any(w < 0) or np.any(np.diff(w) < 0):
                raise ValueError("tabulated values must be nonnegative and nondecreasing")
        if self.arg_scale <= 0 or self.domain_radius <= 0:
            raise ValueError("arg_scale and domain_radius must be positive")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, k):
        return cls("constant", k=float(k))

    @classmethod
    def power(cls, alpha, c=1.0):
        return cls("power", alpha=float(alpha), c=float(c))

    @classmethod
    def log_inverse(cls, p, c=1.0):
        return cls("log_inverse", p=float(p), c=float(c))

    @classmethod
    def tabulated(cls, r, w):
        r = tuple(float(x) for x in r)
        w = tuple(float(x) for x in w)
        return cls("tabulated", knots_r=r, knots_w=w, domain_radius=r[-1])

    # -- evaluation ---------------------------------------------------------
    def __call__(self, r):
        return eval_modulus(self, r)

    @property
    def vanishes_at_zero(self):
        return self.family != "constant" or self.k == 0

    def rescaled(self, r1):
        """Return ``s -> w(r1 * s)`` on ``[0, 1]``."""
        if r1 <= 0 or r1 > self.domain_radius * (1 + 1e-12):
            raise ValueError("rescaling radius outside the modulus domain")
        if self.family in ("zero", "constant"):
            return replace(self, domain_radius=1.0)
        if self.family == "power" and self.arg_scale == 1.0:
            return Modulus.power(self.alpha, self.c * r1**self.alpha)
        return replace(self, arg_scale=self.arg_scale * r1, domain_radius=1.0)

    def to_dict(self):
        d = {"family": self.family}
        if self.family == "constant":
            d["k"] = self.k
        elif self.family == "power":
            d.update(alpha=self.alpha, c=self.c)
        elif self.family == "log_inverse":
            d.update(p=self.p, c=self.c)
        elif self.family == "tabulated":
            d["knots"] = [[r, w] for r, w in zip(self.knots_r, self.knots_w)]
        if self.arg_scale != 1.0:
            d["arg_scale"] = self.arg_scale
        if self.domain_radius != 1.0 and self.family != "tabulated":
            d["domain_radius"] = self.domain_radius
        return d

    @classmethod
    def from_dict(cls, d, base_dir=None):
        d = dict(d)
        family = d.pop("family")
        if family == "tabulated":
            if "knots_csv" in d:
                path = Path(d.pop("knots_csv"))
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                r, w = load_knots_csv(path)
            else:
                knots = d.pop("knots")
                r, w = [k[0] for k in knots], [k[1] for k in knots]
            m = cls.tabulated(r, w)
            if "arg_scale" in d:
                s = float(d["arg_scale"])
                m = replace(m, arg_scale=s, domain_radius=m.knots_r[-1] / s)
            return m
        kwargs = {k: float(v) for k, v in d.items()}
        return cls(family, **kwargs)


def load_knots_csv(path):
    """Read a two-column ``r,omega`` CSV (a header row is optional)."""
    r, w = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                a, b = float(row[0]), float(row[1])
            except ValueError:
                continue
            r.append(a)
            w.append(b)
    return r, w


def save_knots_csv(path, modulus):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "omega"])
        for r, w in zip(modulus.knots_r, modulus.knots_w):
            writer.writerow([repr(r), repr(w)])


def _base(mod, t):
    """Evaluate the unscaled family function at ``t`` (array)."""
    fam = mod.family
    if fam == "zero":
        return np.zeros_like(t)
    if fam == "constant":
        return np.full_like(t, mod.k)
    if fam == "power":
        return mod.c * t**mod.alpha
    if fam == "log_inverse":
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = mod.c / np.log(math.e / t[pos]) ** mod.p
        return out
    r = np.asarray(mod.knots_r)
    w = np.asarray(mod.knots_w)
    if r[0] > 0:
        r = np.concatenate(([0.0], r))
        w = np.concatenate(([0.0], w))
    return np.interp(t, r, w)


def eval_modulus(mod, r):
    """Evaluate ``mod`` at ``r`` (scalar or array).

    Raises ``ValueError`` when any ``r`` lies outside ``[0, domain_radius]``.
    """
    arr = np.asarray(r, dtype=float)
    slack = 1e-12 * mod.domain_radius
    if np.any(arr < 0) or np.any(arr > mod.domain_radius + slack) or np.any(np.isnan(arr)):
        raise ValueError(f"r outside [0, {mod.domain_radius}]")
    t = np.minimum(arr, mod.domain_radius) * mod.arg_scale
    out = _base(mod, np.atleast_1d(t))
    if np.ndim(r) == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@dataclass(frozen=True)
class DiniVerdict:
    is_dini: bool
    integral_value: float
    lower_bound_witness: float
    method: str

    def to_dict(self):
        return {
            "is_dini": self.is_dini,
            "integral_value": self.integral_value,
            "lower_bound_witness": self.lower_bound_witness,
            "method": self.method,
        }


def _dini(value):
    return DiniVerdict(True, float(value), math.nan, "analytic")


def _non_dini():
    # closed form diverges; the exact value of the integral is the witness
    return DiniVerdict(False, math.nan, math.inf, "analytic")


def dini_integral(mod, r0=1.0, tol=1e-6):
    """Compute or classify the Dini integral of ``mod`` over ``(0, r0]``.

    Analytic families use closed forms; tabulated moduli use adaptive Simpson
    quadrature on dyadic panels in the variable ``log r``.
    """
    if not (0 < r0 <= mod.domain_radius * (1 + 1e-12)):
        raise ValueError(f"r0 must lie in (0, {mod.domain_radius}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    big_r = min(r0, mod.domain_radius) * mod.arg_scale
    fam = mod.family
    if fam == "zero":
        return _dini(0.0)
    if fam == "constant":
        return _dini(0.0) if mod.k == 0 else _non_dini()
    if fam == "power":
        return _dini(mod.c * big_r**mod.alpha / mod.alpha)
    if fam == "log_inverse":
        if mod.c == 0:
            return _dini(0.0)
        if mod.p <= 1:
            return _non_dini()
        return _dini(mod.c / ((mod.p - 1) * math.log(math.e / big_r) ** (mod.p - 1)))
    return _quadrature(mod, big_r, tol)


def _simpson_panel(fn, a, b, tol):
    """Adaptive Simpson for ``fn`` on ``[a, b]`` to absolute tolerance ``tol``."""
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = (m - a) / 6.0 * (fa + 4 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4 * frm + fb)
        if depth >= 40 or abs(left + right - whole) <= 15 * eps:
            total += left + right + (left + right - whole) / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, eps / 2, depth + 1))
            stack.append((m, b, fm, frm, fb, right, eps / 2, depth + 1))
    return total


def _quadrature(mod, big_r, tol):
    r = np.asarray(mod.knots_r)
    w = np.asarray(mod.knots_w)
    r_pos = r[r > 0]
    w_pos = w[r > 0]
    r_min = float(r_pos[0])
    w_min = float(w_pos[0])

    def integrand(s):
        # w(r)/r dr == w(e^s) ds
        return float(np.interp(math.exp(s), r_pos, w_pos))

    total = 0.0
    hi = big_r
    for k in range(MAX_PANELS):
        lo = max(hi / 2.0, r_min)
        if hi > lo:
            panel_tol = max(tol * 2.0 ** -(k + 2), 1e-16)
            total += _simpson_panel(integrand, math.log(lo), math.log(hi), panel_tol)
        if total > DIVERGENCE_THRESHOLD and k <= DYADIC_FLOOR_EXPONENT:
            return DiniVerdict(False, math.nan, total, "quadrature")
        if lo <= r_min:
            break
        hi = lo
    # below the first knot w is linear through 0, so w(r)/r is constant
    tail = w_min if big_r > r_min else float(np.interp(big_r, r_pos, w_pos))
    if tail > tol * max(1.0, total):
        raise InconclusiveQuadratureError(
            f"tail bound {tail:.3g} above tolerance; knots stop at r={r_min:.3g}"
        )
    return DiniVerdict(True, total + tail, math.nan, "quadrature")


def rescale_to_small(mod, c0):
    """Find the largest dyadic ``r1`` with ``w(r1) <= c0`` and Dini integral ``<= c0``.

    Returns ``(r1, w_rescaled)`` where ``w_rescaled(s) = w(r1 * s)`` on ``[0, 1]``.
    """
    if not (0 < c0 <= 0.25):
        raise ValueError("c0 must lie in (0, 1/4]")
    verdict = dini_integral(mod, mod.domain_radius)
    if not verdict.is_dini:
        raise DiniClassificationError(f"{mod.family} modulus is not Dini")
    for m in range(0, 61):
        r1 = 2.0**-m
        if r1 > mod.domain_radius:
            continue
        if eval_modulus(mod, r1) <= c0 and dini_integral(mod, r1).integral_value <= c0:
            return r1, mod.rescaled(r1)
    raise PrecisionError("no admissible dyadic radius above 2**-60")
