"""Pucci extremal operators on symmetric 2x2 matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EllipticityPair:
    lam: float
    Lam: float

    def __post_init__(self):
        if not (0 < self.lam <= self.Lam):
            raise ValueError(f"need 0 < lambda <= Lambda, got ({self.lam}, {self.Lam})")

    def to_dict(self):
        return {"lambda": self.lam, "Lambda": self.Lam}


@dataclass(frozen=True)
class Sym2:
    a11: float
    a12: float
    a22: float

    @classmethod
    def from_array(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    @classmethod
    def diag(cls, d1, d2):
        return cls(float(d1), 0.0, float(d2))

    def to_array(self):
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @property
    def trace(self):
        return self.a11 + self.a22

    def norm(self):
        """Spectral norm."""
        e1, e2 = eigenvalues(self)
        return max(abs(e1), abs(e2))

    def __neg__(self):
        return Sym2(-self.a11, -self.a12, -self.a22)

    def __add__(self, other):
        return Sym2(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, t):
        return Sym2(t * self.a11, t * self.a12, t * self.a22)

    __rmul__ = __mul__


def eigenvalues(m):
    """Closed-form eigenvalues of a symmetric 2x2 matrix, ascending."""
    mean = 0.5 * (m.a11 + m.a22)
    rad = math.hypot(0.5 * (m.a11 - m.a22), m.a12)
    return mean - rad, mean + rad


def _pos(s):
    return s if s > 0 else 0.0


def _neg(s):
    return -s if s < 0 else 0.0


def pucci_plus(m, ell):
    """M+(m) = Lambda * sum(e_i^+) - lambda * sum(e_i^-)."""
    e1, e2 = eigenvalues(m)
    return ell.Lam * (_pos(e1) + _pos(e2)) - ell.lam * (_neg(e1) + _neg(e2))


def pucci_minus(m, ell):
    """M-(m) = lambda * sum(e_i^+) - Lambda * sum(e_i^-)."""
    e1, e2 = eigenvalues(m)
    return ell.lam * (_pos(e1) + _pos(e2)) - ell.Lam * (_neg(e1) + _neg(e2))


def pucci_arrays(a11, a12, a22, ell, sign=1):
    """Vectorised M+ (``sign=1``) or M- (``sign=-1``) over component arrays."""
    a11, a12, a22 = (np.asarray(x, dtype=float) for x in (a11, a12, a22))
    mean = 0.5 * (a11 + a22)
    rad = np.hypot(0.5 * (a11 - a22), a12)
    e = np.stack([mean - rad, mean + rad])
    pos = np.maximum(e, 0.0).sum(axis=0)
    neg = np.maximum(-e, 0.0).sum(axis=0)
    if sign > 0:
        return ell.Lam * pos - ell.lam * neg
    return ell.lam * pos - ell.Lam * neg


def pucci_bruteforce(m, ell, n_samples=10_000, n_ab=10):
    """Sup and inf of ``trace(A m)`` over a grid of admissible ``A``.

    ``A = R^T diag(a, b) R`` with ``a, b`` on an ``n_ab``-point grid of
    ``[lambda, Lambda]`` (endpoints included) and ``n_samples // n_ab**2``
    rotation angles evenly spaced in ``[0, pi)``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    n_rot = max(1, n_samples // (n_ab * n_ab))
    theta = np.arange(n_rot) * (math.pi / n_rot)
    # quadratic forms of m along the rotated frame, in double-angle form so
    # that isotropic m gives exact values
    mean, dev = 0.5 * (m.a11 + m.a22), 0.5 * (m.a11 - m.a22)
    rot = dev * np.cos(2 * theta) + m.a12 * np.sin(2 * theta)
    quu, qvv = mean + rot, mean - rot
    ab = np.linspace(ell.lam, ell.Lam, n_ab)
    vals = ab[None, :, None] * quu[:, None, None] + ab[None, None, :] * qvv[:, None, None]
    return float(vals.max()), float(vals.min())
