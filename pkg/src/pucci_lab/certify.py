"""Quantitative skeleton of the boundary-regularity iterations.

* the ``A_k`` recursion ``A_0 = c0``, ``A_k = max(w(eta^k), eta^alpha0 * A_{k-1})``
  and its summability bound ``sum A_k <= 3 c0``;
* the smallness conditions on ``(c0, eta, alpha0)`` and the named-constant
  inequalities used by the iteration arguments;
* the growth/decay products ``a_k = a0 * prod_{i<=k} (1 +- c0 w(eta^i))``.

Sums use :func:`math.fsum` so that the ``3 c0`` verdict is never a rounding
artifact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dini import dini_integral, eval_modulus
from .errors import PucciLabError

DEFAULT_K = 200
TREND_FRACTION = 0.1


@dataclass(frozen=True)
class IterationParams:
    c0: float
    eta: float
    alpha0: float
    K: int = DEFAULT_K

    def __post_init__(self):
        if not (0 < self.c0 <= 0.25):
            raise ValueError("c0 must lie in (0, 1/4]")
        if not (0 < self.eta < 1):
            raise ValueError("eta must lie in (0, 1)")
        if not (0 < self.alpha0 < 1):
            raise ValueError("alpha0 must lie in (0, 1)")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")

    @property
    def ratio(self):
        """Geometric ratio ``eta ** alpha0``."""
        return self.eta**self.alpha0

    def to_dict(self):
        return {"c0": self.c0, "eta": self.eta, "alpha0": self.alpha0, "K": int(self.K)}


@dataclass(frozen=True)
class Condition:
    name: str
    holds: bool
    value: float
    threshold: float
    slack: float  # >= 0 exactly when the inequality holds

    def to_dict(self):
        return {"holds": self.holds, "value": self.value, "threshold": self.threshold,
                "slack": self.slack}


def _geq(name, value, threshold):
    return Condition(name, bool(value >= threshold), value, threshold, value - threshold)


def _leq(name, value, threshold):
    return Condition(name, bool(value <= threshold), value, threshold, threshold - value)


def check_conditions(p, C_hat=None, C_bar=None, a_tilde=None):
    """Evaluate the named inequalities for ``p`` and optional placeholder constants.

    ``smallness``  ``(1 - eta^alpha0)(1 - eta) >= 1/2``
    ``C_hat_c0``   ``C_hat * c0 >= 1``
    ``C_bar_c0``   ``3 c0 C_bar <= a_tilde / 2``
    """
    out = {"smallness": _geq("smallness", (1.0 - p.ratio) * (1.0 - p.eta), 0.5)}
    if C_hat is not None:
        out["C_hat_c0"] = _geq("C_hat_c0", C_hat * p.c0, 1.0)
    if C_bar is not None and a_tilde is not None:
        out["C_bar_c0"] = _leq("C_bar_c0", 3.0 * p.c0 * C_bar, a_tilde / 2.0)
    return out


@dataclass(frozen=True)
class GrowthSequence:
    sign: int
    c0: float
    eta: float
    a0: float
    a: np.ndarray  # a_0..a_K
    strictly_monotone: bool
    diverging: bool  # + sign: partial products keep growing at a non-summable rate
    vanishing: bool  # - sign: partial products keep shrinking at a non-summable rate

    def ratio(self, k1, k2):
        """``a_{k2} / a_{k1}``."""
        return float(self.a[k2] / self.a[k1])


def growth_product(mod, c0, eta, K, sign=1, a0=1.0):
    """``a_k = a0 * prod_{i=1}^{k} (1 + sign * c0 * w(eta^i))`` for ``k = 0..K``.

    The trend flags compare the log-increments accumulated over the second
    half of the horizon with those of the first half: for a Dini modulus the
    late increments are negligible, for a non-Dini one they stay comparable.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not (0 < eta < 1) or c0 <= 0 or K < 2:
        raise ValueError("need c0 > 0, 0 < eta < 1 and K >= 2")
    w = np.array([float(eval_modulus(mod, eta**i)) for i in range(1, K + 1)])
    factors = 1.0 + sign * c0 * w
    if sign < 0 and not (factors[0] > 0):
        raise ValueError("need c0 * w(eta) < 1 for the decaying product")
    a = np.empty(K + 1)
    a[0] = a0
    for k in range(1, K + 1):
        a[k] = a[k - 1] * factors[k - 1]
    logs = np.log(factors)
    half = K // 2
    early = abs(math.fsum(logs[:half]))
    late = abs(math.fsum(logs[half:]))
    trending = early > 0 and late >= TREND_FRACTION * early
    d = np.diff(a)
    monotone = bool(np.all(d > 0)) if sign > 0 else bool(np.all(d < 0))
    a.setflags(write=False)
    return GrowthSequence(sign, c0, eta, a0, a, monotone, trending and sign > 0,
                          trending and sign < 0)


@dataclass(frozen=True)
class CertificationReport:
    params: IterationParams
    modulus: dict
    A: np.ndarray
    partial_sum: float
    bound_3c0_ok: bool
    tail_geometric: float  # c0 * q^K / (1 - q), q = eta^alpha0
    tail_bound: float  # rigorous bound on sum_{k>K} A_k
    a_plus: np.ndarray
    a_minus: np.ndarray
    conditions: dict
    preconditions_ok: bool
    notes: list = field(default_factory=list)

    @property
    def bound_asserted(self):
        """The ``3 c0`` bound is a claim only when every precondition holds."""
        return self.preconditions_ok and self.conditions["smallness"].holds

    @property
    def omega_tilde(self):
        return self.a_plus

    def to_dict(self):
        def clean(x):
            x = float(x)
            return None if not math.isfinite(x) else x

        return {
            "params": self.params.to_dict(),
            "modulus": self.modulus,
            "A": [clean(v) for v in self.A],
            "partial_sum": clean(self.partial_sum),
            "bound_3c0": clean(3.0 * self.params.c0),
            "bound_3c0_ok": self.bound_3c0_ok,
            "bound_asserted": self.bound_asserted,
            "tail_geometric": clean(self.tail_geometric),
            "tail_bound": clean(self.tail_bound),
            "a_plus": [clean(v) for v in self.a_plus],
            "a_minus": [clean(v) for v in self.a_minus],
            "conditions": {k: c.to_dict() for k, c in self.conditions.items()},
            "preconditions_ok": self.preconditions_ok,
            "notes": list(self.notes),
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "A_k", "a_k_plus", "a_k_minus"])
            for k in range(len(self.A)):
                w.writerow([k, f"{self.A[k]:.17g}", f"{self.a_plus[k]:.17g}",
                            f"{self.a_minus[k]:.17g}"])


def ak_sequence(mod, p, C_hat=None, C_bar=None, a_tilde=None):
    """Run the ``A_k`` recursion for a (rescaled) modulus.

    Violated preconditions (``w(1) > c0``, Dini integral ``> c0``, smallness)
    are recorded in ``conditions`` instead of raising.
    """
    K = int(p.K)
    q = p.ratio
    notes = []
    A = np.empty(K + 1)
    A[0] = p.c0
    for k in range(1, K + 1):
        A[k] = max(float(eval_modulus(mod, p.eta**k)), q * A[k - 1])
    partial = math.fsum(A)

    conditions = check_conditions(p, C_hat, C_bar, a_tilde)
    w1 = float(eval_modulus(mod, min(1.0, mod.domain_radius)))
    conditions["omega_at_1"] = _leq("omega_at_1", w1, p.c0)
    try:
        integral = dini_integral(mod, min(1.0, mod.domain_radius)).integral_value
    except PucciLabError as exc:
        integral = math.nan
        notes.append(f"dini integral unavailable: {exc}")
    conditions["dini_small"] = _leq("dini_small", integral, p.c0)
    pre_ok = conditions["omega_at_1"].holds and conditions["dini_small"].holds

    # sum_{k>K} A_k <= A_K q/(1-q) + (1/(1-q)) sum_{j>K} w(eta^j), and the
    # latter sum is at most int_0^{eta^K} w(r)/r dr / ln(1/eta) for monotone w
    tail_geo = p.c0 * q**K / (1.0 - q)
    try:
        late = dini_integral(mod, p.eta**K).integral_value
    except (PucciLabError, ValueError) as exc:
        late = math.nan
        notes.append(f"tail integral unavailable: {exc}")
    tail = A[K] * q / (1.0 - q) + late / ((1.0 - q) * math.log(1.0 / p.eta))

    try:
        a_plus = growth_product(mod, p.c0, p.eta, K, 1).a
    except ValueError as exc:
        a_plus = np.full(K + 1, np.nan)
        notes.append(f"growth product unavailable: {exc}")
    try:
        a_minus = growth_product(mod, p.c0, p.eta, K, -1).a
    except ValueError as exc:
        a_minus = np.full(K + 1, np.nan)
        notes.append(f"decay product unavailable: {exc}")

    A.setflags(write=False)
    return CertificationReport(
        params=p, modulus=mod.to_dict(), A=A, partial_sum=partial,
        bound_3c0_ok=bool(partial <= 3.0 * p.c0), tail_geometric=tail_geo, tail_bound=tail,
        a_plus=a_plus, a_minus=a_minus, conditions=conditions, preconditions_ok=pre_ok,
        notes=notes,
    )
