"""Interaction decay profiles.

A profile is the normalized envelope ``jbar(r)`` of coupling strength versus
distance: monotonically non-increasing, ``jbar(0) = 1``.  Four families are
supported: finite range, power law, stretched exponential and exponential.
The profile is evaluated on real arguments as well (half-integer distances
appear in the locality bounds); the power law is held at 1 on [0, 1] so the
normalization and monotonicity survive interpolation.

The tail-sum condition

    sum_{x >= l} x^z * jbar(x)  <=  gamma * l^(z+1) * jbar(l),  z in {0, 1}

is what the locality machinery needs from a profile.  ``verify_decay_condition``
checks it numerically with analytic tails, and ``measure_gamma`` returns the
smallest gamma that works on a finite chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, special

from .errors import NonConvergentTail

PROFILE_KINDS = ("finite_range", "power_law", "stretched_exp", "exponential")


@dataclass(frozen=True)
class DecayProfile:
    """Normalized coupling-decay envelope with its measured constants.

    Parameters
    ----------
    kind : one of PROFILE_KINDS
    range_cutoff : interaction length for ``finite_range`` (sites)
    alpha : power-law exponent
    kappa, stretch_c : stretched-exponential shape, jbar(x) = exp(-c x^kappa)
    rate : exponential decay rate per site
    g : one-site coupling scale, filled in by the chain builder
    gamma : tail-sum constant, filled in by ``measure_gamma``
    """

    kind: str
    range_cutoff: int | None = None
    alpha: float | None = None
    kappa: float | None = None
    stretch_c: float | None = None
    rate: float | None = None
    g: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        needed = {
            "finite_range": ("range_cutoff",),
            "power_law": ("alpha",),
            "stretched_exp": ("kappa", "stretch_c"),
            "exponential": ("rate",),
        }[self.kind]
        for name in needed:
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind} profile needs {name}")

    def __call__(self, x):
        """jbar evaluated elementwise on real x >= 0."""
        x = np.asarray(x, dtype=float)
        if self.kind == "finite_range":
            out = np.where(x <= self.range_cutoff, 1.0, 0.0)
        elif self.kind == "power_law":
            out = np.maximum(x, 1.0) ** (-self.alpha)
        elif self.kind == "stretched_exp":
            out = np.exp(-self.stretch_c * x**self.kappa)
        else:
            out = np.exp(-self.rate * x)
        return float(out) if out.ndim == 0 else out

    @property
    def is_finite_range(self):
        return self.kind == "finite_range"

    def with_constants(self, g=None, gamma=None):
        """Copy with measured constants attached."""
        kw = {}
        if g is not None:
            kw["g"] = float(g)
        if gamma is not None:
            kw["gamma"] = float(gamma)
        return replace(self, **kw)


def finite_range(d_h: int) -> DecayProfile:
    return DecayProfile("finite_range", range_cutoff=int(d_h))


def power_law(alpha: float) -> DecayProfile:
    return DecayProfile("power_law", alpha=float(alpha))


def stretched_exp(kappa: float, c: float) -> DecayProfile:
    return DecayProfile("stretched_exp", kappa=float(kappa), stretch_c=float(c))


def exponential(rate: float) -> DecayProfile:
    return DecayProfile("exponential", rate=float(rate))


def tail_sum(profile: DecayProfile, ell: int, z: int) -> float:
    """sum over integer x >= ell of x^z * jbar(x), via analytic tails.

    Raises NonConvergentTail when the sum diverges (power law with
    alpha <= z + 1).
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if z not in (0, 1):
        raise ValueError("z must be 0 or 1")

    if profile.kind == "finite_range":
        hi = profile.range_cutoff
        if ell > hi:
            return 0.0
        xs = np.arange(ell, hi + 1, dtype=float)
        return float(np.sum(xs**z))

    if profile.kind == "power_law":
        s = profile.alpha - z
        if s <= 1.0:
            raise NonConvergentTail(
                f"power-law tail sum diverges for alpha={profile.alpha}, z={z}"
            )
        # Hurwitz zeta gives the exact tail.
        return float(special.zeta(s, ell))

    if profile.kind == "exponential":
        q = math.exp(-profile.rate)
        if z == 0:
            return q**ell / (1.0 - q)
        return q**ell * (ell * (1.0 - q) + q) / (1.0 - q) ** 2

    # stretched exponential: partial sum plus an integral majorant of the
    # remainder, started past the maximum of t^z exp(-c t^kappa)
    c, kappa = profile.stretch_c, profile.kappa
    peak = (z / (c * kappa)) ** (1.0 / kappa) if z > 0 else 0.0
    total = 0.0
    x = ell
    while True:
        term = x**z * math.exp(-c * x**kappa)
        total += term
        if x > peak and term < 1e-18 * (total + 1e-300):
            break
        if x > ell + 2_000_000:
            raise NonConvergentTail("stretched-exponential tail failed to settle")
        x += 1
    rem, _ = integrate.quad(
        lambda t: t**z * math.exp(-c * t**kappa), x, np.inf, limit=200
    )
    return total + rem


@dataclass(frozen=True)
class DecayConditionReport:
    worst_ratio: float
    passed: bool
    z: int
    gamma: float
    ell_max: int


def verify_decay_condition(
    profile: DecayProfile, gamma: float, z: int, ell_max: int
) -> DecayConditionReport:
    """Check the tail-sum condition for one moment z on ell in [1, ell_max].

    worst_ratio is the largest value of tail / (l^(z+1) jbar(l)); the check
    passes iff worst_ratio <= gamma.  Points where jbar(l) = 0 are vacuous
    (the tail is then 0 as well) and do not contribute.
    """
    if ell_max < 1:
        raise ValueError("ell_max must be >= 1")
    worst = 0.0
    for ell in range(1, ell_max + 1):
        j = profile(ell)
        if j == 0.0:
            continue
        ratio = tail_sum(profile, ell, z) / (ell ** (z + 1) * j)
        worst = max(worst, ratio)
    return DecayConditionReport(
        worst_ratio=worst, passed=worst <= gamma, z=z, gamma=gamma, ell_max=ell_max
    )


def measure_gamma(profile: DecayProfile, ell_max: int) -> float:
    """Smallest tail-sum constant valid for both moments up to ell_max."""
    worst = 0.0
    for z in (0, 1):
        worst = max(worst, verify_decay_condition(profile, np.inf, z, ell_max).worst_ratio)
    return worst
