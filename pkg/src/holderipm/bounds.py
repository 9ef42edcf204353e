"""Closed-form entropy, chaining and finite-sample bounds.

All outputs are "up to the entropy constant": ``K`` is never known and
defaults to 1, and ``lam`` (volume of the unit blow-up of the domain)
defaults to ``3**d``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum


class BoundMode(str, Enum):
    PAPER_DISPLAY = "paper-display"
    COMPOSED = "composed"

    @classmethod
    def parse(cls, value) -> "BoundMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"paper": cls.PAPER_DISPLAY, "display": cls.PAPER_DISPLAY}
        if key in aliases:
            return aliases[key]
        return cls(key)


class NegativeBoundWarning(UserWarning):
    """The displayed finite-sample formula went negative (tiny n)."""


@dataclass(frozen=True)
class BoundParams:
    alpha: float
    d: int
    L: float = 1.0
    K: float = 1.0
    lam: float | None = field(default=None)

    def __post_init__(self):
        if self.lam is None:
            object.__setattr__(self, "lam", 3.0 ** self.d)
        for name in ("alpha", "L", "K", "lam"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")

    @property
    def gamma(self) -> float:
        """Entropy growth exponent d / alpha."""
        return self.d / self.alpha


@dataclass(frozen=True)
class ExtensionSpec:
    A: float
    p: float

    def __post_init__(self):
        if not (self.A > 0 and self.p > 0):
            raise ValueError(f"A and p must be positive, got A={self.A!r}, p={self.p!r}")


def entropy_upper_bound(epsilon: float, params: BoundParams) -> float:
    """``K * lam * (eps / L) ** (-d / alpha)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return params.K * params.lam * (epsilon / params.L) ** (-params.gamma)


def dudley_diverges(params: BoundParams) -> bool:
    return params.gamma >= 2.0


def dudley_plain(params: BoundParams, subgauss_K: float = 1.0, C: float = 1.0) -> float:
    """Entropy integral ``C * K_sg * int_0^{2L} sqrt(H(eps)) d eps``.

    Returns ``math.inf`` when the integral diverges at zero (d/alpha >= 2).
    """
    if not (C > 0 and subgauss_K > 0):
        raise ValueError("C and subgauss_K must be positive")
    g = params.gamma
    if g >= 2.0:
        return math.inf
    half = g / 2.0
    upper = 2.0 * params.L
    integral = params.L**half * upper ** (1.0 - half) / (1.0 - half)
    return C * subgauss_K * math.sqrt(params.K * params.lam) * integral


@dataclass(frozen=True)
class LemmaOptimum:
    tau_star: float
    f_star: float


def improved_dudley_closed_form(a: float, beta: float) -> LemmaOptimum:
    """Minimiser and minimum of ``tau + a * int_tau^1 eps**(-beta) d eps`` on [0, 1]."""
    if not (a > 0 and beta > 0):
        raise ValueError(f"a and beta must be positive, got a={a!r}, beta={beta!r}")
    if a >= 1.0:
        return LemmaOptimum(1.0, 1.0)
    log_a = math.log(a)
    tau = math.exp(log_a / beta)
    if beta == 1.0:
        return LemmaOptimum(tau, a * (1.0 - log_a))
    # (1 - a**(1/beta - 1)) / (1 - beta), written to stay accurate as beta -> 1
    expo = (1.0 - beta) / beta
    ratio = -math.expm1(expo * log_a) / (1.0 - beta)
    return LemmaOptimum(tau, tau + a * ratio)


def dudley_refined_eval(a: float, beta: float) -> float:
    """``inf_tau {4 tau + 4 a int_tau^1 eps**(-beta) d eps}``."""
    return 4.0 * improved_dudley_closed_form(a, beta).f_star


@dataclass(frozen=True)
class FiniteSampleBound:
    value: float
    mode: BoundMode
    branch: str


def _display_branch(n: float, params: BoundParams) -> FiniteSampleBound:
    a, d = params.alpha, params.d
    kl = params.K * params.lam
    log_term = math.log(n / (9.0 * kl))
    if 2 * a < d:
        lead = (kl / n) ** (a / d)
        first = d / (d - 2 * a)
        second = 1.0 + 0.5 * log_term
        branch = "alpha<d/2"
    else:
        lead = (kl / n) ** 0.5
        first = math.inf if 2 * a == d else 2 * a / (2 * a - d)
        second = 1.0 + (a / d) * log_term
        branch = "alpha=d/2" if 2 * a == d else "alpha>d/2"
    value = 12.0 * lead * min(first, second) * params.L
    return FiniteSampleBound(value, BoundMode.PAPER_DISPLAY, branch)


def finite_sample_bound(n: float, params: BoundParams, mode: BoundMode | str = BoundMode.COMPOSED) -> FiniteSampleBound:
    """Upper bound on the expected Hölder IPM between ``P_n`` and ``P``.

    ``paper-display`` evaluates the two-branch displayed formula as written
    (with 1/0 = inf at alpha = d/2); it goes negative for very small ``n``
    and then warns. ``composed`` chains the symmetrisation factor 2 with
    the refined chaining bound and is valid for every ``n``.
    """
    if not n >= 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    mode = BoundMode.parse(mode)
    if mode is BoundMode.PAPER_DISPLAY:
        out = _display_branch(float(n), params)
        if out.value < 0:
            warnings.warn(f"displayed bound is negative at n={n}; use composed mode", NegativeBoundWarning,
                          stacklevel=2)
        return out
    a = 3.0 * math.sqrt(params.K * params.lam / n)
    beta = params.d / (2.0 * params.alpha)
    value = 2.0 * dudley_refined_eval(a, beta) * params.L
    return FiniteSampleBound(value, mode, "a>=1" if a >= 1 else "a<1")


def rate_exponent(alpha: float, d: int) -> tuple[float, bool]:
    """``(min(alpha/d, 1/2), alpha == d/2)``."""
    if not (alpha > 0 and d >= 1):
        raise ValueError("need alpha > 0 and d >= 1")
    return min(alpha / d, 0.5), 2 * alpha == d


def extension_rate(spec: ExtensionSpec) -> tuple[float, bool]:
    """Rate for a class whose entropy grows like ``A * eps**(-p)``."""
    return min(1.0 / spec.p, 0.5), spec.p == 2
