"""Two-tier decision procedure for "this expression vanishes identically".

Tier 1 (exact): expand to a cleared numerator polynomial; the expression is
zero iff the numerator is the zero polynomial.  Available whenever the tree
is rational (integer powers, no exp/log).

Tier 2 (probabilistic): evaluate at random rational sample points with
positive coordinates, mapped to high-precision floats.  Fractional powers
such as y^(4/3)/x^(2/3) defeat polynomial canonical forms, but real power
products are determined by their values on an open set, and Schwartz-Zippel
style sampling makes a false "zero" overwhelmingly unlikely.  Sample points
that land outside an expression's real domain (negative base under a
fractional power, a pole, log of a non-positive value) are redrawn.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .expr import EvalDomainError, Expr, eval_float, free_symbols
from .poly import expand_rational


class InconclusiveZeroTest(Exception):
    """Every sample point hit a singularity; no verdict."""


@dataclass(frozen=True)
class ZeroTestConfig:
    n_samples: int = 20
    precision_bits: int = 256
    threshold: float = 1e-30
    seed: int = 0
    max_point_retries: int = 80


DEFAULT_CONFIG = ZeroTestConfig()


@dataclass(frozen=True)
class ZeroVerdict:
    is_zero: bool
    tier: str  # "exact" | "probabilistic"
    n_samples: Optional[int] = None
    precision_bits: Optional[int] = None

    def __bool__(self):
        return self.is_zero


def _sample_point(rng: random.Random, names) -> dict:
    # random rationals in (0, 1); moderate denominators keep evaluation cheap
    point = {}
    for name in names:
        den = rng.randint(101, 997)
        num = rng.randint(1, den - 1)
        point[name] = Fraction(num, den)
    return point


def is_zero(
    e: Expr,
    config: ZeroTestConfig = DEFAULT_CONFIG,
    force_probabilistic: bool = False,
) -> ZeroVerdict:
    """Decide whether `e` is identically zero.

    Exact tier whenever the expression expands to a polynomial pair;
    otherwise sampling per `config`.  Raises InconclusiveZeroTest if no
    sample point lands in the expression's domain.
    """
    if not force_probabilistic:
        pair = expand_rational(e)
        if pair is not None:
            num, _den = pair
            return ZeroVerdict(is_zero=num.is_zero(), tier="exact")

    names = sorted(free_symbols(e))
    rng = random.Random(config.seed)
    threshold = mpmath.mpf(config.threshold)
    n_wanted = config.n_samples if names else 1
    successes = 0
    all_small = True
    for _ in range(n_wanted):
        value = None
        for _attempt in range(config.max_point_retries):
            point = _sample_point(rng, names)
            try:
                value = eval_float(e, point, config.precision_bits)
                break
            except (EvalDomainError, ZeroDivisionError):
                continue
        if value is None:
            continue
        successes += 1
        if abs(value) >= threshold:
            all_small = False
    if successes == 0:
        raise InconclusiveZeroTest(
            f"all {n_wanted} sample points hit singularities of the expression"
        )
    return ZeroVerdict(
        is_zero=all_small,
        tier="probabilistic",
        n_samples=successes,
        precision_bits=config.precision_bits,
    )


def all_zero(exprs, config: ZeroTestConfig = DEFAULT_CONFIG) -> bool:
    return all(is_zero(e, config).is_zero for e in exprs)
