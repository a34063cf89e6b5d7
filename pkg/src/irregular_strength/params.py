"""Derived constants of the three-step construction, with an override mode."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .errors import InvalidParameters

PAPER = "paper-faithful"
OVERRIDDEN = "overridden"
OVERRIDABLE = ("s_star", "k_prime", "k", "a_prime", "t_b", "t_g")


def safe_ceil(x: float) -> int:
    """Ceiling that snaps values within 1e-9 relative of an integer."""
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


def cdiv(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Parameters:
    epsilon: float
    alpha: float
    n: int
    delta: int
    s_star: int
    k_prime: int
    k: int
    a_prime: int
    t_b: int
    t_g: int
    mode: str = PAPER
    overrides: dict = field(default_factory=dict)

    @property
    def n_over_delta(self) -> int:
        """ceil(n / delta)"""
        return cdiv(self.n, self.delta)

    @property
    def width(self) -> int:
        """Length of each expected-weight interval I_h."""
        return self.n_over_delta + self.a_prime - 1

    @property
    def big_weight(self) -> int:
        return self.n_over_delta + self.a_prime

    def cross_base(self) -> int:
        """ceil(ceil(n/delta) / (3k')), the unit of the B-S edge weights."""
        return cdiv(self.n_over_delta, 3 * self.k_prime)

    def cross_weight(self, j: int) -> int:
        return self.cross_base() * (j + self.k_prime)

    def diagnostics(self) -> dict:
        flags = {
            "k_prime_degenerate": self.k_prime == 1,
            "k_small": self.k <= 50,
            "t_b_exceeds_n": self.t_b > self.n,
            "s_star_not_below_delta": self.s_star >= self.delta,
        }
        flags["degenerate"] = any(flags.values())
        return flags

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Parameters":
        data = json.loads(text)
        p = cls(**data)
        validate(p)
        return p


def _check_eps_alpha(epsilon, alpha):
    if not (0 < epsilon < 0.25):
        raise InvalidParameters(f"epsilon={epsilon} must lie in (0, 0.25)")
    if not (0 < alpha < epsilon):
        raise InvalidParameters(f"alpha={alpha} must lie in (0, epsilon)")
    if not (2 * epsilon + alpha < 0.5):
        raise InvalidParameters("need 2*epsilon + alpha < 0.5")


def derive_params(n: int, delta: int, epsilon: float = 0.2, alpha: float = 0.05,
                  overrides: Optional[dict] = None) -> Parameters:
    """Compute every constant from (n, delta, epsilon, alpha).

    With `overrides`, listed fields replace the derived values and the
    fields computed from them are re-derived from the replacements.
    """
    if n < 1 or delta < 1:
        raise InvalidParameters("need n >= 1 and delta >= 1")
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(OVERRIDABLE)
    if unknown:
        raise InvalidParameters(f"unknown override fields {sorted(unknown)}")
    if not overrides:
        _check_eps_alpha(epsilon, alpha)
    elif not (epsilon > 0 and alpha > 0):
        raise InvalidParameters("epsilon and alpha must be positive")

    def pick(name, fn):
        return int(overrides[name]) if name in overrides else fn()

    s_star = pick("s_star", lambda: safe_ceil(delta ** (0.5 + epsilon + alpha)))
    k_prime = pick("k_prime", lambda: min(cdiv(n, 400 * delta), safe_ceil(delta ** epsilon / 2000)))
    k = pick("k", lambda: cdiv(k_prime, 1000))
    if k < 1:
        raise InvalidParameters("k must be >= 1")
    a_prime = pick("a_prime", lambda: cdiv(7 * n, delta * k))
    t_b = pick("t_b", lambda: max(1, safe_ceil(48 * n * math.exp(-delta ** (2 * alpha) / 4) / s_star)))
    t_g = pick("t_g", lambda: 2 * safe_ceil(16 * n / (delta * k_prime) / t_b) * t_b)
    p = Parameters(epsilon=float(epsilon), alpha=float(alpha), n=int(n), delta=int(delta),
                   s_star=s_star, k_prime=k_prime, k=k, a_prime=a_prime, t_b=t_b, t_g=t_g,
                   mode=OVERRIDDEN if overrides else PAPER, overrides=overrides)
    validate(p)
    return p


def validate(p: Parameters):
    if p.mode == PAPER:
        _check_eps_alpha(p.epsilon, p.alpha)
    elif p.mode != OVERRIDDEN:
        raise InvalidParameters(f"unknown mode {p.mode!r}")
    if p.k < 1:
        raise InvalidParameters("k must be >= 1")
    if p.t_b < 1 or p.t_g < 1 or p.t_g % (2 * p.t_b):
        raise InvalidParameters(f"need 2*t_b | t_g with both positive (t_b={p.t_b}, t_g={p.t_g})")
    if p.s_star < 1 or p.k_prime < 1 or p.a_prime < 0:
        raise InvalidParameters("s_star, k_prime must be >= 1 and a_prime >= 0")
    if p.mode == OVERRIDDEN:
        if p.s_star >= p.delta:
            raise InvalidParameters(f"s_star={p.s_star} must be below delta={p.delta}")
        if p.k_prime > p.s_star:
            raise InvalidParameters("k_prime may not exceed s_star")

