"""Distance to the scaled Cantor set K_inf = union of 3^n K, via triadic digits.

Rational inputs (int or Fraction) go through an exact expansion with cycle
detection; floats use a vectorized expansion capped at FLOAT_DIGITS digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

FLOAT_DIGITS = 40


@dataclass(frozen=True)
class TriadicCode:
    """Greedy base-3 code of a nonnegative rational.

    ``digits`` maps exponents to digits for the non-repeating part; when the
    expansion repeats, ``period`` holds the repeating block starting at
    exponent ``period_start`` (going downwards).
    """

    digits: dict[int, int]
    period: tuple[int, ...] = ()
    period_start: int | None = None

    def digit(self, n: int) -> int:
        if n in self.digits:
            return self.digits[n]
        if self.period and self.period_start is not None and n <= self.period_start:
            return self.period[(self.period_start - n) % len(self.period)]
        return 0

    @property
    def top(self) -> int | None:
        nz = [n for n, d in self.digits.items() if d]
        if nz:
            return max(nz)
        if any(self.period):
            return self.period_start
        return None

    @property
    def k(self) -> int | None:
        """Highest exponent carrying the digit 1, or None."""
        ones = [n for n, d in self.digits.items() if d == 1]
        if ones:
            return max(ones)
        if 1 in self.period:
            return self.period_start - self.period.index(1)
        return None

    @property
    def in_k_tilde(self) -> bool:
        return self.k is None

    @property
    def eventually_zero(self) -> bool:
        return not any(self.period)

    @property
    def eventually_two(self) -> bool:
        return bool(self.period) and all(d == 2 for d in self.period)


def triadic_code(x: Rational | int) -> TriadicCode:
    x = Fraction(x)
    if x < 0:
        raise ValueError("triadic codes are defined for x >= 0")
    digits: dict[int, int] = {}
    ip, frac = divmod(x.numerator, x.denominator)
    n = 0
    while ip:
        ip, d = divmod(ip, 3)
        if d:
            digits[n] = d
        n += 1
    a, b = frac, x.denominator
    seen: dict[int, int] = {}
    n = -1
    while a:
        if a in seen:
            start = seen[a]
            block = tuple(digits.pop(m, 0) for m in range(start, n, -1))
            return TriadicCode(digits, block, start)
        seen[a] = n
        d, a = divmod(3 * a, b)
        digits[n] = d
        n -= 1
    return TriadicCode({m: d for m, d in digits.items() if d})


def _prefix_above(code: TriadicCode, k: int) -> Fraction:
    total = Fraction(0)
    for n in range(code.top, k, -1):
        d = code.digit(n)
        if d:
            total += d * Fraction(3) ** n
    return total


def _exact_bracket(x: Fraction) -> tuple[Fraction, Fraction] | None:
    code = triadic_code(x)
    k = code.k
    if k is None:
        return None
    base = _prefix_above(code, k)
    return base + Fraction(3) ** k, base + 2 * Fraction(3) ** k


def cantor_distance_exact(x: Rational | int) -> Fraction:
    x = Fraction(x)
    if x < 0:
        return -x
    br = _exact_bracket(x)
    if br is None:
        return Fraction(0)
    lo, hi = br
    return min(x - lo, hi - x)


def cantor_distance_array(x) -> np.ndarray:
    """Vectorized float distance to K_inf; negative inputs give -x."""
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0, -x, 0.0)
    pos = (x > 0) & np.isfinite(x)
    if not pos.any():
        return out
    xp = x[pos]
    top = np.floor(np.log(xp) / math.log(3.0)).astype(int) + 1
    y = xp / np.power(3.0, top)
    # guard the log rounding so that y lands in [1/3, 1)
    hi = y >= 1.0
    top[hi] += 1
    y[hi] /= 3.0
    dist = np.zeros_like(xp)
    done = np.zeros(xp.shape, dtype=bool)
    for step in range(1, FLOAT_DIGITS + 1):
        y = y * 3.0
        d = np.minimum(np.floor(y), 2.0)
        hit = (d == 1.0) & ~done
        if hit.any():
            w = np.power(3.0, (top - step)[hit])
            dist[hit] = w * np.minimum(y[hit] - 1.0, 2.0 - y[hit])
            done |= hit
        if done.all():
            break
        y = y - d
    out[pos] = dist
    return out


def cantor_distance(x):
    """Distance from x to K_inf. Exact for int and Fraction inputs."""
    if isinstance(x, Rational) and not isinstance(x, bool):
        return cantor_distance_exact(x)
    if np.ndim(x) == 0:
        return float(cantor_distance_array(np.array([x]))[0])
    return cantor_distance_array(x)


@dataclass
class CantorLocation:
    x: float | Fraction
    distance: float | Fraction
    in_kinf: bool
    in_kplus: bool
    in_kminus: bool
    bracket: tuple | None = None

    def to_dict(self) -> dict:
        def num(v):
            return float(v) if v is not None else None

        return {
            "x": num(self.x),
            "distance": num(self.distance),
            "in_Kinf": self.in_kinf,
            "in_Kplus": self.in_kplus,
            "in_Kminus": self.in_kminus,
            "bracket": [num(v) for v in self.bracket] if self.bracket else None,
        }


def _as_fraction(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    xf = float(x)
    # recover short rationals such as 1/3 from their float image
    guess = Fraction(xf).limit_denominator(10**6)
    if float(guess) == xf:
        return guess
    return Fraction(xf)


def cantor_locate(x) -> CantorLocation:
    """Membership of x in K_inf and its one-sided gap sets.

    Floats are first snapped to the shortest rational with the same double
    image (denominator up to 1e6), so 1/3 and 2/3 classify as expected.
    """
    q = _as_fraction(x)
    if q < 0:
        return CantorLocation(q, -q, False, False, False, (None, Fraction(0)))
    code = triadic_code(q)
    k = code.k
    if k is None:
        finite = code.eventually_zero
        return CantorLocation(q, Fraction(0), True, finite, False, None)
    lo, hi = _exact_bracket(q)
    if q == lo:
        # a 1 followed by zeros only: left end of a gap
        return CantorLocation(q, Fraction(0), True, False, True, None)
    return CantorLocation(q, min(q - lo, hi - q), False, False, False, (lo, hi))
