"""Valued monoids, scalar schedules and contracting structures on normed spaces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


class MonoidError(ValueError):
    """Scalar does not belong to the monoid it is used with."""


class MonoidKind(str, enum.Enum):
    REALS = "reals"
    NONNEG_REALS = "rplus"
    UNIT_INTERVAL = "unit"
    NR = "nr"


class Variant(str, enum.Enum):
    CANONICAL = "canonical"
    STANDARD = "standard"


class _Infinity:
    """Absorbing element of the monoid N'_r (valuation 0)."""

    _instance: _Infinity | None = None

    def __new__(cls) -> _Infinity:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

Scalar = Union[float, int, _Infinity]

REAL_KINDS = (MonoidKind.REALS, MonoidKind.NONNEG_REALS, MonoidKind.UNIT_INTERVAL)


@dataclass(frozen=True)
class ValuedMonoid:
    kind: MonoidKind
    r: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MonoidKind(self.kind))
        if self.kind is MonoidKind.NR:
            if self.r is None or not (0.0 < self.r < 1.0):
                raise MonoidError(f"N'_r needs 0 < r < 1, got r={self.r!r}")
        elif self.r is not None:
            raise MonoidError(f"{self.kind.value} takes no ratio r")

    @classmethod
    def reals(cls) -> ValuedMonoid:
        return cls(MonoidKind.REALS)

    @classmethod
    def rplus(cls) -> ValuedMonoid:
        return cls(MonoidKind.NONNEG_REALS)

    @classmethod
    def unit(cls) -> ValuedMonoid:
        return cls(MonoidKind.UNIT_INTERVAL)

    @classmethod
    def nr(cls, r: float) -> ValuedMonoid:
        return cls(MonoidKind.NR, float(r))

    @property
    def is_real(self) -> bool:
        return self.kind in REAL_KINDS

    @property
    def label(self) -> str:
        if self.kind is MonoidKind.NR:
            return f"nr({ratio_label(self.r)})"
        return self.kind.value

    def check(self, t: Scalar) -> None:
        if self.kind is MonoidKind.NR:
            if t is INF:
                return
            if isinstance(t, (bool, np.bool_)) or not isinstance(t, (int, np.integer)) or t < 0:
                raise MonoidError(f"N'_r scalars are naturals or INF, got {t!r}")
            return
        if t is INF or isinstance(t, bool):
            raise MonoidError(f"{self.kind.value} scalars are reals, got {t!r}")
        t = float(t)
        if not math.isfinite(t):
            raise MonoidError(f"non-finite scalar {t!r}")
        if self.kind is MonoidKind.NONNEG_REALS and t < 0:
            raise MonoidError(f"rplus scalars are >= 0, got {t}")
        if self.kind is MonoidKind.UNIT_INTERVAL and not (0.0 <= t <= 1.0):
            raise MonoidError(f"unit-interval scalars lie in [0, 1], got {t}")

    @property
    def identity(self) -> Scalar:
        return 0 if self.kind is MonoidKind.NR else 1.0

    @property
    def absorbing(self) -> Scalar:
        return INF if self.kind is MonoidKind.NR else 0.0


def ratio_label(r: float | None) -> str:
    """Short stable text for the ratios that matter here."""
    if r is None:
        return "-"
    if math.isclose(r, math.exp(-2 * math.pi), rel_tol=1e-12):
        return "e^-2pi"
    if math.isclose(r, 1 / 3, rel_tol=1e-9):
        return "1/3"
    return repr(float(r))


def valuation(m: ValuedMonoid, t: Scalar) -> float:
    m.check(t)
    if m.kind is MonoidKind.NR:
        return 0.0 if t is INF else float(m.r) ** int(t)
    return abs(float(t))


def multiply(m: ValuedMonoid, t: Scalar, s: Scalar) -> Scalar:
    """Monoid product (addition of exponents for N'_r)."""
    m.check(t)
    m.check(s)
    if m.kind is MonoidKind.NR:
        if t is INF or s is INF:
            return INF
        return int(t) + int(s)
    return float(t) * float(s)


def scalar_schedule(m: ValuedMonoid, count: int, seed_ratio: float = 0.1) -> list[Scalar]:
    """Nonzero scalars with geometrically decreasing valuation.

    For N'_r this is exactly ``0, 1, ..., count - 1``; for the real kinds it
    is ``seed_ratio ** k``.
    """
    if count < 2:
        raise ValueError("count must be >= 2")
    if m.kind is MonoidKind.NR:
        return list(range(count))
    if not (0.0 < seed_ratio < 1.0):
        raise ValueError("seed_ratio must lie in (0, 1)")
    return [seed_ratio**k for k in range(count)]


def schedule_valuations(m: ValuedMonoid, count: int, seed_ratio: float = 0.1) -> np.ndarray:
    return np.array([valuation(m, t) for t in scalar_schedule(m, count, seed_ratio)])


def vector_norm(x: np.ndarray, p: float = 2, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if p == 1:
        return np.sum(np.abs(x), axis=axis)
    if p == 2:
        return np.sqrt(np.sum(x * x, axis=axis))
    if p == np.inf or p == "inf":
        return np.max(np.abs(x), axis=axis)
    raise ValueError(f"unsupported norm p={p!r}")


def parse_norm(p) -> float:
    if p in (np.inf, "inf", "Inf", "INF", float("inf")):
        return np.inf
    p = float(p)
    if p not in (1.0, 2.0):
        raise ValueError(f"norm must be 1, 2 or inf, got {p}")
    return p


@dataclass(frozen=True)
class ContractingSpace:
    """A pointed coordinate space with an external action ``t * x``."""

    dim: int
    base: np.ndarray = field(default=None)
    norm_p: float = 2
    variant: Variant = Variant.CANONICAL
    monoid: ValuedMonoid = field(default_factory=ValuedMonoid.rplus)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        base = np.zeros(self.dim) if self.base is None else np.asarray(self.base, dtype=float).reshape(-1)
        if base.shape != (self.dim,):
            raise ValueError(f"base has length {base.size}, expected {self.dim}")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "norm_p", parse_norm(self.norm_p))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is Variant.STANDARD and not self.monoid.is_real:
            raise MonoidError("the standard action needs a real monoid")

    def distance(self, x, y) -> np.ndarray:
        return vector_norm(np.asarray(x, float) - np.asarray(y, float), self.norm_p)

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"point has dimension {x.shape[-1]}, expected {self.dim}")
        return x

    def _factor(self, t: Scalar) -> float:
        if self.variant is Variant.STANDARD:
            self.monoid.check(t)
            return float(t)
        return valuation(self.monoid, t)

    def star(self, t: Scalar, x) -> np.ndarray:
        x = self._point(x)
        c = self._factor(t)
        if c == 0.0:
            return np.broadcast_to(self.base, x.shape).copy()
        if c == 1.0:
            return x.copy()
        return self.base + c * (x - self.base)

    def star_inv(self, t: Scalar, y) -> np.ndarray:
        y = self._point(y)
        c = self._factor(t)
        if c == 0.0:
            raise MonoidError("the absorbing scalar has no inverse action")
        if c == 1.0:
            return y.copy()
        return self.base + (y - self.base) / c


def star(s: ContractingSpace, t: Scalar, x) -> np.ndarray:
    return s.star(t, x)


def star_inv(s: ContractingSpace, t: Scalar, y) -> np.ndarray:
    return s.star_inv(t, y)


def sample_scalars(m: ValuedMonoid, rng: np.random.Generator, count: int = 12) -> list[Scalar]:
    """Scalars spread over the monoid, absorbing element first."""
    if m.kind is MonoidKind.NR:
        ns = sorted(set(int(n) for n in rng.integers(0, 12, size=count)) | {0, 1, 2})
        return [INF, *ns]
    out: list[Scalar] = [0.0, 1.0]
    if m.kind is MonoidKind.UNIT_INTERVAL:
        out += list(rng.uniform(0.0, 1.0, size=count))
    elif m.kind is MonoidKind.NONNEG_REALS:
        out += list(np.exp(rng.uniform(-6.0, 3.0, size=count)))
    else:
        mags = np.exp(rng.uniform(-6.0, 3.0, size=count))
        signs = np.where(rng.random(count) < 0.5, -1.0, 1.0)
        out += [-1.0, *list(signs * mags)]
    return [float(t) for t in out]
