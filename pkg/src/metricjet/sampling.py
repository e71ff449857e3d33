"""Sampling configuration, direction sets, sup search and trace analysis."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .spaces import vector_norm

DEFAULT_RADII = tuple(10.0 ** -k for k in range(1, 11))


@dataclass(frozen=True)
class SamplingConfig:
    radii: tuple[float, ...] = DEFAULT_RADII
    samples_per_shell: int = 256
    direction_count: int = 64
    tol_zero: float = 1e-6
    tol_rel: float = 1e-3
    seed: int = 0
    divergence_bound: float = 1e9
    norm_p: float = 2
    # innermost radius of a shell, as a fraction of its outer radius
    shell_depth: float = 1e-3
    contact_ratio: float = 0.1
    contact_count: int = 11
    nr_depth: int = 40
    growth_factor: float = 10.0
    resolution_factor: float = 10.0
    refine_starts: int = 4
    refine_iters: int = 40
    refine_batch: int = 32

    def __post_init__(self) -> None:
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        object.__setattr__(self, "radii", radii)
        if self.samples_per_shell < 1 or self.direction_count < 0:
            raise ValueError("sample counts must be positive")

    def with_(self, **kw) -> SamplingConfig:
        return replace(self, **kw)


def default_config(**overrides) -> SamplingConfig:
    seed = os.environ.get("METRIC_JET_SEED")
    if seed is not None and "seed" not in overrides:
        overrides["seed"] = int(seed)
    return SamplingConfig(**overrides)


def rng_for(cfg: SamplingConfig, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(cfg.seed) & 0xFFFFFFFF, *[int(k) & 0xFFFFFFFF for k in keys]])


@dataclass
class QuotientTrace:
    radii: list[float]
    sup_quotients: list[float]
    argmax_points: list[list[float]] = field(default_factory=list)
    # per-shell sups before the monotone envelope, when available
    raw: list[float] = field(default_factory=list)

    def to_rows(self) -> list[list[str]]:
        rows = []
        for i, (r, q) in enumerate(zip(self.radii, self.sup_quotients)):
            pt = self.argmax_points[i] if i < len(self.argmax_points) else []
            rows.append([str(i), fmt17(r), fmt17(q), *[fmt17(c) for c in pt]])
        return rows

    def to_csv(self) -> str:
        width = max((len(p) for p in self.argmax_points), default=0)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "radius", "sup_quotient", *[f"argmax_{j + 1}" for j in range(width)]])
        w.writerows(self.to_rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"radii": list(self.radii), "values": list(self.sup_quotients),
                "argmax": [list(p) for p in self.argmax_points]}


def fmt17(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------- directions

NEAR_AXIS_OFFSETS = (1e-1, 1e-2, 1e-3, 1e-4)


def axis_directions(dim: int) -> np.ndarray:
    eye = np.eye(dim)
    return np.concatenate([eye, -eye])


def near_axis_directions(dim: int) -> np.ndarray:
    """Unit vectors e_i +- delta e_j, which expose behaviour along coordinate hyperplanes."""
    if dim == 1:
        return np.zeros((0, 1))
    out = []
    for i in range(dim):
        for si in (1.0, -1.0):
            for j in range(dim):
                if j == i:
                    continue
                for delta in NEAR_AXIS_OFFSETS:
                    for sj in (1.0, -1.0):
                        v = np.zeros(dim)
                        v[i] = si
                        v[j] = sj * delta
                        out.append(v / np.linalg.norm(v))
    return np.array(out)


def sobol_directions(dim: int, count: int, seed: int) -> np.ndarray:
    """Low-discrepancy points on the Euclidean unit sphere."""
    if dim == 1 or count == 0:
        return np.zeros((0, dim))
    n = 1 << max(0, int(np.ceil(np.log2(count))))
    u = qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)[:count]
    from scipy.special import ndtri

    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def direction_set(dim: int, cfg: SamplingConfig, count: int | None = None, near_axis: bool = True) -> np.ndarray:
    """Axis directions, near-axis perturbations and seeded sphere points.

    In dimension 1 this is exactly ``[[1], [-1]]``.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    parts = [axis_directions(dim)]
    if near_axis:
        parts.append(near_axis_directions(dim))
    parts.append(sobol_directions(dim, cfg.direction_count if count is None else count, cfg.seed))
    return np.concatenate(parts)


def normalize_rows(x: np.ndarray, p: float) -> np.ndarray:
    n = vector_norm(x, p)[:, None]
    return x / np.where(n == 0, 1.0, n)


def random_unit(rng: np.random.Generator, n: int, dim: int, p: float) -> np.ndarray:
    if dim == 1:
        return np.where(rng.random((n, 1)) < 0.5, -1.0, 1.0)
    return normalize_rows(rng.standard_normal((n, dim)), p)


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class Region:
    """Points whose distance to ``center`` lies in [inner, outer] (bounds may be open)."""

    center: np.ndarray
    inner: float
    outer: float
    inner_open: bool = True
    outer_open: bool = False
    p: float = 2

    def radii_of(self, x: np.ndarray) -> np.ndarray:
        return vector_norm(x - self.center, self.p)

    def contains(self, x: np.ndarray) -> np.ndarray:
        d = self.radii_of(x)
        lo = d > self.inner if self.inner_open else d >= self.inner
        hi = d < self.outer if self.outer_open else d <= self.outer
        return lo & hi

    def project(self, x: np.ndarray) -> np.ndarray:
        d = self.radii_of(x)
        lo = self.inner * (1 + 1e-12) if self.inner_open else self.inner
        lo = max(lo, 1e-300)
        hi = self.outer * (1 - 1e-12) if self.outer_open else self.outer
        target = np.clip(d, lo, hi)
        safe = np.where(d == 0, 1.0, d)
        y = self.center + (x - self.center) * (target / safe)[:, None]
        return np.where((d == 0)[:, None], x, y)

    def sample(self, dirs: np.ndarray, rng: np.random.Generator, per_dir: int, extra: int,
               radial: str = "log", depth: float = 1e-3) -> np.ndarray:
        """Stratified samples: every direction at several radii plus free points."""
        dim = self.center.size
        lo = self.inner if self.inner > 0 else self.outer * depth
        hi = self.outer

        def radii(n: int) -> np.ndarray:
            if radial == "log":
                return np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
            return rng.uniform(lo, hi, size=n)

        pts = []
        if len(dirs):
            k = len(dirs)
            rr = np.concatenate([np.full(k, hi), radii(k * per_dir)])
            dd = np.concatenate([dirs, np.tile(dirs, (per_dir, 1))])
            pts.append(self.center + dd * rr[:, None])
        if extra:
            u = random_unit(rng, extra, dim, self.p)
            pts.append(self.center + u * radii(extra)[:, None])
        x = np.concatenate(pts) if pts else np.zeros((0, dim))
        return self.project(x)


# ---------------------------------------------------------------- sup search

Objective = Callable[[np.ndarray], np.ndarray]


def masked_max(values: np.ndarray) -> tuple[float, int]:
    v = np.where(np.isfinite(values), values, -np.inf)
    if v.size == 0 or not np.isfinite(v).any():
        return 0.0, -1
    i = int(np.argmax(v))
    return float(v[i]), i


def refine_max(objective: Objective, starts: np.ndarray, step: float, project: Callable[[np.ndarray], np.ndarray],
               rng: np.random.Generator, iters: int = 40, batch: int = 32,
               values: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Batched stochastic hill climb from several starting points.

    Returns the best value found and its point. Values that come back
    non-finite (outside the domain) are ignored.
    """
    x = np.array(starts, dtype=float)
    fx = objective(x) if values is None else np.array(values, dtype=float)
    fx = np.where(np.isfinite(fx), fx, -np.inf)
    steps = np.full(len(x), float(step))
    for _ in range(iters):
        cand = np.repeat(x, batch, axis=0)
        cand = cand + rng.standard_normal(cand.shape) * np.repeat(steps, batch)[:, None]
        cand = project(cand)
        fc = objective(cand)
        fc = np.where(np.isfinite(fc), fc, -np.inf).reshape(len(x), batch)
        j = np.argmax(fc, axis=1)
        best = fc[np.arange(len(x)), j]
        improved = best > fx
        x[improved] = cand.reshape(len(x), batch, -1)[improved, j[improved]]
        fx[improved] = best[improved]
        steps = np.where(improved, steps * 1.2, steps * 0.5)
        if np.all(steps < 1e-14 * (1 + np.abs(x).max())):
            break
    i = int(np.argmax(fx))
    return float(fx[i]), x[i]


def top_k(values: np.ndarray, k: int) -> np.ndarray:
    v = np.where(np.isfinite(values), values, -np.inf)
    k = min(k, v.size)
    idx = np.argpartition(-v, k - 1)[:k] if k > 0 else np.array([], dtype=int)
    return idx[np.isfinite(v[idx])]


# ---------------------------------------------------------------- trace analysis

def _as_2d(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v.reshape(len(v), -1)


def step_sizes(values) -> np.ndarray:
    v = _as_2d(values)
    if len(v) < 2:
        return np.zeros(0)
    return np.max(np.abs(np.diff(v, axis=0)), axis=1)


def scale_of(values) -> np.ndarray:
    return np.max(np.abs(_as_2d(values)), axis=1)


def is_cauchy(values, tol_rel: float, window: int = 3) -> bool:
    """Last ``window`` entries agree pairwise within tol_rel * (1 + |value|)."""
    v = _as_2d(values)
    if len(v) < window:
        return False
    tail = v[-window:]
    spread = np.max(tail.max(axis=0) - tail.min(axis=0))
    return bool(spread <= tol_rel * (1 + np.max(np.abs(tail))))


def tail_range(values, window: int = 5) -> float:
    v = _as_2d(values)[-window:]
    if len(v) == 0:
        return 0.0
    return float(np.max(v.max(axis=0) - v.min(axis=0)))


def tail_mean(values, window: int = 5) -> float:
    v = _as_2d(values)[-window:]
    return float(np.max(np.abs(v.mean(axis=0)))) if len(v) else 0.0


def converged_start(values, tol_rel: float) -> int:
    """Index where the longest suffix of mutually close consecutive entries begins."""
    v = _as_2d(values)
    steps = step_sizes(v)
    scale = scale_of(v)
    i = len(v) - 1
    while i > 0 and steps[i - 1] <= tol_rel * (1 + max(scale[i - 1], scale[i])):
        i -= 1
    return i


def _pick(values, tol_rel: float, floor=None) -> tuple[int, float]:
    v = _as_2d(values)
    start = converged_start(v, tol_rel)
    if len(v) - start < 2:
        return len(v) - 1, float("inf")
    err = step_sizes(v)[start:]
    if floor is not None:
        err = np.maximum(err, np.asarray(floor, dtype=float)[start + 1:])
    j = int(np.argmin(err))
    return start + j + 1, float(err[j])


def best_limit(values, tol_rel: float, floor=None) -> np.ndarray:
    """Limit estimate from a converged trace.

    Within the converged tail, picks the entry with the smallest error
    estimate: the step from its predecessor, bounded below by ``floor`` (the
    known cancellation error per entry). Truncation error shrinks along the
    schedule while cancellation grows, and the pick sits where they balance.
    """
    i, _ = _pick(values, tol_rel, floor)
    return _as_2d(values)[i]


def limit_noise(values, tol_rel: float, floor=None) -> float:
    return _pick(values, tol_rel, floor)[1]


def monotone_envelope(raw: Sequence[float]) -> np.ndarray:
    """Running max from the innermost shell outwards (balls are nested)."""
    r = np.asarray(raw, dtype=float)
    return np.maximum.accumulate(r[::-1])[::-1] if r.size else r


def decays(values, tol_rel: float, factor: float = 3.0, window: int = 3) -> bool:
    v = np.asarray(values, dtype=float)
    if v.size < window:
        return False
    tail = v[-window:]
    if tail[-1] > tol_rel:
        return False
    return bool(np.all(tail[1:] * factor <= tail[:-1] + 1e-300))
