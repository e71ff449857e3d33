"""Tangency, semi-lipschitz and lipschitz tests, jet distance and lipschitzian ratio.

All sups are sampled lower bounds: every shell is probed along axis,
near-axis and low-discrepancy directions plus free points, and the best
candidates are polished by a batched hill climb.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .handles import FunctionHandle, constant
from .sampling import (
    QuotientTrace,
    Region,
    SamplingConfig,
    decays,
    direction_set,
    is_cauchy,
    masked_max,
    monotone_envelope,
    normalize_rows,
    random_unit,
    refine_max,
    rng_for,
    top_k,
)
from .spaces import ContractingSpace, MonoidKind, vector_norm


class NotComparable(ValueError):
    """The two maps take different values at the base point."""


class Unbounded(ArithmeticError):
    def __init__(self, message: str, trace: QuotientTrace | None = None):
        super().__init__(message)
        self.trace = trace


class TangencyStatus(str, enum.Enum):
    TANGENT = "Tangent"
    NOT_TANGENT = "NotTangent"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class TangencyVerdict:
    status: TangencyStatus
    limit_estimate: float
    trace: QuotientTrace


@dataclass
class LipschitzEstimate:
    holds: bool
    k_estimate: float
    reason: str = ""
    trace: QuotientTrace | None = None
    extra: dict = field(default_factory=dict)


class HomogClass(str, enum.Enum):
    GENERAL = "general"
    RPLUS = "rplus"
    FRACTAL = "fractal"


# ---------------------------------------------------------------- helpers

def as_point(a, dim: int) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size != dim:
        raise ValueError(f"point has dimension {a.size}, expected {dim}")
    return a


def value_at(f: FunctionHandle, a: np.ndarray) -> np.ndarray:
    if not f.in_domain(a[None, :])[0]:
        raise ValueError(f"{f.label}: base point {a.tolist()} outside the domain")
    return f.eval(a[None, :])[0]


def roundoff_floor(a: np.ndarray, fa: np.ndarray) -> float:
    """Radius below which quotient cancellation error dominates."""
    scale = float(np.max(np.abs(a), initial=0.0) + np.max(np.abs(fa), initial=0.0))
    return 1e-8 * scale


def usable_radii(cfg: SamplingConfig, floor: float) -> list[float]:
    return [r for r in cfg.radii if r > 10 * floor]


def shell_key(r: float) -> int:
    return int(round(-math.log10(r) * 1000)) + 10_000


def _quotient_fn(num: FunctionHandle, den_center: np.ndarray, target: np.ndarray | None,
                 other: FunctionHandle | None, p: float):
    """x -> |num(x) - other(x)| / |x - a| (or - target), NaN off the domain."""

    def obj(x: np.ndarray) -> np.ndarray:
        ok = num.in_domain(x)
        if other is not None:
            ok &= other.in_domain(x)
        y = num.eval(x)
        y = y - (other.eval(x) if other is not None else target)
        d = vector_norm(x - den_center, p)
        with np.errstate(all="ignore"):
            q = vector_norm(y, p) / d
        return np.where(ok & (d > 0) & np.isfinite(q), q, np.nan)

    return obj


def _sample_ball(a: np.ndarray, r: float, cfg: SamplingConfig, key: int, depth: float,
                 valid=None) -> np.ndarray:
    """Stratified points of B(a, r) minus a small core, redrawn if the domain rejects many."""
    dim = a.size
    rng = rng_for(cfg, key, shell_key(r))
    dirs = normalize_rows(direction_set(dim, cfg), cfg.norm_p)
    region = Region(a, 0.0, r, inner_open=True, outer_open=False, p=cfg.norm_p)
    per_dir = 8 if dim == 1 else 2
    extra = cfg.samples_per_shell
    x = region.sample(dirs, rng, per_dir, extra, depth=depth)
    if valid is None:
        return x
    ok = valid(x)
    rounds = 0
    while ok.sum() < 0.5 * len(x) and rounds < 10:
        more = region.sample(dirs, rng, per_dir, extra, depth=depth)
        x = np.concatenate([x, more])
        ok = valid(x)
        rounds += 1
    return x[ok]


def _shell_sup(obj, a: np.ndarray, r: float, cfg: SamplingConfig, key: int, depth: float,
               refine: bool = True) -> tuple[float, np.ndarray]:
    x = _sample_ball(a, r, cfg, key, depth)
    vals = obj(x)
    best, i = masked_max(vals)
    if i < 0:
        return 0.0, a.copy()
    point = x[i]
    if refine and cfg.refine_iters > 0:
        idx = top_k(vals, cfg.refine_starts)
        # climb inside the sampled shell; near the center rounding dominates the quotient
        region = Region(a, r * depth, r, inner_open=False, outer_open=False, p=cfg.norm_p)
        starts = x[idx]
        step = 0.05 * float(np.median(vector_norm(starts - a, cfg.norm_p)))
        v, pt = refine_max(obj, starts, step, region.project, rng_for(cfg, key, shell_key(r), 7),
                           cfg.refine_iters, cfg.refine_batch, values=vals[idx])
        if v > best:
            best, point = v, pt
    return float(best), point


def _trace(obj, a: np.ndarray, radii: list[float], cfg: SamplingConfig, key: int,
           depth: float | None = None, refine: bool = True) -> tuple[np.ndarray, list[np.ndarray]]:
    depth = cfg.shell_depth if depth is None else depth
    raw, pts = [], []
    for r in radii:
        v, p = _shell_sup(obj, a, r, cfg, key, depth, refine)
        raw.append(v)
        pts.append(p)
    return np.array(raw), pts


def _check_values(f: FunctionHandle, g: FunctionHandle, a: np.ndarray, cfg: SamplingConfig) -> np.ndarray:
    if (f.dim_in, f.dim_out) != (g.dim_in, g.dim_out):
        raise ValueError("maps have different shapes")
    fa, ga = value_at(f, a), value_at(g, a)
    if np.max(np.abs(fa - ga)) > cfg.tol_zero:
        raise NotComparable(f"f(a)={fa.tolist()} differs from g(a)={ga.tolist()}")
    return fa


# ---------------------------------------------------------------- tangency

def quotient_sup(f: FunctionHandle, g: FunctionHandle, a, r: float, cfg: SamplingConfig | None = None) -> float:
    """Sampled sup of |f(x) - g(x)| / |x - a| over the closed ball B(a, r).

    The ball is covered by the shell at ``r`` and every configured shell
    inside it, so balls from the configured radii are sampled in a nested way.
    """
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    _check_values(f, g, a, cfg)
    obj = _quotient_fn(f, a, None, g, cfg.norm_p)
    radii = [r] + [q for q in cfg.radii if q < r]
    raw, _ = _trace(obj, a, radii, cfg, key=1)
    return float(raw.max())


def tangency_trace(f: FunctionHandle, g: FunctionHandle, a, cfg: SamplingConfig) -> QuotientTrace:
    a = as_point(a, f.dim_in)
    fa = _check_values(f, g, a, cfg)
    radii = usable_radii(cfg, roundoff_floor(a, fa))
    obj = _quotient_fn(f, a, None, g, cfg.norm_p)
    raw, pts = _trace(obj, a, radii, cfg, key=1)
    env = monotone_envelope(raw)
    return QuotientTrace(list(radii), [float(v) for v in env], [list(map(float, p)) for p in pts],
                         [float(v) for v in raw])


def tangency_test(f: FunctionHandle, g: FunctionHandle, a, cfg: SamplingConfig | None = None) -> TangencyVerdict:
    cfg = cfg or SamplingConfig()
    tr = tangency_trace(f, g, a, cfg)
    vals = np.array(tr.sup_quotients)
    if vals.size == 0:
        return TangencyVerdict(TangencyStatus.INCONCLUSIVE, float("nan"), tr)
    last = float(vals[-1])
    if last <= cfg.tol_zero or decays(vals, cfg.tol_rel):
        status = TangencyStatus.TANGENT
    elif is_cauchy(vals, cfg.tol_rel) and last > cfg.tol_zero:
        status = TangencyStatus.NOT_TANGENT
    else:
        status = TangencyStatus.INCONCLUSIVE
    return TangencyVerdict(status, last, tr)


def check_bounded(tr: QuotientTrace, cfg: SamplingConfig) -> None:
    """Raise Unbounded when the trace diverges or its shell sups keep growing inwards."""
    if not tr.sup_quotients:
        raise Unbounded("no usable radius above the roundoff floor", tr)
    if max(tr.sup_quotients) > cfg.divergence_bound:
        raise Unbounded("quotient trace exceeds the divergence bound", tr)
    raw = tr.raw or tr.sup_quotients
    if len(raw) > 1 and max(raw[1:]) > cfg.growth_factor * max(raw[0], cfg.tol_zero):
        raise Unbounded("quotient grows as the radius shrinks", tr)


def jet_distance(f: FunctionHandle, g: FunctionHandle, a, cfg: SamplingConfig | None = None) -> float:
    cfg = cfg or SamplingConfig()
    tr = tangency_trace(f, g, a, cfg)
    check_bounded(tr, cfg)
    return float(tr.sup_quotients[-1])


# ---------------------------------------------------------------- continuity and lipschitz tests

def lsl_test(f: FunctionHandle, a, cfg: SamplingConfig | None = None) -> LipschitzEstimate:
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    fa = value_at(f, a)
    radii = usable_radii(cfg, roundoff_floor(a, fa))
    obj = _quotient_fn(f, a, fa, None, cfg.norm_p)
    raw, pts = _trace(obj, a, radii, cfg, key=2)
    tr = QuotientTrace(list(radii), [float(v) for v in raw], [list(map(float, p)) for p in pts])
    if raw.size == 0:
        return LipschitzEstimate(False, float("nan"), "no usable radius", tr)
    if raw.max() > cfg.divergence_bound:
        return LipschitzEstimate(False, float(raw.max()), "divergent", tr)
    if raw.size > 1 and raw[1:].max() > cfg.growth_factor * max(raw[0], cfg.tol_zero):
        return LipschitzEstimate(False, float(raw.max()), "growing", tr)
    return LipschitzEstimate(True, float(raw[-1]), "bounded", tr)


def continuity_test(f: FunctionHandle, a, cfg: SamplingConfig | None = None) -> tuple[str, QuotientTrace]:
    """Shrinking-oscillation test; returns Yes, No or Unknown with the trace."""
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    fa = value_at(f, a)

    def osc(x: np.ndarray) -> np.ndarray:
        ok = f.in_domain(x)
        v = vector_norm(f.eval(x) - fa, cfg.norm_p)
        return np.where(ok & np.isfinite(v), v, np.nan)

    raw, pts = _trace(osc, a, list(cfg.radii), cfg, key=3)
    tr = QuotientTrace(list(cfg.radii), [float(v) for v in raw], [list(map(float, p)) for p in pts])
    tol = cfg.tol_zero * (1 + float(np.max(np.abs(fa))))
    if raw[-1] <= max(tol, 1e-2 * raw[0]):
        return "Yes", tr
    if is_cauchy(raw, cfg.tol_rel) and raw[-1] > tol:
        return "No", tr
    return "Unknown", tr


LL_ETAS = tuple(10.0 ** -k for k in range(1, 10))
COARSE_ETA = 1e-3
OBSTRUCTION_ETAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def pair_quotients(f: FunctionHandle, a: np.ndarray, cfg: SamplingConfig, etas=LL_ETAS,
                   depth: float = 0.1, key: int = 4) -> tuple[list[float], np.ndarray]:
    """Matrix Q[shell, eta] of sampled sups of |f(x) - f(y)| / |x - y|.

    Pairs are y = x + eta * |x - a| * u with x in the shell and u a random
    unit vector; separations below a cancellation floor are discarded.
    """
    fa = value_at(f, a)
    floor = roundoff_floor(a, fa)
    radii = usable_radii(cfg, floor)
    sep_floor = 1e-9 * (float(np.max(np.abs(a), initial=0)) + float(np.max(np.abs(fa), initial=0)))
    Q = np.zeros((len(radii), len(etas)))
    for i, r in enumerate(radii):
        x = _sample_ball(a, r, cfg, key, depth, valid=f.in_domain)
        rng = rng_for(cfg, key, shell_key(r), 11)
        fx = f.eval(x)
        rad = vector_norm(x - a, cfg.norm_p)
        for j, eta in enumerate(etas):
            u = random_unit(rng, len(x), a.size, cfg.norm_p)
            y = x + (eta * rad)[:, None] * u
            ok = f.in_domain(y)
            sep = vector_norm(y - x, cfg.norm_p)
            ok &= sep > max(sep_floor, 0.0)
            with np.errstate(all="ignore"):
                q = vector_norm(f.eval(y) - fx, cfg.norm_p) / sep
            q = q[ok & np.isfinite(q)]
            Q[i, j] = float(q.max()) if q.size else 0.0
    return radii, Q


def ll_test(f: FunctionHandle, a, cfg: SamplingConfig | None = None,
            pairs: tuple[list[float], np.ndarray] | None = None) -> LipschitzEstimate:
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    radii, Q = pairs if pairs is not None else pair_quotients(f, a, cfg)
    if len(radii) == 0:
        return LipschitzEstimate(False, float("nan"), "no usable radius")
    etas = np.array(LL_ETAS[: Q.shape[1]])
    fine = Q.max(axis=1)
    coarse = Q[:, etas >= COARSE_ETA].max(axis=1)
    tr = QuotientTrace(list(radii), [float(v) for v in fine])
    extra = {"coarse": coarse.tolist()}
    k = float(fine.max())
    if k > cfg.divergence_bound:
        return LipschitzEstimate(False, k, "divergent", tr, extra)
    if fine.size > 1 and fine[1:].max() > cfg.growth_factor * max(fine[0], cfg.tol_zero):
        return LipschitzEstimate(False, k, "growing", tr, extra)
    if k > cfg.resolution_factor * max(float(coarse.max()), cfg.tol_zero):
        return LipschitzEstimate(False, k, "unresolved at fine separation", tr, extra)
    return LipschitzEstimate(True, k, "bounded", tr, extra)


def tangentiability_obstruction(f: FunctionHandle, a, cfg: SamplingConfig | None = None) -> dict:
    """Necessary-condition check for tangentiability.

    If f is tangent to some locally lipschitzian g, pair quotients at a fixed
    relative separation eta have limit superior at most lip(g) as the ball
    shrinks, uniformly in eta. Quotients that keep growing as eta decreases
    rule this out.
    """
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    radii, Q = pair_quotients(f, a, cfg, OBSTRUCTION_ETAS, depth=cfg.shell_depth, key=5)
    limits = []
    for j in range(Q.shape[1]):
        col = Q[:, j]
        if col.size == 0 or col[-1] <= cfg.tol_zero or decays(col, cfg.tol_rel):
            limits.append(0.0)
        else:
            limits.append(float(col[-3:].max()))
    lo, hi = limits[0], limits[-1]
    obstructed = hi > cfg.tol_zero and hi >= cfg.resolution_factor * lo
    return {"obstructed": bool(obstructed), "etas": list(OBSTRUCTION_ETAS), "limits": limits}


# ---------------------------------------------------------------- homogeneous maps

def _region(s: ContractingSpace, cls: HomogClass, r: float | None, eps: float | None) -> Region:
    a = s.base
    if cls is HomogClass.GENERAL:
        return Region(a, 0.0, 1.0, inner_open=True, outer_open=False, p=s.norm_p)
    if cls is HomogClass.RPLUS:
        if eps is None:
            return Region(a, 1.0, 1.0, inner_open=False, outer_open=False, p=s.norm_p)
        return Region(a, 1.0 - eps, 1.0 + eps, inner_open=True, outer_open=True, p=s.norm_p)
    if r is None or not (0 < r < 1):
        raise ValueError("the fractal class needs a ratio r in (0, 1)")
    if eps is None:
        return Region(a, r, 1.0, inner_open=True, outer_open=False, p=s.norm_p)
    return Region(a, r, 1.0 + eps, inner_open=True, outer_open=True, p=s.norm_p)


def _ratio(s: ContractingSpace, cls: HomogClass, r: float | None) -> float | None:
    if cls is HomogClass.FRACTAL and r is None and s.monoid.kind is MonoidKind.NR:
        return s.monoid.r
    return r


def _region_points(region: Region, dim: int, cfg: SamplingConfig, key: int) -> np.ndarray:
    rng = rng_for(cfg, key)
    dirs = normalize_rows(direction_set(dim, cfg), region.p)
    per_dir = 2048 if dim == 1 else 16
    return region.sample(dirs, rng, per_dir, cfg.samples_per_shell * 4)


def norm_homog(h: FunctionHandle, s: ContractingSpace, cls: HomogClass | str = HomogClass.GENERAL,
               cfg: SamplingConfig | None = None, r: float | None = None) -> float:
    """Sup of |h(x) - h(a)| / |x - a| over the region that suffices for the class.

    general: closed unit ball; rplus: unit sphere; fractal: annulus r < |x - a| <= 1.
    """
    cfg = cfg or SamplingConfig()
    cls = HomogClass(cls)
    region = _region(s, cls, _ratio(s, cls, r), None)
    ha = value_at(h, s.base)
    obj = _quotient_fn(h, s.base, ha, None, s.norm_p)
    x = _region_points(region, s.dim, cfg, 21)
    vals = obj(x)
    best, _ = masked_max(vals)
    idx = top_k(vals, cfg.refine_starts)
    if idx.size:
        v, _ = refine_max(obj, x[idx], 0.05, region.project, rng_for(cfg, 22), cfg.refine_iters * 2,
                          cfg.refine_batch, values=vals[idx])
        best = max(best, v)
    return float(best)


PAIR_SEPARATIONS = tuple(10.0 ** -k for k in range(1, 8))


def lipschitz_ratio_homog(h: FunctionHandle, s: ContractingSpace, cls: HomogClass | str = HomogClass.GENERAL,
                          eps: float = 0.5, cfg: SamplingConfig | None = None, r: float | None = None) -> float:
    """Sup of pairwise quotients |h(x) - h(y)| / |x - y| over the class region.

    general: unit ball; rplus: 1 - eps < |x - a| < 1 + eps; fractal: r < |x - a| < 1 + eps.
    """
    cfg = cfg or SamplingConfig()
    if eps <= 0:
        raise ValueError("eps must be positive")
    cls = HomogClass(cls)
    region = _region(s, cls, _ratio(s, cls, r), None if cls is HomogClass.GENERAL else eps)
    dim, p = s.dim, s.norm_p
    x = _region_points(region, dim, cfg, 31)
    x = x[region.contains(x) & h.in_domain(x)]
    rng = rng_for(cfg, 32)

    def pair_q(xa: np.ndarray, ya: np.ndarray) -> np.ndarray:
        ok = region.contains(xa) & region.contains(ya) & h.in_domain(xa) & h.in_domain(ya)
        sep = vector_norm(ya - xa, p)
        with np.errstate(all="ignore"):
            q = vector_norm(h.eval(ya) - h.eval(xa), p) / sep
        return np.where(ok & (sep > 0) & np.isfinite(q), q, np.nan)

    best = 0.0
    cands = []
    for delta in PAIR_SEPARATIONS:
        u = random_unit(rng, len(x), dim, p)
        q = pair_q(x, x + delta * u)
        v, i = masked_max(q)
        if i >= 0:
            best = max(best, v)
            for j in top_k(q, 2):
                cands.append((q[j], x[j], u[j], delta))
    perm = rng.permutation(len(x))
    v, _ = masked_max(pair_q(x, x[perm]))
    best = max(best, v)

    # polish (x, u) for the best few local pairs at their separation
    cands.sort(key=lambda c: -c[0])
    for qv, x0, u0, delta in cands[: cfg.refine_starts]:
        def obj(z: np.ndarray, delta=delta) -> np.ndarray:
            xs, us = z[:, :dim], normalize_rows(z[:, dim:], p)
            return pair_q(xs, xs + delta * us)

        def proj(z: np.ndarray) -> np.ndarray:
            return np.concatenate([region.project(z[:, :dim]), normalize_rows(z[:, dim:], p)], axis=1)

        z0 = np.concatenate([x0, u0])[None, :]
        v, _ = refine_max(obj, z0, 0.05, proj, rng, cfg.refine_iters * 2, cfg.refine_batch, values=[qv])
        best = max(best, v)
    return float(best)
