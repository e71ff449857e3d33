"""Contacts by the limit formula kf_a(x) = lim (f(a + v x) - f(a)) / v, plus homogeneity checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .handles import FunctionHandle, translate
from .sampling import (
    SamplingConfig,
    best_limit,
    direction_set,
    is_cauchy,
    limit_noise,
    normalize_rows,
    random_unit,
    rng_for,
    tail_mean,
    tail_range,
)
from .spaces import (
    ContractingSpace,
    MonoidKind,
    ValuedMonoid,
    Variant,
    sample_scalars,
    schedule_valuations,
    vector_norm,
)
from .tangency import TangencyStatus, as_point, tangency_test, value_at


class ContactStatus(str, enum.Enum):
    CONTACTABLE = "Contactable"
    NOT_CONTACTABLE = "NotContactable"
    INCONCLUSIVE = "Inconclusive"


class TraceState(str, enum.Enum):
    CONVERGED = "converged"
    OSCILLATING = "oscillating"
    DIVERGENT = "divergent"
    EXITED = "exited"
    SHORT = "short"


@dataclass
class DirectionTrace:
    direction: list[float]
    scales: list[float]
    values: list[list[float]]
    state: TraceState
    limit: list[float] | None = None
    noise: float = float("inf")
    tail_range: float = 0.0

    def to_dict(self) -> dict:
        return {"direction": self.direction, "scales": self.scales, "values": self.values,
                "state": self.state.value, "limit": self.limit, "tail_range": self.tail_range}


@dataclass
class ContactVerdict:
    status: ContactStatus
    monoid: ValuedMonoid
    base: np.ndarray
    contact_eval: Callable[[np.ndarray], np.ndarray] | None
    traces: list[DirectionTrace]
    oscillation_witness: dict | None = None
    lipschitz: dict = field(default_factory=dict)
    variant: Variant = Variant.CANONICAL

    def contact_handle(self, dim_out: int) -> FunctionHandle:
        if self.contact_eval is None:
            raise ValueError("no contact available")
        return FunctionHandle(self.base.size, dim_out, self.contact_eval, label=f"k[{self.monoid.label}]")

    def limits(self) -> np.ndarray:
        return np.array([t.limit if t.limit is not None else [np.nan] for t in self.traces], dtype=float)


@dataclass(frozen=True)
class GDiff1D:
    left: float
    right: float

    def assemble(self) -> FunctionHandle:
        left, right = self.left, self.right

        def func(x: np.ndarray) -> np.ndarray:
            t = x[:, 0]
            return np.where(t >= 0, t * right, t * left)[:, None]

        return FunctionHandle(1, 1, func, label=f"gdiff({left:g},{right:g})")


@dataclass(frozen=True)
class NoGDiff:
    reason: str
    side: str


# ---------------------------------------------------------------- schedules and raw quotients

def contact_scales(m: ValuedMonoid, cfg: SamplingConfig) -> np.ndarray:
    if m.kind is MonoidKind.NR:
        v = schedule_valuations(m, cfg.nr_depth + 1)
    else:
        v = schedule_valuations(m, cfg.contact_count, cfg.contact_ratio)
    # keep v^3 clear of underflow so products such as x*y*y stay normal
    return v[v > 1e-100]


def _raw_quotients(f: FunctionHandle, a: np.ndarray, fa: np.ndarray, X: np.ndarray, scales: np.ndarray,
                   p: float) -> tuple[np.ndarray, np.ndarray]:
    """Array Q[n, k, :] of (f(a + v_k x_n) - f(a)) / v_k, NaN where unusable,
    and the matching cancellation error bound per entry."""
    n, k = len(X), len(scales)
    pts = a + scales[None, :, None] * X[:, None, :]
    flat = pts.reshape(n * k, -1)
    ok = f.in_domain(flat)
    vals = f.eval(flat)
    q = (vals - fa) / np.repeat(scales[None, :], n, axis=0).reshape(-1, 1)
    q[~ok] = np.nan
    q = q.reshape(n, k, -1)
    # drop steps lost to cancellation against |a| + |f(a)|
    scale = float(np.max(np.abs(a), initial=0.0) + np.max(np.abs(fa), initial=0.0))
    step = scales[None, :] * vector_norm(X, p)[:, None]
    q[step < 2.2e-12 * scale] = np.nan
    cancel = np.broadcast_to(8.9e-16 * scale / scales[None, :], (n, k))
    return q, cancel


def _analyse(values: np.ndarray, cancel: np.ndarray, cfg: SamplingConfig
             ) -> tuple[TraceState, np.ndarray | None, float, float]:
    finite = np.all(np.isfinite(values), axis=1)
    if not finite.any():
        return TraceState.SHORT, None, float("inf"), 0.0
    seg, err = values[finite], cancel[finite]
    if np.max(np.abs(seg)) > cfg.divergence_bound:
        return TraceState.DIVERGENT, None, float("inf"), float("inf")
    if len(seg) < 3:
        return TraceState.SHORT, None, float("inf"), 0.0
    rng_ = tail_range(seg)
    if is_cauchy(seg, cfg.tol_rel):
        return (TraceState.CONVERGED, best_limit(seg, cfg.tol_rel, err),
                limit_noise(seg, cfg.tol_rel, err), rng_)
    if rng_ > cfg.tol_rel * (1 + tail_mean(seg)):
        return TraceState.OSCILLATING, None, float("inf"), rng_
    return TraceState.SHORT, None, float("inf"), rng_


def _replay(f: FunctionHandle, a: np.ndarray, fa: np.ndarray, X: np.ndarray, m: ValuedMonoid,
            cfg: SamplingConfig):
    scales = contact_scales(m, cfg)
    Q, cancel = _raw_quotients(f, a, fa, X, scales, cfg.norm_p)
    out = []
    for i in range(len(X)):
        out.append(_analyse(Q[i], cancel[i], cfg))
    return scales, Q, out


def directional_quotient(f: FunctionHandle, a, x, m: ValuedMonoid, cfg: SamplingConfig | None = None) -> DirectionTrace:
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    x = as_point(x, f.dim_in)
    fa = value_at(f, a)
    scales, Q, res = _replay(f, a, fa, x[None, :], m, cfg)
    return _direction_trace(x, scales, Q[0], res[0])


def _direction_trace(x, scales, q, res) -> DirectionTrace:
    state, lim, noise, rng_ = res
    keep = np.all(np.isfinite(q), axis=1)
    return DirectionTrace([float(c) for c in x], [float(s) for s in scales[keep]],
                          [[float(c) for c in row] for row in q[keep]], state,
                          None if lim is None else [float(c) for c in lim], float(noise), float(rng_))


# ---------------------------------------------------------------- contact estimation

FINE_ETAS = (1e-4, 1e-6, 1e-8)
COARSE_ETAS = (1e-1, 1e-2)


def make_contact_eval(f: FunctionHandle, a: np.ndarray, fa: np.ndarray, m: ValuedMonoid,
                      cfg: SamplingConfig) -> Callable[[np.ndarray], np.ndarray]:
    """Evaluator replaying the limit at requested points (NaN where it does not settle)."""

    def ev(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, a.size)
        _, _, res = _replay(f, a, fa, X, m, cfg)
        out = np.full((len(X), f.dim_out), np.nan)
        for i, (state, lim, _, _) in enumerate(res):
            if state is TraceState.CONVERGED:
                out[i] = lim
            elif not np.any(X[i]):
                out[i] = 0.0
        return out

    return ev


def _lipschitz_check(f, a, fa, m, cfg, bases: np.ndarray) -> dict:
    """Compare coarse and fine pair quotients of the replayed contact near the unit sphere."""
    rng = rng_for(cfg, 41)
    xs, ys, seps, fine_flags = [], [], [], []
    for eta in (*COARSE_ETAS, *FINE_ETAS):
        u = random_unit(rng, len(bases), a.size, cfg.norm_p)
        xs.append(bases)
        ys.append(bases + eta * u)
        seps.append(np.full(len(bases), eta))
        fine_flags.append(np.full(len(bases), eta in FINE_ETAS))
    X = np.concatenate(xs)
    Yp = np.concatenate(ys)
    _, _, rx = _replay(f, a, fa, X, m, cfg)
    _, _, ry = _replay(f, a, fa, Yp, m, cfg)
    fine_flags = np.concatenate(fine_flags)
    coarse_q, fine_q = [0.0], [0.0]
    unsettled = 0
    for i in range(len(X)):
        (sx, lx, nx, _), (sy, ly, ny, _) = rx[i], ry[i]
        if sx is not TraceState.CONVERGED or sy is not TraceState.CONVERGED:
            unsettled += 1
            continue
        sep = float(vector_norm(Yp[i] - X[i], cfg.norm_p))
        if nx + ny > 1e-7 * sep:
            continue
        q = float(vector_norm(ly - lx, cfg.norm_p)) / sep
        (fine_q if fine_flags[i] else coarse_q).append(q)
    coarse, fine = max(coarse_q), max(fine_q)
    ok = fine <= cfg.resolution_factor * max(coarse, cfg.tol_zero) and max(coarse, fine) <= cfg.divergence_bound
    return {"holds": bool(ok), "coarse": coarse, "fine": fine, "unsettled": unsettled}


def estimate_contact(f: FunctionHandle, a, m: ValuedMonoid, cfg: SamplingConfig | None = None,
                     variant: Variant | str = Variant.CANONICAL,
                     directions: np.ndarray | None = None) -> ContactVerdict:
    """Estimate the contact of f at a for monoid m along a probe direction set.

    With the standard real action the contact must also be odd; this is
    checked on the probe directions.
    """
    cfg = cfg or SamplingConfig()
    variant = Variant(variant)
    a = as_point(a, f.dim_in)
    if not f.in_domain(a[None, :])[0]:
        raise ValueError(f"{f.label}: base point {a.tolist()} is not in the domain")
    if variant is Variant.STANDARD and not m.is_real:
        raise ValueError("the standard action needs a real monoid")
    fa = value_at(f, a)
    work = ValuedMonoid.rplus() if m.is_real else m
    dirs = directions if directions is not None else normalize_rows(direction_set(a.size, cfg), cfg.norm_p)
    dirs = np.asarray(dirs, dtype=float).reshape(-1, a.size)
    if variant is Variant.STANDARD:
        dirs = np.concatenate([dirs, -dirs])
    scales, Q, res = _replay(f, a, fa, dirs, work, cfg)
    traces = [_direction_trace(dirs[i], scales, Q[i], res[i]) for i in range(len(dirs))]
    ev = make_contact_eval(f, a, fa, work, cfg)

    bad = [t for t in traces if t.state in (TraceState.OSCILLATING, TraceState.DIVERGENT)]
    if bad:
        w = max(bad, key=lambda t: t.tail_range)
        return ContactVerdict(ContactStatus.NOT_CONTACTABLE, m, a, None, traces,
                              {"direction": w.direction, "state": w.state.value, "tail_range": w.tail_range},
                              variant=variant)
    if any(t.state is not TraceState.CONVERGED for t in traces):
        return ContactVerdict(ContactStatus.INCONCLUSIVE, m, a, None, traces, variant=variant)

    lip = _lipschitz_check(f, a, fa, work, cfg, dirs)
    if not lip["holds"]:
        return ContactVerdict(ContactStatus.NOT_CONTACTABLE, m, a, None, traces,
                              {"direction": None, "state": "contact not lipschitz", "tail_range": 0.0,
                               "coarse": lip["coarse"], "fine": lip["fine"]}, lip, variant)
    if variant is Variant.STANDARD:
        lims = np.array([t.limit for t in traces])
        half = len(dirs) // 2
        gap = np.max(vector_norm(lims[:half] + lims[half:], cfg.norm_p), initial=0.0)
        if gap > cfg.tol_zero * 10 + cfg.tol_rel * float(np.max(np.abs(lims), initial=0.0)):
            i = int(np.argmax(vector_norm(lims[:half] + lims[half:], cfg.norm_p)))
            return ContactVerdict(ContactStatus.NOT_CONTACTABLE, m, a, None, traces,
                                  {"direction": traces[i].direction, "state": "contact not odd",
                                   "tail_range": float(gap)}, lip, variant)
    return ContactVerdict(ContactStatus.CONTACTABLE, m, a, ev, traces, None, lip, variant)


def gdiff_1d(f: FunctionHandle, a, cfg: SamplingConfig | None = None) -> GDiff1D | NoGDiff:
    """One-sided derivatives along the geometric schedule."""
    cfg = cfg or SamplingConfig()
    a = as_point(a, 1)
    m = ValuedMonoid.rplus()
    out = {}
    for side, x in (("right", 1.0), ("left", -1.0)):
        tr = directional_quotient(f, a, [x], m, cfg)
        if tr.state is not TraceState.CONVERGED:
            return NoGDiff(f"{side} quotient {tr.state.value}", side)
        out[side] = tr.limit[0] if side == "right" else -tr.limit[0]
    return GDiff1D(out["left"], out["right"])


# ---------------------------------------------------------------- checks on candidate contacts

@dataclass
class HomogeneityResult:
    holds: bool
    max_defect: float
    witness: tuple | None


def homogeneity_check(h: FunctionHandle, m: ValuedMonoid, s_dom: ContractingSpace | None = None,
                      s_cod: ContractingSpace | None = None, cfg: SamplingConfig | None = None,
                      variant: Variant | str = Variant.CANONICAL, points: np.ndarray | None = None
                      ) -> HomogeneityResult:
    """Checks h(t * x) = t * h(x) on sampled scalars and points of the radius-2 ball."""
    cfg = cfg or SamplingConfig()
    s_dom = s_dom or ContractingSpace(h.dim_in, None, cfg.norm_p, variant, m)
    s_cod = s_cod or ContractingSpace(h.dim_out, None, cfg.norm_p, variant, m)
    rng = rng_for(cfg, 51)
    if points is None:
        d = h.dim_in
        ax = np.concatenate([np.eye(d), -np.eye(d), 2 * np.eye(d), -2 * np.eye(d)])
        free = random_unit(rng, 64, d, s_dom.norm_p) * rng.uniform(0, 2, size=(64, 1))
        points = s_dom.base + np.concatenate([np.zeros((1, d)), ax, free])
    points = np.asarray(points, dtype=float).reshape(-1, h.dim_in)
    points = points[h.in_domain(points)]
    hx = h.eval(points)
    worst, worst_ratio, witness = 0.0, 0.0, None
    for t in sample_scalars(m, rng):
        tx = s_dom.star(t, points)
        ok = h.in_domain(tx)
        lhs = h.eval(tx)
        rhs = s_cod.star(t, hx)
        defect = vector_norm(lhs - rhs, s_cod.norm_p)
        defect = np.where(ok, defect, 0.0)
        thr = cfg.tol_zero * (1 + s_dom.distance(points, s_dom.base))
        ratio = defect / thr
        i = int(np.argmax(ratio))
        worst = max(worst, float(defect.max(initial=0.0)))
        # the first failing scalar in sampling order is the witness (absorbing one first)
        if ratio[i] > 1.0 and witness is None:
            witness = (t, points[i].tolist())
        worst_ratio = max(worst_ratio, float(ratio[i]))
    return HomogeneityResult(worst_ratio <= 1.0, worst, witness)


def verify_contact(f: FunctionHandle, a, h: FunctionHandle, cfg: SamplingConfig | None = None) -> bool:
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    h0 = h.eval(np.zeros((1, h.dim_in)))[0]
    if np.max(np.abs(h0)) > cfg.tol_zero:
        raise ValueError("candidate contact must vanish at 0")
    cand = translate(value_at(f, a), a, h)
    return tangency_test(f, cand, a, cfg).status is TangencyStatus.TANGENT


def _test_pairs(dim: int, cfg: SamplingConfig, count: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = rng_for(cfg, 61)
    x = random_unit(rng, count, dim, cfg.norm_p) * rng.uniform(0.2, 1.0, size=(count, 1))
    y = random_unit(rng, count, dim, cfg.norm_p) * rng.uniform(0.2, 1.0, size=(count, 1))
    c = rng.uniform(-2.0, 2.0, size=(count, 1))
    return x, y, c


def is_linear(h: Callable[[np.ndarray], np.ndarray], dim: int, cfg: SamplingConfig) -> tuple[bool, float]:
    """Additivity and real scaling on seeded pairs; returns the verdict and the worst defect."""
    x, y, c = _test_pairs(dim, cfg)
    n = len(x)
    vals = np.asarray(h(np.concatenate([x, y, x + y, c * x])), dtype=float)
    hx, hy, hxy, hcx = vals[:n], vals[n:2 * n], vals[2 * n:3 * n], vals[3 * n:]
    thr = cfg.tol_zero * (1 + vector_norm(x, cfg.norm_p) + vector_norm(y, cfg.norm_p))
    add = vector_norm(hxy - hx - hy, cfg.norm_p)
    sc = vector_norm(hcx - c * hx, cfg.norm_p)
    worst = np.maximum(add, sc) / thr
    if not np.all(np.isfinite(worst)):
        return False, float("inf")
    return bool(worst.max() <= 1.0), float(np.maximum(add, sc).max())


def is_odd(h: Callable[[np.ndarray], np.ndarray], dim: int, cfg: SamplingConfig) -> tuple[bool, float]:
    x, _, _ = _test_pairs(dim, cfg)
    n = len(x)
    vals = np.asarray(h(np.concatenate([x, -x])), dtype=float)
    gap = vector_norm(vals[:n] + vals[n:], cfg.norm_p)
    thr = cfg.tol_zero * (1 + vector_norm(x, cfg.norm_p))
    if not np.all(np.isfinite(gap)):
        return False, float("inf")
    return bool(np.all(gap <= thr)), float(gap.max())
