"""First-order minimum tests from the sign of the contact on the unit sphere."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contact import make_contact_eval
from .handles import FunctionHandle
from .sampling import SamplingConfig, normalize_rows, sobol_directions
from .spaces import ValuedMonoid
from .tangency import as_point, value_at


class ExtremumStatus(str, enum.Enum):
    STRICT_LOCAL_MIN = "StrictLocalMin"
    NOT_LOCAL_MIN = "NotLocalMin"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ExtremumVerdict:
    status: ExtremumStatus
    sphere_min: float
    witness: list[float]
    pos_margin: float
    unsettled: int = 0

    def to_dict(self) -> dict:
        return {"status": self.status.value, "sphere_min": self.sphere_min, "witness": self.witness,
                "pos_margin": self.pos_margin, "unsettled": self.unsettled}


def sphere_points(dim: int, cfg: SamplingConfig, grid: int = 256) -> np.ndarray:
    """Axis points, seeded points, and for dim <= 3 a circle grid in every coordinate plane."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    eye = np.eye(dim)
    parts = [eye, -eye, sobol_directions(dim, cfg.direction_count, cfg.seed)]
    if dim <= 3:
        th = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
        for i, j in itertools.combinations(range(dim), 2):
            pts = np.zeros((grid, dim))
            pts[:, i], pts[:, j] = np.cos(th), np.sin(th)
            parts.append(pts)
    return normalize_rows(np.concatenate(parts), cfg.norm_p)


def first_order_min_test(f: FunctionHandle, a, m: ValuedMonoid | None = None,
                         cfg: SamplingConfig | None = None) -> ExtremumVerdict:
    """Strict local minimum when the contact is bounded away from 0 on the sphere.

    Finite-dimensional closed balls are compact, which is what makes a
    positive sphere minimum of the contact sufficient for strictness.
    """
    cfg = cfg or SamplingConfig()
    m = m or ValuedMonoid.rplus()
    if f.dim_out != 1:
        raise ValueError("the extremum test needs a scalar function")
    a = as_point(a, f.dim_in)
    fa = value_at(f, a)
    work = ValuedMonoid.rplus() if m.is_real else m
    ev = make_contact_eval(f, a, fa, work, cfg)
    pts = sphere_points(f.dim_in, cfg)
    vals = ev(pts)[:, 0]
    settled = np.isfinite(vals)
    unsettled = int((~settled).sum())
    if not settled.any():
        return ExtremumVerdict(ExtremumStatus.INCONCLUSIVE, float("nan"), [], float("nan"), unsettled)
    i = int(np.nanargmin(vals))
    smin = float(vals[i])
    margin = 10 * cfg.tol_rel * float(np.median(np.abs(vals[settled]))) + cfg.tol_zero
    witness = [float(c) for c in pts[i]]
    if smin < -margin:
        status = ExtremumStatus.NOT_LOCAL_MIN
    elif unsettled == 0 and smin > margin:
        status = ExtremumStatus.STRICT_LOCAL_MIN
    else:
        status = ExtremumStatus.INCONCLUSIVE
    return ExtremumVerdict(status, smin, witness, margin, unsettled)


def contact_global_min_check(h: FunctionHandle | Callable[[np.ndarray], np.ndarray], dim: int | None = None,
                             cfg: SamplingConfig | None = None) -> bool:
    """True iff h >= -tol_zero on the probed unit sphere (h positively homogeneous, h(0) = 0)."""
    cfg = cfg or SamplingConfig()
    if isinstance(h, FunctionHandle):
        dim = h.dim_in
        fn = h.eval
    else:
        fn = h
    vals = np.asarray(fn(sphere_points(dim, cfg)), dtype=float)
    return bool(np.nanmin(vals) >= -cfg.tol_zero)
