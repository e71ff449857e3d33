"""Registry of example maps with exact evaluators, closed-form contacts and ground-truth labels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cantor import cantor_distance_array, cantor_locate
from .handles import FunctionHandle, identity, linear, scalar_map
from .spaces import MonoidKind, ValuedMonoid, ratio_label, vector_norm

TWO_PI_RATIO = math.exp(-2 * math.pi)
PROBE_RATIOS = (0.5, 1 / 3, TWO_PI_RATIO)
TIE_TOL = 1e-12

Y, N, U = "Yes", "No", "Unknown"


def nf_label(r: float) -> str:
    return f"NF({ratio_label(r)})"


LABELS = ("C0", "LSL", "LL", "Tang", "Gdiff", *[nf_label(r) for r in PROBE_RATIOS], "Diff", "StdR")


class UnknownEntry(KeyError):
    pass


class NoClosedForm(LookupError):
    pass


class PeriodicityError(ValueError):
    pass


def flags(c0=Y, lsl=Y, ll=Y, tang=Y, gdiff=Y, nf=None, diff=Y, stdr=Y) -> dict[str, str]:
    """Label map; ``nf`` defaults to the G-diff value for every probed ratio."""
    nf = nf if nf is not None else {}
    out = {"C0": c0, "LSL": lsl, "LL": ll, "Tang": tang, "Gdiff": gdiff}
    for r in PROBE_RATIOS:
        out[nf_label(r)] = nf.get(ratio_label(r), gdiff)
    out["Diff"] = diff
    out["StdR"] = stdr
    return out


@dataclass(frozen=True)
class LabeledPoint:
    name: str
    point: tuple[float, ...]
    flags: dict[str, str]
    strict_min: bool | None = None
    scenario: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    handle: FunctionHandle
    note: str
    points: tuple[LabeledPoint, ...] = ()
    closed_contact: Callable[[np.ndarray, ValuedMonoid], FunctionHandle] | None = None

    def ground_truth(self, point_name: str) -> dict[str, str]:
        for p in self.points:
            if p.name == point_name:
                return dict(p.flags)
        raise KeyError(point_name)

    def summary(self) -> str:
        parts = []
        for p in self.points:
            yes = [k for k, v in p.flags.items() if v == Y]
            no = [k for k, v in p.flags.items() if v == N]
            parts.append(f"at {p.name}: yes={','.join(yes) or '-'} no={','.join(no) or '-'}")
        return "; ".join(parts)


# ---------------------------------------------------------------- safe scalar helpers

def _nz(x: np.ndarray) -> np.ndarray:
    return np.where(x == 0, 1.0, x)


def x_sin_inv(power: int, inner_power: int):
    def fn(x: np.ndarray) -> np.ndarray:
        return np.where(x != 0, x**power * np.sin(1.0 / _nz(x) ** inner_power), 0.0)

    return fn


def x_sin_log(x: np.ndarray) -> np.ndarray:
    return np.where(x != 0, x * np.sin(np.log(np.abs(_nz(x)))), 0.0)


def x_sin_loglog(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    safe = (ax != 0) & (ax != 1)
    inner = np.log(np.abs(np.log(np.where(safe, ax, 2.0))))
    return np.where(safe, x * np.sin(inner), 0.0)


def giseh(x: np.ndarray) -> np.ndarray:
    return cantor_distance_array(x)


def giseh_reflected(x: np.ndarray) -> np.ndarray:
    return cantor_distance_array(-np.asarray(x, dtype=float))


# ---------------------------------------------------------------- multivariate maps

def max_map(n: int) -> FunctionHandle:
    return FunctionHandle(n, 1, lambda x: x.max(axis=1, keepdims=True), label="Max")


def min_map(n: int) -> FunctionHandle:
    return FunctionHandle(n, 1, lambda x: x.min(axis=1, keepdims=True), label="Min")


def norm_map(n: int, p: float) -> FunctionHandle:
    tag = {1.0: "N1", 2.0: "N2"}.get(float(p), "Ninf")
    return FunctionHandle(n, 1, lambda x: vector_norm(x, p)[:, None], label=tag)


def fp_map(p: float, n: int) -> FunctionHandle:
    """x -> sin(log |x|_p) x, with 0 -> 0."""
    if p not in (1, 2, np.inf):
        raise ValueError("p must be 1, 2 or inf")

    def func(x: np.ndarray) -> np.ndarray:
        nx = vector_norm(x, p)
        lam = np.where(nx > 0, np.sin(np.log(np.where(nx > 0, nx, 1.0))), 0.0)
        return lam[:, None] * x

    return FunctionHandle(n, n, func, label=f"f^{p}")


def x_sin_y_over_x(x: np.ndarray) -> np.ndarray:
    a, b = x[:, 0], x[:, 1]
    return np.where(a != 0, a * np.sin(b / _nz(a)), 0.0)[:, None]


def xy2_over(x: np.ndarray) -> np.ndarray:
    a, b = x[:, 0], x[:, 1]
    d = a * a + b * b
    return np.where(d > 0, a * b * b / np.where(d > 0, d, 1.0), 0.0)[:, None]


# ---------------------------------------------------------------- tie sets and closed forms

def _exact(a) -> bool:
    return np.asarray(a).dtype == object


def tie_set(values, target, tol: float = TIE_TOL) -> np.ndarray:
    if _exact(values):
        return np.array([v == target for v in values])
    v = np.asarray(values, dtype=float)
    return np.abs(v - float(target)) <= tol * max(1.0, abs(float(target)))


def _select(mask: np.ndarray, signs: np.ndarray | None, reducer: str):
    idx = np.flatnonzero(mask)
    sg = np.ones(len(idx)) if signs is None else np.asarray(signs, dtype=float)[idx]

    def func(x: np.ndarray) -> np.ndarray:
        v = x[:, idx] * sg
        return (v.max(axis=1) if reducer == "max" else v.min(axis=1))[:, None]

    return func


def contact_max(a) -> FunctionHandle:
    a_arr = np.asarray(a, dtype=object if _exact(a) else float)
    ties = tie_set(a_arr, max(a_arr))
    func = _select(ties, None, "max")
    return FunctionHandle(len(a_arr), 1, func, label=f"Max{np.flatnonzero(ties).tolist()}")


def contact_min(a) -> FunctionHandle:
    a_arr = np.asarray(a, dtype=object if _exact(a) else float)
    ties = tie_set(a_arr, min(a_arr))
    func = _select(ties, None, "min")
    return FunctionHandle(len(a_arr), 1, func, label=f"Min{np.flatnonzero(ties).tolist()}")


def _sign(a) -> np.ndarray:
    return np.array([1.0 if v > 0 else -1.0 if v < 0 else 0.0 for v in a])


def contact_ninf(a) -> FunctionHandle:
    a_arr = np.asarray(a, dtype=object if _exact(a) else float)
    n = len(a_arr)
    absa = np.array([abs(v) for v in a_arr], dtype=a_arr.dtype)
    top = max(absa)
    if top == 0:
        return norm_map(n, np.inf)
    ties = tie_set(absa, top)
    func = _select(ties, _sign(a_arr), "max")
    return FunctionHandle(n, 1, func, label="k(Ninf)")


def contact_n1(a) -> FunctionHandle:
    a_arr = np.asarray(a, dtype=object if _exact(a) else float)
    zero = tie_set(a_arr, 0)
    sg = np.where(zero, 0.0, _sign(a_arr))

    def func(x: np.ndarray) -> np.ndarray:
        return (np.abs(x[:, zero]).sum(axis=1) + (x[:, ~zero] * sg[~zero]).sum(axis=1))[:, None]

    return FunctionHandle(len(a_arr), 1, func, label="k(N1)")


def contact_n2(a) -> FunctionHandle:
    a_arr = np.asarray(a, dtype=float)
    na = float(np.linalg.norm(a_arr))
    if na == 0:
        return norm_map(len(a_arr), 2)
    return linear((a_arr / na)[None, :], label="grad N2")


def contact_theta(a) -> FunctionHandle:
    a0 = float(np.asarray(a, dtype=float).reshape(-1)[0])
    if a0 == 0:
        return scalar_map(np.abs, "|x|")
    return linear([[math.copysign(1.0, a0)]], label="sign(a)x")


def contact_giseh(a, m: ValuedMonoid) -> FunctionHandle:
    a0 = float(np.asarray(a, dtype=float).reshape(-1)[0])
    if a0 < 0:
        return linear([[-1.0]], label="-x")
    loc = cantor_locate(a0)
    if not loc.in_kinf:
        lo, hi = (float(v) for v in loc.bracket)
        mid = 0.5 * (lo + hi)
        if abs(a0 - mid) <= TIE_TOL * max(1.0, mid):
            return scalar_map(lambda x: -np.abs(x), "-|x|")
        return linear([[1.0 if a0 < mid else -1.0]], label="slope")
    if m.kind is not MonoidKind.NR or not math.isclose(m.r, 1 / 3, rel_tol=1e-9):
        raise NoClosedForm("on the Cantor set the contact is only known for ratio 1/3")
    if loc.in_kplus:
        return scalar_map(giseh, "g")
    if loc.in_kminus:
        return scalar_map(giseh_reflected, "g(-x)")
    raise NoClosedForm("point of K_inf with no adjacent gap")


# ---------------------------------------------------------------- fractal constructor

def fractal_from_periodic(fp: FunctionHandle, T: float, check_points: int = 32, seed: int = 0) -> FunctionHandle:
    """phi(x) = x * fp(log|x|), phi(0) = 0, which satisfies phi(e^-T x) = e^-T phi(x).

    ``fp`` must be T-periodic; this is spot-checked on ``check_points`` samples.
    """
    if fp.dim_in != 1 or fp.dim_out != 1:
        raise ValueError("fp must map R to R")
    if not T > 0:
        raise ValueError("period must be positive")
    u = np.random.default_rng(seed).uniform(-4 * T, 4 * T, size=(check_points, 1))
    a, b = fp.eval(u)[:, 0], fp.eval(u + T)[:, 0]
    bad = np.abs(a - b) > 1e-9 * (1 + np.abs(a))
    if bad.any():
        i = int(np.argmax(bad))
        raise PeriodicityError(f"fp({u[i, 0]:.6g} + T) != fp({u[i, 0]:.6g})")

    def func(x: np.ndarray) -> np.ndarray:
        x0 = x[:, 0]
        nz = x0 != 0
        logs = np.log(np.abs(np.where(nz, x0, 1.0)))[:, None]
        return np.where(nz, x0 * fp.eval(logs)[:, 0], 0.0)[:, None]

    return FunctionHandle(1, 1, func, label=f"frac[{fp.label}]")


def harmonic(n: int, T: float = 2 * math.pi) -> FunctionHandle:
    w = 2 * math.pi * n / T
    return scalar_map(lambda u: np.sin(w * u), f"sin({n}*2pi*u/T)")


def fractal_family(count: int, T: float = 2 * math.pi) -> list[FunctionHandle]:
    return [fractal_from_periodic(harmonic(n, T), T) for n in range(1, count + 1)]


def gram_from_distances(dist: np.ndarray, to_zero: np.ndarray) -> np.ndarray:
    """G_ij = (d_i0^2 + d_j0^2 - d_ij^2) / 2 from pairwise and to-origin distances."""
    d0 = np.asarray(to_zero, dtype=float)
    return 0.5 * (d0[:, None] ** 2 + d0[None, :] ** 2 - np.asarray(dist, dtype=float) ** 2)


# ---------------------------------------------------------------- registry

def _lp(name, point, fl, strict_min=None, scenario=""):
    return LabeledPoint(name, tuple(float(v) for v in point), fl, strict_min, scenario)


def _any_monoid(fn):
    return lambda a, m: fn(a)


_NF_FRACTAL_ONLY = {"0.5": N, "1/3": N, "e^-2pi": Y}
_NF_THIRD_ONLY = {"0.5": N, "1/3": Y, "e^-2pi": N}


def _build(name: str, dim: int | None) -> CatalogEntry:
    d = dim or 2
    z = [0.0] * d
    if name == "theta":
        return CatalogEntry(name, scalar_map(np.abs, "|x|"), "absolute value; Lipschitz cone at 0",
                            (_lp("0", [0], flags(diff=N, stdr=N), True, "2/2''/5"),
                             _lp("1", [1], flags())),
                            _any_monoid(contact_theta))
    if name == "identity":
        return CatalogEntry(name, identity(1), "identity on R", (_lp("0", [0], flags(), False),),
                            lambda a, m: identity(1))
    if name == "square":
        return CatalogEntry(name, scalar_map(np.square, "x^2"), "smooth with vanishing derivative at 0",
                            (_lp("0", [0], flags(), None), _lp("1", [1], flags())),
                            lambda a, m: linear([[2.0 * float(np.asarray(a).reshape(-1)[0])]], "2a x"))
    if name == "max":
        return CatalogEntry(name, max_map(d), "coordinate maximum",
                            (_lp("0", z, flags(diff=N, stdr=N), False),), _any_monoid(contact_max))
    if name == "min":
        return CatalogEntry(name, min_map(d), "coordinate minimum",
                            (_lp("0", z, flags(diff=N, stdr=N), False),), _any_monoid(contact_min))
    if name in ("n1", "n2", "ninf"):
        p = {"n1": 1, "n2": 2, "ninf": np.inf}[name]
        fn = {"n1": contact_n1, "n2": contact_n2, "ninf": contact_ninf}[name]
        return CatalogEntry(name, norm_map(d, p), f"the {name[1:]}-norm",
                            (_lp("0", z, flags(diff=N, stdr=N), True),), _any_monoid(fn))
    if name == "x2_sin_inv_x":
        return CatalogEntry(name, scalar_map(x_sin_inv(2, 1), "x^2 sin(1/x)"),
                            "differentiable at 0 with a discontinuous derivative",
                            (_lp("0", [0], flags(), None, "1"),),
                            lambda a, m: linear([[0.0]], "0"))
    if name == "x2_sin_inv_x2":
        return CatalogEntry(name, scalar_map(x_sin_inv(2, 2), "x^2 sin(1/x^2)"),
                            "differentiable at 0 but not locally lipschitz there",
                            (_lp("0", [0], flags(ll=N), None, "6"),),
                            lambda a, m: linear([[0.0]], "0"))
    if name == "x_sin_inv_x":
        return CatalogEntry(name, scalar_map(x_sin_inv(1, 1), "x sin(1/x)"),
                            "semi-lipschitz at 0 without a tangent jet",
                            (_lp("0", [0], flags(ll=N, tang=N, gdiff=N, diff=N, stdr=N), None, "7"),))
    if name == "cbrt":
        return CatalogEntry(name, scalar_map(np.cbrt, "x^(1/3)"), "continuous, not semi-lipschitz at 0",
                            (_lp("0", [0], flags(lsl=N, ll=N, tang=N, gdiff=N, diff=N, stdr=N), None, "8"),))
    if name == "x_sin_log":
        return CatalogEntry(name, scalar_map(x_sin_log, "x sin(log|x|)"),
                            "e^-2pi self-similar; its jet at 0 has norm 1 and ratio sqrt 2",
                            (_lp("0", [0], flags(gdiff=N, nf=_NF_FRACTAL_ONLY, diff=N, stdr=N), None, "3"),),
                            _fractal_self_contact(scalar_map(x_sin_log, "x sin(log|x|)")))
    if name == "x_sin_loglog":
        dom = lambda x: np.abs(x) != 1.0  # noqa: E731
        return CatalogEntry(name, scalar_map(x_sin_loglog, "x sin(log|log|x||)", dom),
                            "lipschitz at 0 with no contact for any tried monoid",
                            (_lp("0", [0], flags(tang=U, gdiff=N, diff=N, stdr=N), None, "4"),))
    if name == "xy2_over_x2y2":
        return CatalogEntry(name, FunctionHandle(2, 1, xy2_over, label="xy^2/(x^2+y^2)"),
                            "homogeneous under the standard real action, not differentiable at 0",
                            (_lp("0", [0, 0], flags(diff=N), None, "2'"),),
                            lambda a, m: FunctionHandle(2, 1, xy2_over, label="self"))
    if name == "x_sin_y_over_x":
        return CatalogEntry(name, FunctionHandle(2, 1, x_sin_y_over_x, label="x sin(y/x)"),
                            "homogeneous under the standard real action but not lipschitz near 0",
                            (_lp("0", [0, 0], flags(ll=N, tang=N, gdiff=N, diff=N, stdr=N), None, "hom-not-lip"),))
    if name == "giseh":
        gdn = flags(gdiff=N, nf=_NF_THIRD_ONLY, diff=N, stdr=N)
        return CatalogEntry(name, scalar_map(giseh, "g"), "distance to the scaled Cantor set; 1/3 self-similar",
                            (_lp("0", [0], gdn, None, "K+"), _lp("2/3", [2 / 3], gdn, None, "K+"),
                             _lp("1/3", [1 / 3], gdn, None, "K-"),
                             _lp("1/2", [0.5], flags(diff=N, stdr=N), None, "gap peak")),
                            contact_giseh)
    if name == "fp":
        h = fp_map(2, d)
        return CatalogEntry(name, h, "x -> sin(log|x|) x on R^n, e^-2pi self-similar",
                            (_lp("0", z, flags(gdiff=N, nf=_NF_FRACTAL_ONLY, diff=N, stdr=N)),),
                            _fractal_self_contact(h))
    raise UnknownEntry(name)


def _fractal_self_contact(h: FunctionHandle):
    def contact(a, m: ValuedMonoid) -> FunctionHandle:
        if np.any(np.asarray(a, dtype=float) != 0):
            raise NoClosedForm("closed form only at the center")
        if m.kind is not MonoidKind.NR or not math.isclose(m.r, TWO_PI_RATIO, rel_tol=1e-9):
            raise NoClosedForm("closed form only for ratio e^-2pi")
        return h

    return contact


NAMES = ("theta", "identity", "square", "max", "min", "n1", "n2", "ninf", "x2_sin_inv_x", "x2_sin_inv_x2",
         "x_sin_inv_x", "cbrt", "x_sin_log", "x_sin_loglog", "xy2_over_x2y2", "x_sin_y_over_x", "giseh", "fp")

MULTIDIM = ("max", "min", "n1", "n2", "ninf", "fp")


def entry(name: str, dim: int | None = None) -> CatalogEntry:
    if name not in NAMES:
        raise UnknownEntry(f"unknown catalog entry {name!r}; known: {', '.join(NAMES)}")
    return _build(name, dim)


def contact_closed_form(name: str, a, monoid: ValuedMonoid | None = None) -> FunctionHandle:
    a = np.asarray(a, dtype=object if _exact(a) else float).reshape(-1)
    e = entry(name, len(a) if name in MULTIDIM else None)
    if e.closed_contact is None:
        raise NoClosedForm(f"{name} has no closed-form contact")
    return e.closed_contact(a, monoid or ValuedMonoid.rplus())


@dataclass(frozen=True)
class CorpusRow:
    entry: str
    point: str
    dim: int | None = None
    extra: dict = field(default_factory=dict)


COUNTEREXAMPLES = (
    CorpusRow("x2_sin_inv_x", "0"),
    CorpusRow("theta", "0"),
    CorpusRow("xy2_over_x2y2", "0"),
    CorpusRow("x_sin_log", "0"),
    CorpusRow("x_sin_loglog", "0"),
    CorpusRow("x2_sin_inv_x2", "0"),
    CorpusRow("x_sin_inv_x", "0"),
    CorpusRow("cbrt", "0"),
    CorpusRow("x_sin_y_over_x", "0", extra={"homogeneous_not_lipschitz": True}),
    CorpusRow("giseh", "0"),
    CorpusRow("giseh", "2/3"),
    CorpusRow("giseh", "1/2"),
    CorpusRow("theta", "1"),
)


def labeled_point(name: str, point: str, dim: int | None = None) -> tuple[CatalogEntry, LabeledPoint]:
    e = entry(name, dim)
    for p in e.points:
        if p.name == point:
            return e, p
    raise KeyError(f"{name} has no labeled point {point!r}")


def list_entries() -> list[dict]:
    out = []
    for name in NAMES:
        e = entry(name)
        out.append({"name": name, "dim_in": e.handle.dim_in, "dim_out": e.handle.dim_out,
                    "ground_truth": e.summary(), "note": e.note})
    return out
