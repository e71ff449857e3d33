import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metricjet.catalog import entry
from metricjet.handles import compose, constant, identity, linear, scalar_map, zero
from metricjet.sampling import QuotientTrace
from metricjet.spaces import ContractingSpace, ValuedMonoid
from metricjet.tangency import (
    NotComparable, TangencyStatus, Unbounded, jet_distance, lipschitz_ratio_homog, ll_test, lsl_test,
    norm_homog, quotient_sup, tangency_test, tangency_trace,
)

ABS = scalar_map(np.abs, "|x|")
SQUARE = scalar_map(np.square, "x^2")
X_SIN_LOG = entry("x_sin_log").handle
FRACTAL = ContractingSpace(1, monoid=ValuedMonoid.nr(math.exp(-2 * math.pi)))


def test_quotient_sup_examples(cfg):
    assert quotient_sup(identity(), identity(), [0.0], 1.0, cfg) == 0.0
    assert quotient_sup(SQUARE, zero(1), [0.0], 0.1, cfg) == pytest.approx(0.1, rel=1e-3)
    for r in (1.0, 1e-3):
        assert quotient_sup(ABS, zero(1), [0.0], r, cfg) == pytest.approx(1.0, abs=1e-12)


def test_quotient_sup_needs_equal_values(cfg):
    with pytest.raises(NotComparable):
        quotient_sup(ABS, constant([1.0], 1), [0.0], 0.1, cfg)


def test_tangency_examples(cfg):
    f = scalar_map(lambda x: x + x * x, "x+x^2")
    assert tangency_test(f, identity(), [0.0], cfg).status is TangencyStatus.TANGENT
    v = tangency_test(ABS, identity(), [0.0], cfg)
    assert v.status is TangencyStatus.NOT_TANGENT and v.limit_estimate == pytest.approx(2.0, rel=1e-6)
    f = entry("x2_sin_inv_x2").handle
    assert tangency_test(f, zero(1), [0.0], cfg).status is TangencyStatus.TANGENT


def test_jet_distance_examples(cfg):
    assert jet_distance(linear([[2.0]]), zero(1), [0.0], cfg) == pytest.approx(2.0, rel=1e-9)
    assert jet_distance(X_SIN_LOG, zero(1), [0.0], cfg) == pytest.approx(1.0, abs=1e-3)
    assert jet_distance(ABS, ABS, [0.0], cfg) == 0.0


def test_jet_distance_unbounded(cfg):
    with pytest.raises(Unbounded):
        jet_distance(entry("cbrt").handle, zero(1), [0.0], cfg)


def test_lsl_examples(cfg):
    assert not lsl_test(entry("cbrt").handle, [0.0], cfg).holds
    est = lsl_test(entry("x_sin_inv_x").handle, [0.0], cfg)
    assert est.holds and est.k_estimate == pytest.approx(1.0, abs=1e-2)
    est = lsl_test(constant([3.0], 1), [0.5], cfg)
    assert est.holds and est.k_estimate == 0.0


def test_ll_examples(cfg):
    est = ll_test(ABS, [0.0], cfg)
    assert est.holds and est.k_estimate == pytest.approx(1.0, rel=1e-6)
    assert not ll_test(entry("x2_sin_inv_x2").handle, [0.0], cfg).holds
    est = ll_test(linear([[3.0]]), [0.0], cfg)
    assert est.holds and est.k_estimate == pytest.approx(3.0, rel=1e-6)


def test_norm_homog_examples(cfg):
    assert norm_homog(ABS, ContractingSpace(1), "rplus", cfg) == pytest.approx(1.0)
    assert norm_homog(X_SIN_LOG, FRACTAL, "fractal", cfg) == pytest.approx(1.0, abs=1e-3)
    g = entry("giseh").handle
    s = ContractingSpace(1, monoid=ValuedMonoid.nr(1 / 3))
    assert norm_homog(g, s, "fractal", cfg) == pytest.approx(1.0, abs=1e-3)


def test_lipschitz_ratio_examples(cfg):
    assert lipschitz_ratio_homog(X_SIN_LOG, FRACTAL, "fractal", 0.5, cfg) == pytest.approx(math.sqrt(2), abs=1e-3)
    assert lipschitz_ratio_homog(linear([[3.0]]), ContractingSpace(1), "general", 0.5, cfg) == pytest.approx(3.0, rel=1e-6)
    s = ContractingSpace(1, monoid=ValuedMonoid.nr(1 / 3))
    assert lipschitz_ratio_homog(entry("giseh").handle, s, "fractal", 0.5, cfg) == pytest.approx(1.0, abs=1e-3)


def test_trace_csv_format(cfg):
    tr = tangency_trace(SQUARE, zero(1), [0.0], cfg)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "index,radius,sup_quotient,argmax_1"
    assert len(lines) == len(cfg.radii) + 1
    assert lines[1].split(",")[1] == "0.10000000000000001"
    assert isinstance(tr, QuotientTrace)


# ---------------------------------------------------------------- properties

SCALAR_MAPS_AT_0 = {
    "abs": ABS, "id": identity(), "square": SQUARE, "x_sin_log": X_SIN_LOG,
    "neg_abs": scalar_map(lambda x: -np.abs(x), "-|x|"), "three": linear([[3.0]]),
    "giseh": entry("giseh").handle, "x2sin": entry("x2_sin_inv_x").handle,
}
NAMES = sorted(SCALAR_MAPS_AT_0)


def test_trace_monotone(cfg):
    for f in SCALAR_MAPS_AT_0.values():
        vals = tangency_trace(f, zero(1), [0.0], cfg).sup_quotients
        assert all(b <= a + cfg.tol_rel for a, b in zip(vals, vals[1:]))


def test_quotient_sup_monotone_in_radius(cfg):
    f = X_SIN_LOG
    prev = math.inf
    for r in (1.0, 0.3, 0.1, 0.03):
        q = quotient_sup(f, zero(1), [0.0], r, cfg)
        assert q <= prev + cfg.tol_rel
        prev = q


@given(st.sampled_from(NAMES), st.sampled_from(NAMES), st.sampled_from(NAMES))
def test_jet_distance_metric(i, j, k):
    from metricjet.sampling import SamplingConfig
    cfg = SamplingConfig()
    f, g, h = SCALAR_MAPS_AT_0[i], SCALAR_MAPS_AT_0[j], SCALAR_MAPS_AT_0[k]
    dfg = jet_distance(f, g, [0.0], cfg)
    dgf = jet_distance(g, f, [0.0], cfg)
    assert abs(dfg - dgf) <= 2 * cfg.tol_rel
    dgh = jet_distance(g, h, [0.0], cfg)
    dfh = jet_distance(f, h, [0.0], cfg)
    assert dfh <= dfg + dgh + 2 * cfg.tol_rel


HOMOGENEOUS = [
    ("abs", ABS, ContractingSpace(1), "rplus"),
    ("three", linear([[3.0]]), ContractingSpace(1), "general"),
    ("max2", entry("max", 2).handle, ContractingSpace(2), "rplus"),
    ("n1", entry("n1", 2).handle, ContractingSpace(2), "rplus"),
    ("x_sin_log", X_SIN_LOG, FRACTAL, "fractal"),
    ("giseh", entry("giseh").handle, ContractingSpace(1, monoid=ValuedMonoid.nr(1 / 3)), "fractal"),
]


@pytest.mark.parametrize("name,h,s,cls", HOMOGENEOUS, ids=[h[0] for h in HOMOGENEOUS])
def test_norm_below_ratio(name, h, s, cls, cfg):
    assert norm_homog(h, s, cls, cfg) <= lipschitz_ratio_homog(h, s, cls, 0.5, cfg) + cfg.tol_rel


@given(st.floats(-4, 4).filter(lambda v: abs(v) > 1e-3))
def test_linear_norm_equals_ratio(c):
    from metricjet.sampling import SamplingConfig
    cfg = SamplingConfig()
    h = linear([[c]])
    s = ContractingSpace(1)
    n, r = norm_homog(h, s, "general", cfg), lipschitz_ratio_homog(h, s, "general", 0.5, cfg)
    assert abs(n - r) <= cfg.tol_rel * max(1, abs(c))


@given(st.floats(-2, 2), st.floats(0.05, 2))
def test_mean_value_bound(a, length):
    from metricjet.sampling import SamplingConfig
    cfg = SamplingConfig(radii=(1e-2, 1e-3, 1e-4), samples_per_shell=64)
    f = X_SIN_LOG
    b = a + length
    ks = [lsl_test(f, [t], cfg).k_estimate for t in np.linspace(a, b, 19)[1:-1]]
    k = max(ks)
    fa, fb = f.eval([[a], [b]])[:, 0]
    assert abs(fb - fa) <= k * (b - a) * (1 + cfg.tol_rel)


LSL_PAIRS = [
    (scalar_map(lambda x: x + x * x, "x+x^2"), identity()),
    (entry("x2_sin_inv_x2").handle, zero(1)),
    (entry("x2_sin_inv_x").handle, zero(1)),
    (scalar_map(lambda x: np.cbrt(x) + x * x, "cbrt+x^2"), entry("cbrt").handle),
]


@pytest.mark.parametrize("f,g", LSL_PAIRS)
def test_lsl_transfers_under_tangency(f, g, cfg):
    if tangency_test(f, g, [0.0], cfg).status is TangencyStatus.TANGENT:
        assert lsl_test(f, [0.0], cfg).holds == lsl_test(g, [0.0], cfg).holds


def test_composition_of_ratios(cfg):
    s = ContractingSpace(1)
    h0, h1 = ABS, linear([[-2.0]])
    comp = compose(h1, h0)
    lhs = lipschitz_ratio_homog(comp, s, "rplus", 0.5, cfg)
    rhs = lipschitz_ratio_homog(h1, s, "rplus", 0.5, cfg) * lipschitz_ratio_homog(h0, s, "rplus", 0.5, cfg)
    assert lhs <= rhs + cfg.tol_rel
