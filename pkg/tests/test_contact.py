import math

import numpy as np
import pytest

from metricjet.catalog import NoClosedForm, contact_closed_form, entry
from metricjet.contact import (
    ContactStatus, GDiff1D, NoGDiff, TraceState, directional_quotient, estimate_contact, gdiff_1d,
    homogeneity_check, is_linear, verify_contact,
)
from metricjet.handles import FunctionHandle, identity, linear, scalar_map
from metricjet.sampling import direction_set, normalize_rows
from metricjet.spaces import ContractingSpace, ValuedMonoid, Variant
from metricjet.tangency import TangencyStatus, norm_homog, tangency_test

RPLUS = ValuedMonoid.rplus()
R2PI = math.exp(-2 * math.pi)
ABS = scalar_map(np.abs, "|x|")


def test_directional_quotient_examples(cfg):
    tr = directional_quotient(ABS, [0.0], [-1.0], RPLUS, cfg)
    assert tr.state is TraceState.CONVERGED and np.all(np.array(tr.values) == 1.0)
    f = entry("x_sin_log").handle
    m = ValuedMonoid.nr(R2PI)
    tr = directional_quotient(f, [0.0], [1.0], m, cfg)
    np.testing.assert_allclose(tr.values, 0.0, atol=1e-9)
    x = math.exp(math.pi / 2)
    tr = directional_quotient(f, [0.0], [x], m, cfg)
    np.testing.assert_allclose(np.array(tr.values)[:, 0], f.eval([[x]])[0, 0], rtol=1e-9)
    np.testing.assert_allclose(tr.scales, R2PI ** np.arange(len(tr.scales)), rtol=1e-12)
    tr = directional_quotient(entry("x_sin_inv_x").handle, [0.0], [1.0], RPLUS, cfg)
    assert tr.state is TraceState.OSCILLATING and tr.limit is None


def test_estimate_contact_examples(cfg):
    f = entry("xy2_over_x2y2").handle
    v = estimate_contact(f, [0.0, 0.0], ValuedMonoid.reals(), cfg, variant=Variant.STANDARD)
    assert v.status is ContactStatus.CONTACTABLE
    x = np.random.default_rng(3).normal(size=(32, 2))
    np.testing.assert_allclose(v.contact_eval(x), f.eval(x), atol=1e-9)

    v = estimate_contact(scalar_map(np.square, "x^2"), [1.0], RPLUS, cfg)
    assert v.status is ContactStatus.CONTACTABLE
    np.testing.assert_allclose(v.contact_eval(np.array([[0.5], [-2.0]])), [[1.0], [-4.0]], rtol=1e-6)

    f = entry("x_sin_loglog").handle
    for m in (RPLUS, ValuedMonoid.nr(0.5), ValuedMonoid.nr(1 / 3), ValuedMonoid.nr(R2PI)):
        v = estimate_contact(f, [0.0], m, cfg)
        assert v.status is ContactStatus.NOT_CONTACTABLE, m.label
        assert v.oscillation_witness is not None


def test_contact_fixes_center(cfg):
    v = estimate_contact(entry("n2", 2).handle, [0.0, 0.0], RPLUS, cfg)
    np.testing.assert_array_equal(v.contact_eval(np.zeros((1, 2))), [[0.0]])


def test_estimate_contact_rejects_bad_base(cfg):
    f = FunctionHandle(1, 1, lambda x: np.log(x), lambda x: x[:, 0] > 0, "log")
    with pytest.raises(ValueError):
        estimate_contact(f, [0.0], RPLUS, cfg)
    with pytest.raises(ValueError):
        estimate_contact(ABS, [0.0], ValuedMonoid.nr(0.5), cfg, variant="standard")


def test_standard_variant_requires_odd_contact(cfg):
    v = estimate_contact(ABS, [0.0], ValuedMonoid.reals(), cfg, variant="standard")
    assert v.status is ContactStatus.NOT_CONTACTABLE
    v = estimate_contact(identity(), [0.0], ValuedMonoid.reals(), cfg, variant="standard")
    assert v.status is ContactStatus.CONTACTABLE


def test_gdiff_examples(cfg):
    g = gdiff_1d(ABS, 0.0, cfg)
    assert isinstance(g, GDiff1D)
    assert abs(g.left + 1) <= 1e-9 and abs(g.right - 1) <= 1e-9
    g = gdiff_1d(scalar_map(np.square, "x^2"), 1.0, cfg)
    assert g.left == pytest.approx(2.0, abs=1e-6) and g.right == pytest.approx(2.0, abs=1e-6)
    assert isinstance(gdiff_1d(entry("cbrt").handle, 0.0, cfg), NoGDiff)


def test_gdiff_assembly_matches_contact(cfg):
    for f, a in ((ABS, 0.0), (entry("x2_sin_inv_x").handle, 0.0), (scalar_map(lambda x: np.maximum(x, 3 * x), "m"), 0.0)):
        g = gdiff_1d(f, a, cfg)
        v = estimate_contact(f, [a], RPLUS, cfg)
        x = np.linspace(-2, 2, 9)[:, None]
        np.testing.assert_allclose(g.assemble().eval(x), v.contact_eval(x), atol=1e-6)
        lip = max(abs(g.left), abs(g.right))
        h = g.assemble()
        assert homogeneity_check(h, RPLUS, cfg=cfg).holds
        y = x[::-1]
        assert np.all(np.abs(h.eval(x) - h.eval(y)) <= lip * np.abs(x - y) + 1e-12)


def test_homogeneity_examples(cfg):
    assert homogeneity_check(entry("max", 2).handle, RPLUS, cfg=cfg).holds
    res = homogeneity_check(scalar_map(lambda x: x + 1, "x+1"), RPLUS, cfg=cfg)
    assert not res.holds and res.witness[0] == 0.0
    assert homogeneity_check(entry("giseh").handle, ValuedMonoid.nr(1 / 3), cfg=cfg).holds
    assert not homogeneity_check(entry("giseh").handle, ValuedMonoid.nr(0.5), cfg=cfg).holds


def test_verify_contact_examples(cfg):
    assert verify_contact(ABS, [0.0], ABS, cfg)
    assert not verify_contact(ABS, [0.0], identity(), cfg)
    p1 = linear([[1.0, 0.0]])
    assert verify_contact(entry("max", 2).handle, [1.0, 0.0], p1, cfg)


# ---------------------------------------------------------------- properties

HOMOGENEOUS = {
    "theta": (ABS, [0.0], RPLUS),
    "max3": (entry("max", 3).handle, [0.0] * 3, RPLUS),
    "min2": (entry("min", 2).handle, [0.0] * 2, RPLUS),
    "n1": (entry("n1", 2).handle, [0.0] * 2, RPLUS),
    "ninf": (entry("ninf", 3).handle, [0.0] * 3, RPLUS),
    "x_sin_log": (entry("x_sin_log").handle, [0.0], ValuedMonoid.nr(R2PI)),
    "fp2": (entry("fp", 2).handle, [0.0, 0.0], ValuedMonoid.nr(R2PI)),
    "giseh": (entry("giseh").handle, [0.0], ValuedMonoid.nr(1 / 3)),
    "xy2": (entry("xy2_over_x2y2").handle, [0.0, 0.0], RPLUS),
}


@pytest.mark.parametrize("name", sorted(HOMOGENEOUS))
def test_homogeneous_reconstruction(name, cfg):
    h, a, m = HOMOGENEOUS[name]
    v = estimate_contact(h, a, m, cfg)
    assert v.status is ContactStatus.CONTACTABLE
    x = np.random.default_rng(5).uniform(-1.5, 1.5, size=(24, len(a)))
    got = v.contact_eval(x)
    assert np.nanmax(np.abs(got - h.eval(x))) <= cfg.tol_rel
    # contact bound by its norm
    s = ContractingSpace(len(a), monoid=m)
    cls = "rplus" if m.is_real else "fractal"
    nrm = norm_homog(h, s, cls, cfg)
    nx = np.linalg.norm(x, axis=1)
    assert np.all(np.linalg.norm(got, axis=1) <= nrm * nx * (1 + cfg.tol_rel) + 1e-12)


def test_uniqueness_witness(cfg):
    hs = [ABS, identity(), scalar_map(lambda x: -np.abs(x), "-|x|"), linear([[2.0]]),
          entry("x_sin_log").handle, entry("giseh").handle]
    for i, h1 in enumerate(hs):
        for h2 in hs[i + 1:]:
            assert tangency_test(h1, h2, [0.0], cfg).status is TangencyStatus.NOT_TANGENT


RESTRICTION_POINTS = [
    ("theta", [0.0]), ("theta", [1.0]), ("max", [0.0, 0.0]), ("n1", [0.0, 2.0]), ("ninf", [1.0, -1.0, 0.5]),
    ("x2_sin_inv_x", [0.0]), ("xy2_over_x2y2", [0.0, 0.0]), ("square", [1.0]),
]


@pytest.mark.parametrize("name,a", RESTRICTION_POINTS)
def test_restriction_coherence(name, a, cfg):
    f = entry(name, len(a)).handle
    dirs = normalize_rows(direction_set(len(a), cfg, count=16), 2)
    base = estimate_contact(f, a, RPLUS, cfg, directions=dirs)
    assert base.status is ContactStatus.CONTACTABLE
    for r in (0.5, 1 / 3, R2PI):
        v = estimate_contact(f, a, ValuedMonoid.nr(r), cfg, directions=dirs)
        assert v.status is ContactStatus.CONTACTABLE
        assert np.max(np.abs(v.limits() - base.limits())) <= cfg.tol_rel


DIFF_TRUTH = [("theta", [0.0], False), ("theta", [1.0], True), ("square", [0.0], True), ("max", [0.0, 0.0], False),
              ("max", [2.0, 1.0], True), ("n2", [1.0, 1.0], True), ("n1", [0.0, 1.0], False),
              ("x2_sin_inv_x", [0.0], True), ("xy2_over_x2y2", [0.0, 0.0], False)]


@pytest.mark.parametrize("name,a,diff", DIFF_TRUTH)
def test_differentiability_detection(name, a, diff, cfg):
    f = entry(name, len(a)).handle
    v = estimate_contact(f, a, RPLUS, cfg)
    assert v.status is ContactStatus.CONTACTABLE
    assert is_linear(v.contact_eval, len(a), cfg)[0] is diff


CLOSED = [("theta", [0.0]), ("max", [1.0, 1.0, 0.0]), ("min", [0.0, 0.0]), ("n1", [0.0, 2.0]), ("n2", [0.0, 0.0]),
          ("n2", [3.0, 4.0]), ("ninf", [1.0, -1.0])]


@pytest.mark.parametrize("name,a", CLOSED)
def test_closed_forms_are_contacts(name, a, cfg):
    f = entry(name, len(a)).handle
    h = contact_closed_form(name, a)
    assert verify_contact(f, a, h, cfg)


def test_no_closed_form(cfg):
    with pytest.raises(NoClosedForm):
        contact_closed_form("x_sin_inv_x", [0.0])
    with pytest.raises(NoClosedForm):
        contact_closed_form("giseh", [0.0], ValuedMonoid.nr(0.5))
