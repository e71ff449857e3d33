"""Per-point classification along the implication ladder and the counter-example suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import COUNTEREXAMPLES, LABELS, N, PROBE_RATIOS, U, Y, labeled_point, nf_label
from .contact import ContactStatus, estimate_contact, homogeneity_check, is_linear, is_odd
from .handles import FunctionHandle
from .sampling import SamplingConfig, direction_set, normalize_rows
from .spaces import ValuedMonoid, Variant
from .tangency import as_point, continuity_test, ll_test, lsl_test, tangentiability_obstruction


@dataclass
class ClassificationReport:
    point: list[float]
    flags: dict[str, str]
    evidence: dict[str, dict] = field(default_factory=dict)
    probe_rs: tuple[float, ...] = PROBE_RATIOS

    def to_dict(self) -> dict:
        return {"point": self.point, "flags": dict(self.flags), "evidence": self.evidence}


def _edges(labels) -> dict[str, list[str]]:
    nfs = [lab for lab in labels if lab.startswith("NF(")]
    return {
        "Diff": ["StdR"],
        "StdR": ["Gdiff"],
        "Gdiff": [*nfs, "Tang"],
        **{lab: ["Tang"] for lab in nfs},
        "LL": ["Tang"],
        "Tang": ["LSL"],
        "LSL": ["C0"],
    }


def _closure(edges: dict[str, list[str]]) -> dict[str, set[str]]:
    out = {}
    for start in edges:
        seen, stack = set(), list(edges.get(start, []))
        while stack:
            q = stack.pop()
            if q not in seen:
                seen.add(q)
                stack.extend(edges.get(q, []))
        out[start] = seen
    return out


def check_ladder(rep: ClassificationReport | dict) -> list[str]:
    """Implications whose premise is Yes while a consequence is No. Unknown never violates."""
    fl = rep.flags if isinstance(rep, ClassificationReport) else dict(rep)
    labels = set(fl) | {"Diff", "StdR", "Gdiff", "LL", "Tang", "LSL", "C0"}
    reach = _closure(_edges(labels))
    out = []
    for p in sorted(reach):
        if fl.get(p) != Y:
            continue
        for q in sorted(reach[p]):
            if fl.get(q) == N:
                out.append(f"{p}=Yes but {q}=No")
    return out


def _contact_flag(status: ContactStatus) -> str:
    return {ContactStatus.CONTACTABLE: Y, ContactStatus.NOT_CONTACTABLE: N}.get(status, U)


def _contact_evidence(v) -> dict:
    ev = {"status": v.status.value, "monoid": v.monoid.label}
    if v.oscillation_witness:
        ev["witness"] = v.oscillation_witness
    if v.status is ContactStatus.CONTACTABLE:
        dirs = [t.direction for t in v.traces[:8]]
        ev["probe"] = [{"x": d, "value": t.limit} for d, t in zip(dirs, v.traces[:8])]
    return ev


def classify_point(f: FunctionHandle, a, probe_rs=PROBE_RATIOS, cfg: SamplingConfig | None = None
                   ) -> ClassificationReport:
    cfg = cfg or SamplingConfig()
    a = as_point(a, f.dim_in)
    flags: dict[str, str] = {}
    ev: dict[str, dict] = {}

    c0, tr = continuity_test(f, a, cfg)
    flags["C0"] = c0
    ev["C0"] = {"oscillation": tr.sup_quotients}

    lsl = lsl_test(f, a, cfg)
    flags["LSL"] = Y if lsl.holds else N
    ev["LSL"] = {"k_estimate": lsl.k_estimate, "reason": lsl.reason}

    if lsl.holds:
        ll = ll_test(f, a, cfg)
        flags["LL"] = Y if ll.holds else N
        ev["LL"] = {"k_estimate": ll.k_estimate, "reason": ll.reason}
    else:
        flags["LL"] = N
        ev["LL"] = {"reason": "implied by the semi-lipschitz failure"}

    dirs = normalize_rows(direction_set(f.dim_in, cfg), cfg.norm_p)
    monoids = [("Gdiff", ValuedMonoid.rplus())] + [(nf_label(r), ValuedMonoid.nr(r)) for r in probe_rs]
    verdicts = {}
    for lab, m in monoids:
        v = estimate_contact(f, a, m, cfg, directions=dirs)
        verdicts[lab] = v
        ev[lab] = _contact_evidence(v)

    any_contact = any(v.status is ContactStatus.CONTACTABLE for v in verdicts.values())
    if any_contact or flags["LL"] == Y:
        flags["Tang"] = Y
        ev["Tang"] = {"reason": "a contact converged" if any_contact else "locally lipschitz"}
    elif not lsl.holds:
        flags["Tang"] = N
        ev["Tang"] = {"reason": "not semi-lipschitz"}
    else:
        obs = tangentiability_obstruction(f, a, cfg)
        flags["Tang"] = N if obs["obstructed"] else U
        ev["Tang"] = {"reason": "pair quotients blow up as separation shrinks" if obs["obstructed"]
                      else "no certificate either way", **obs}

    for lab, _ in monoids:
        flags[lab] = N if flags["Tang"] == N else _contact_flag(verdicts[lab].status)

    g = verdicts["Gdiff"]
    if flags["Gdiff"] == Y:
        lin, d_lin = is_linear(g.contact_eval, f.dim_in, cfg)
        odd, d_odd = is_odd(g.contact_eval, f.dim_in, cfg)
        flags["Diff"] = Y if lin else N
        flags["StdR"] = Y if odd else N
        ev["Diff"] = {"additivity_defect": d_lin}
        ev["StdR"] = {"oddness_defect": d_odd}
        coherence = {}
        base = g.limits()
        for lab, _ in monoids[1:]:
            v = verdicts[lab]
            if v.status is ContactStatus.CONTACTABLE:
                coherence[lab] = float(np.nanmax(np.abs(v.limits() - base)))
        ev["restriction"] = coherence
    else:
        flags["Diff"] = N if flags["Gdiff"] == N else U
        flags["StdR"] = N if flags["Gdiff"] == N else U

    ordered = {lab: flags[lab] for lab in ("C0", "LSL", "LL", "Tang", "Gdiff")}
    ordered.update({lab: flags[lab] for lab, _ in monoids[1:]})
    ordered["Diff"] = flags["Diff"]
    ordered["StdR"] = flags["StdR"]
    return ClassificationReport([float(c) for c in a], ordered, ev, tuple(probe_rs))


@dataclass
class SuiteRow:
    entry: str
    point: str
    scenario: str
    expected: dict[str, str]
    computed: dict[str, str]
    mismatches: list[str]
    violations: list[str]
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.mismatches and not self.violations and all(
            v for k, v in self.extra.items() if k.endswith("_ok"))

    def to_dict(self) -> dict:
        return {"entry": self.entry, "point": self.point, "scenario": self.scenario,
                "expected": self.expected, "computed": self.computed, "mismatches": self.mismatches,
                "violations": self.violations, "extra": self.extra, "pass": self.passed}


def compare_flags(expected: dict[str, str], computed: dict[str, str]) -> list[str]:
    return [f"{k}: expected {v}, got {computed.get(k, U)}" for k, v in expected.items()
            if v != U and computed.get(k, U) != v]


def run_row(name: str, point: str, cfg: SamplingConfig, extra_checks: bool = False) -> SuiteRow:
    e, lp = labeled_point(name, point)
    rep = classify_point(e.handle, lp.point, PROBE_RATIOS, cfg)
    extra = {}
    if extra_checks:
        hom = homogeneity_check(e.handle, ValuedMonoid.reals(), cfg=cfg, variant=Variant.STANDARD)
        ll = ll_test(e.handle, lp.point, cfg)
        extra = {"homogeneous_standard_reals": hom.holds, "homogeneous_ok": hom.holds,
                 "ll_holds": ll.holds, "ll_fails_ok": not ll.holds}
    return SuiteRow(name, point, lp.scenario, dict(lp.flags), rep.flags,
                    compare_flags(lp.flags, rep.flags), check_ladder(rep), extra)


def counterexample_suite(cfg: SamplingConfig | None = None) -> list[SuiteRow]:
    cfg = cfg or SamplingConfig()
    return [run_row(r.entry, r.point, cfg, bool(r.extra.get("homogeneous_not_lipschitz")))
            for r in COUNTEREXAMPLES]


def format_grid(rows: list[SuiteRow]) -> str:
    head = ["entry", "point", *LABELS, "pass"]
    short = {Y: "Y", N: "N", U: "?"}
    lines = ["\t".join(head)]
    for r in rows:
        cells = [r.entry, r.point]
        for lab in LABELS:
            c, x = r.computed.get(lab, U), r.expected.get(lab, U)
            cells.append(short[c] + ("" if x in (U, c) else "!"))
        cells.append("ok" if r.passed else "FAIL")
        lines.append("\t".join(cells))
    return "\n".join(lines)
