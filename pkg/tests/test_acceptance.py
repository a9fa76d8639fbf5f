"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run directly with ``python``.
"""

import numpy as np

from conftest import ACCEPTANCE_LINES, heisenberg
from sasaki_soliton import soliton as sol
from sasaki_soliton.cli import RunConfig, cmd_report_matrix, matrix_json
from sasaki_soliton.contact import classify, d_homothetic_deform, tanaka_webster_scalar, verify_axioms
from sasaki_soliton.fields import sample_points
from sasaki_soliton.models import (
    RandomMetricSpec,
    pde_check,
    pde_mutations,
    phi_sectional_curvature,
    random_contact_direction,
    random_metric,
    random_vector_field,
)
from sasaki_soliton.riemann import universal_suite


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def worst(values) -> float:
    return float(max(values))


def test_01_heisenberg_soliton():
    details, ok = [], True
    for n in (1, 2, 3):
        m = heisenberg(n)
        s = m.structure
        pts = np.vstack([sample_points(s.chart, 64, 101), sample_points(s.chart, 64, 102, box=(-5, 5))])
        given = sol.soliton_report(s.geometry, sol.SolitonData(m.soliton_V, 2 * n + 4), pts, 1e-8, s)
        fitted = sol.soliton_report(s.geometry, sol.SolitonData(m.soliton_V), pts, 1e-8, s)
        res = given.check("soliton equation").max_residual
        lam = fitted.fitted["lambda"]
        ok &= (
            res < 1e-8
            and lam.spread < 1e-8
            and abs(lam.value - (2 * n + 4)) < 1e-8
            and given.classification == fitted.classification == "expanding"
        )
        details.append(f"n={n}: res {res:.1e}, lambda {lam.value:.10g} spread {lam.spread:.1e}")
    record(1, "soliton equation on the Heisenberg group, lambda = 2n+4, expanding", ok, "; ".join(details))


def test_02_null_eta_einstein():
    details, ok = [], True
    rng = np.random.default_rng(2)
    for n in (1, 2, 3):
        s = heisenberg(n).structure
        pts = sample_points(s.chart, 16, 201)
        sc = classify(s, pts, 1e-8)
        scal, rxx, ksec = [], [], []
        for p in pts:
            cp = s.at(p, 2)
            scal.append(abs(cp.scalar + 2 * n))
            rxx.append(abs(cp.ricci_xi_xi - 2 * n))
            ksec.append(abs(phi_sectional_curvature(s, random_contact_direction(s, p, rng), p) + 3))
        da, db = abs(sc.alpha.value + 2), abs(sc.beta.value - 2 * (n + 1))
        errs = [da, db, sc.alpha.spread, sc.beta.spread, worst(scal), worst(rxx), worst(ksec)]
        ok &= max(errs) < 1e-8
        details.append(f"n={n}: max err {max(errs):.1e}")
    record(2, "alpha = -2, beta = 2(n+1), r = -2n, Ric(xi,xi) = 2n, phi-sectional -3", ok, "; ".join(details))


THEOREM1_TAGS = (
    "lie-connection-xi",
    "lie-curvature-xi-xi",
    "lie-eta-xi-relation",
    "eta-lie-xi",
    "eta-einstein-soliton",
    "scalar-curvature-soliton",
    "lie-connection-final",
    "lie-ricci",
    "lie-metric",
    "lie-eta",
    "lie-xi",
    "lie-phi",
)


def test_03_theorem1_chain():
    details, ok = [], True
    for n in (1, 2):
        m = heisenberg(n)
        rep = sol.theorem1_suite(m.structure, m.soliton_V, sample_points(m.structure.chart, 32, 301), 1e-7)
        chain = [c for c in rep.checks if c.tag in THEOREM1_TAGS]
        covered = {c.tag for c in chain}
        good = rep.passed and covered == set(THEOREM1_TAGS) and all(c.applicable and c.passed for c in chain)
        ok &= good
        details.append(f"n={n}: {len(chain)} links, max {worst(c.max_residual for c in chain):.1e}")
    record(3, "soliton conclusion chain", ok, "; ".join(details))


def test_04_integrability():
    details, ok = [], True
    for n in (1, 2, 3):
        m = heisenberg(n)
        s = m.structure
        rep = sol.integrability_check(
            s.geometry, sol.SolitonData(m.soliton_V, m.lam), sample_points(s.chart, 8, 401), 1e-7, s
        )
        names = ("integrability formula", "lambda r + |Q|^2 = 0", "quadratic roots")
        checks = [rep.check(k) for k in names]
        ok &= rep.passed and all(c.applicable and c.passed for c in checks)
        details.append(
            f"n={n}: " + ", ".join(f"{c.max_residual:.1e}" for c in checks)
            + f", roots {rep.fitted['root (Einstein)'].value:.6g}/{rep.fitted['root (expanding)'].value:.6g}"
        )
    record(4, "integrability formula, lambda r + |Q|^2 = 0 and its roots", ok, "; ".join(details))


LEMMA1_CONCLUSIONS = ("L_V eta = c eta", "L_V xi = -c xi", "L_V g = c(g + eta(x)eta)")


def test_05_lemma1():
    details, ok = [], True
    for n in (1, 2, 3):
        m = heisenberg(n)
        s = m.structure
        pts = sample_points(s.chart, 16, 501)
        rep = sol.lemma1_suite(s, m.soliton_V, pts, 1e-8)
        c = rep.fitted["c"]
        res = worst(rep.check(k).max_residual for k in LEMMA1_CONCLUSIONS)
        ok &= rep.passed and abs(c.value + 4 * (n + 1)) < 1e-8 and c.spread < 1e-8 and res < 1e-8
        rep_xi = sol.lemma1_suite(s, s.xi, pts, 1e-10)
        c_xi = rep_xi.fitted["c"]
        res_xi = worst(rep_xi.check(k).max_residual for k in LEMMA1_CONCLUSIONS)
        ok &= rep_xi.passed and abs(c_xi.value) < 1e-10 and res_xi < 1e-10
        details.append(f"n={n}: c {c.value:.10g} (res {res:.1e}), c[xi] {c_xi.value:.1e} (res {res_xi:.1e})")
    record(5, "phi-preserving fields: c = -4(n+1), and c = 0 for xi", ok, "; ".join(details))


def _v_checks(rep) -> float:
    return worst(rep.check(k).max_residual for k in ("V alpha = 0", "V beta = 0", "V r = 0"))


def test_06_theorem2_dichotomy():
    details, ok = [], True
    for n in (1, 2):
        m = heisenberg(n)
        s = m.structure
        pts = sample_points(s.chart, 16, 601)
        rep = sol.theorem2_suite(s, m.soliton_V, pts, 1e-8)
        h = worst(np.max(np.abs(s.at(p, 3).h)) for p in pts)
        ok &= (
            rep.passed
            and "D-homothetically fixed" in rep.classification
            and abs(rep.fitted["alpha"].value + 2) < 1e-8
            and h < 1e-9
            and abs(rep.fitted["c"].value) > 1.0
            and _v_checks(rep) < 1e-8
        )
        rep_xi = sol.theorem2_suite(s, s.xi, pts, 1e-8)
        ok &= rep_xi.passed and rep_xi.classification.startswith("automorphism") and _v_checks(rep_xi) < 1e-8
        details.append(f"n={n}: soliton -> {rep.classification} (|h| {h:.0e}); xi -> automorphism")
    d = d_homothetic_deform(heisenberg(1).structure, 2.0)
    rep_d = sol.theorem2_suite(d, d.xi, sample_points(d.chart, 16, 602), 1e-8)
    ok &= rep_d.passed and rep_d.classification.startswith("automorphism") and _v_checks(rep_d) < 1e-8
    details.append(f"a=2 deformation, xi-bar -> {rep_d.classification}")
    record(6, "dichotomy for phi-preserving fields", ok, "; ".join(details))


def test_07_d_homothetic_law():
    details, ok = [], True
    for n in (1, 2):
        for a in (0.5, 2.0, 3.0):
            s = d_homothetic_deform(heisenberg(n).structure, a)
            pts = sample_points(s.chart, 8, 701)
            axioms = verify_axioms(s, pts, 1e-9)
            sc = classify(s, pts, 1e-8)
            err = max(abs(sc.alpha.value + 2), abs(sc.beta.value - (2 * n + 2)), sc.alpha.spread, sc.beta.spread)
            ok &= axioms.passed and err < 1e-8
            details.append(f"n={n},a={a:g}: {err:.0e}")
    record(7, "D-homothetic deformations stay at alpha = -2, beta = 2n+2", ok, ", ".join(details))


def test_08_universal_identities():
    ok, count = True, 0
    maxima: dict[str, float] = {}
    for dim in (3, 5):
        for seed in range(20):
            spec = RandomMetricSpec(dim=dim, seed=seed)
            geom = random_metric(spec)
            rep = universal_suite(geom, random_vector_field(spec), sample_points(geom.chart, 4, seed))
            ok &= rep.passed
            count += 1
            for c in rep.checks:
                maxima[c.name] = max(maxima.get(c.name, 0.0), c.max_residual)
    detail = f"{count} metrics; " + ", ".join(f"{k} {v:.0e}" for k, v in maxima.items())
    record(8, "universal identities on random polynomial metrics", ok, detail)


def test_09_pde_system():
    details, ok = [], True
    for n in (1, 2, 3):
        m = heisenberg(n)
        pts = sample_points(m.structure.chart, 16, 901)
        rep = pde_check(m, m.soliton_V, pts, 1e-10)
        ok &= rep.passed
        muts = []
        for label, (cand, target) in pde_mutations(n).items():
            r = pde_check(m, cand, pts, 1e-10).check(target).max_residual
            ok &= r > 1e-2
            muts.append(f"{label}: {r:.2g}")
        details.append(f"n={n}: special {worst(c.max_residual for c in rep.checks):.0e}; " + ", ".join(muts))
    record(9, "PDE system and its mutations", ok, "; ".join(details))


def test_10_tanaka_webster():
    ok, w = True, 0.0
    for n in (1, 2, 3):
        s = heisenberg(n).structure
        for p in sample_points(s.chart, 64, 1001):
            w = max(w, abs(tanaka_webster_scalar(s, p)))
    ok = w < 1e-8
    record(10, "Tanaka-Webster scalar W = 0", ok, f"max |W| {w:.1e}")


def test_11_matrix_determinism():
    cfg = RunConfig(command="matrix", samples=8, seed=0)
    code1, m1 = cmd_report_matrix(cfg)
    code2, m2 = cmd_report_matrix(cfg)
    a, b = matrix_json(m1), matrix_json(m2)
    heis = all(
        cell["status"] == "pass" for sel, row in m1["cells"].items() if sel.startswith("heisenberg:") for cell in row.values()
    )
    ok = a == b and code1 == code2 == 0 and len(m1["tags"]) >= 25 and heis
    record(11, "report matrix is byte-identical across runs", ok, f"{len(a)} bytes, {len(m1['tags'])} tags")


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
