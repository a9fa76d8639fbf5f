"""Ricci solitons L_V g + 2 Ric + 2 lambda g = 0 and the verification suites
for solitons over Sasakian structures and for fields preserving phi.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .contact import ContactPoint, ContactStructure
from .errors import TheoremViolation
from .fields import TensorField, d_one_form, evaluate
from .jets import Jet, jeinsum
from .report import Check, Fitted, Residuals, VerificationReport, fit_constant, max_abs
from .riemann import (
    MetricGeometry,
    PointGeometry,
    connection_commutation_residuals,
    lie,
    lie_connection_jet,
    nabla,
)


@dataclass(frozen=True, eq=False)
class SolitonData:
    """Candidate soliton field and constant; ``lam=None`` asks for a fitted constant."""

    V: TensorField
    lam: float | None = None


def classify_lambda(lam: float, tol: float = 1e-7) -> str:
    if lam < -tol:
        return "shrinking"
    if lam > tol:
        return "expanding"
    return "steady"


def soliton_residual_at(pg: PointGeometry, v: Jet, lam: float) -> np.ndarray:
    g = pg.g
    return lie(v, g, 0).value + 2 * pg.ricci.value + 2 * lam * g.value


def soliton_residual(geom: MetricGeometry, data: SolitonData, p) -> np.ndarray:
    """Components of L_V g + 2 Ric + 2 lambda g at ``p``."""
    if data.lam is None:
        raise ValueError("soliton_residual needs a concrete lambda")
    return soliton_residual_at(geom.at(p, 2), evaluate(data.V, p, 1), data.lam)


def lambda_trace_estimate(pg: PointGeometry, v: Jet) -> float:
    """lambda = -tr_g(L_V g / 2 + Ric) / dim."""
    half = 0.5 * lie(v, pg.g, 0).value + pg.ricci.value
    return -float(np.einsum("ij,ij->", pg.ginv.value, half)) / pg.g.shape[0]


def lambda_xi_estimate(cp: ContactPoint, v: Jet) -> float:
    """lambda = -Ric(xi,xi) - (L_V g)(xi,xi)/2, the xi-xi component of the soliton equation."""
    lg = lie(v, cp.pg.g, 0).value
    return -cp.ricci_xi_xi - 0.5 * float(cp.xi @ lg @ cp.xi)


def fit_lambda(geom: MetricGeometry, V: TensorField, points: Sequence) -> Fitted:
    """Mean and max deviation of the per-point trace estimate of lambda."""
    return fit_constant(
        lambda_trace_estimate(geom.at(p, 2), evaluate(V, p, 1)) for p in points
    )


def soliton_report(
    geom: MetricGeometry,
    data: SolitonData,
    points: Sequence,
    tol: float = 1e-8,
    structure: ContactStructure | None = None,
) -> VerificationReport:
    """Residual of the soliton equation, lambda fit and shrinking/steady/expanding verdict."""
    V = data.V
    fitted = fit_lambda(geom, V, points)
    lam = fitted.value if data.lam is None else float(data.lam)
    res = Residuals()
    xi_est = []
    trivial = []
    for p in points:
        pg = geom.at(p, 2)
        vj = evaluate(V, p, 1)
        res.add("soliton equation", "soliton", soliton_residual_at(pg, vj, lam))
        ric, g = pg.ricci.value, pg.g.value
        dim = g.shape[0]
        trivial.append(max_abs(ric - float(pg.scalar.value) / dim * g))
        if structure is not None:
            cp = structure.at(p, 2)
            xi_est.append(lambda_xi_estimate(cp, vj))
    rep = VerificationReport(suite="soliton", model=geom.g.name)
    rep.checks = res.checks(tol)
    rep.checks.append(Check.from_values("lambda spread", "soliton-constant", [fitted.spread], tol))
    rep.fitted["lambda"] = Fitted(lam, fitted.spread)
    if structure is not None:
        cross = fit_constant(xi_est)
        rep.fitted["lambda (xi-xi estimator)"] = cross
        rep.checks.append(
            Check.from_values(
                "lambda estimators agree", "soliton-constant", [abs(cross.value - lam), cross.spread], tol
            )
        )
    if structure is not None:
        betas = [structure.at(p, 2).beta for p in points]
        einstein = max(abs(b) for b in betas) < tol
    else:
        einstein = max(trivial) < tol
    if rep.passed:
        rep.classification = classify_lambda(lam, tol)
        rep.notes.append("trivial (Einstein)" if einstein else "non-trivial (not Einstein)")
    else:
        rep.classification = "not-a-soliton"
    return rep


# integrability ---------------------------------------------------------------------


def quadratic_roots(cp: ContactPoint) -> np.ndarray:
    """Roots of lambda -> lambda r + |Q|^2 over the eta-Einstein family forced by a soliton.

    For each trial lambda the Ricci operator Q = (n - lambda/2) I + (n + lambda/2) eta(x)xi
    is assembled from the numerical eta, xi at the point, r and |Q|^2 = tr(Q^2) are
    computed from it numerically, and the quadratic is fitted through three samples.
    """
    n = cp.n

    def f(lam: float) -> float:
        q = (n - lam / 2) * cp.ident + (n + lam / 2) * cp.eta_xi
        return lam * np.trace(q) + np.trace(q @ q)

    xs = np.array([-1.0, 0.0, 1.0]) * (2 * n + 4)
    coef = np.polyfit(xs, [f(x) for x in xs], 2)
    return np.sort(np.roots(coef).real)


def integrability_check(
    geom: MetricGeometry,
    data: SolitonData,
    points: Sequence,
    tol: float = 1e-7,
    structure: ContactStructure | None = None,
) -> VerificationReport:
    """L_V r = -Delta r + 2 lambda r + 2 |Q|^2 with Delta = -div grad."""
    rep = VerificationReport(suite="integrability", model=geom.g.name)
    sol = soliton_report(geom, data, points, tol, structure)
    lam = sol.fitted["lambda"].value
    rep.fitted["lambda"] = sol.fitted["lambda"]
    names = [
        ("integrability formula", "integrability"),
        ("lambda r + |Q|^2 = 0", "integrability-constant-r"),
        ("quadratic roots", "soliton-quadratic"),
    ]
    if not sol.passed:
        for name, tag in names:
            rep.checks.append(
                Check.not_applicable(name, tag, tol, "soliton equation does not hold")
            )
        rep.classification = "not-applicable"
        return rep
    rep.classification = "applicable"
    res = Residuals()
    dr_norms, q2s, scalars = [], [], []
    for p in points:
        pg = geom.at(p, 4)
        vj = evaluate(data.V, p, 1)
        r = pg.scalar  # order 2
        dr = r.grad()
        v_r = float(vj.value @ dr.value)
        lap = pg.laplacian_scalar()
        q = pg.ricci_op.value
        q2 = float(np.trace(q @ q))
        rv = float(r.value)
        res.add(names[0][0], names[0][1], v_r - (-lap + 2 * lam * rv + 2 * q2))
        dr_norms.append(max_abs(dr.value))
        q2s.append(q2)
        scalars.append(rv)
    rep.checks = res.checks(tol)
    rep.fitted["r"] = fit_constant(scalars)
    rep.fitted["|Q|^2"] = fit_constant(q2s)
    if max(dr_norms) < tol:
        rep.checks.append(
            Check.from_values(
                names[1][0], names[1][1], [lam * r + q for r, q in zip(scalars, q2s)], tol
            )
        )
    else:
        rep.checks.append(Check.not_applicable(names[1][0], names[1][1], tol, "scalar curvature is not constant"))
    if structure is not None:
        n = structure.n
        roots = quadratic_roots(structure.at(points[0], 2))
        expected = np.array([-2.0 * n, 2.0 * n + 4])
        rep.checks.append(Check.from_values(names[2][0], names[2][1], np.abs(roots - expected), tol))
        einstein_root, expanding_root = roots
        rep.fitted["root (Einstein)"] = Fitted(float(einstein_root), 0.0)
        rep.fitted["root (expanding)"] = Fitted(float(expanding_root), 0.0)
        # beta = n + lambda/2 vanishes at the Einstein root
        rep.checks.append(
            Check.from_values(
                "smaller root makes the metric Einstein",
                "soliton-quadratic",
                [n + einstein_root / 2],
                tol,
            )
        )
        rep.checks.append(
            Check.from_values(
                "fitted lambda is the expanding root", "soliton-quadratic", [lam - expanding_root], tol
            )
        )
    rep.notes.append(
        "|Q|^2 = tr(Q^2) from the numerical Ricci operator; for Ric = a g + b eta(x)eta "
        "in dimension 2n+1 this equals 2n a^2 + (a+b)^2"
    )
    return rep


# per-point Lie derivatives of the structure along V ------------------------------------------


class SolitonPoint:
    """Lie derivatives of (g, eta, xi, phi, Ric, R, nabla) along V at one point."""

    def __init__(self, s: ContactStructure, V: TensorField, p, order: int = 3):
        self.cp = s.at(p, order)
        self.pg = self.cp.pg
        self.v = evaluate(V, p, order)
        self.n = s.n

    @cached_property
    def lie_g_jet(self) -> Jet:
        return lie(self.v, self.pg.g, 0)

    @cached_property
    def lie_g(self) -> np.ndarray:
        return self.lie_g_jet.value

    @cached_property
    def lie_eta_jet(self) -> Jet:
        return lie(self.v, self.cp.eta_j, 0)

    @cached_property
    def lie_eta(self) -> np.ndarray:
        return self.lie_eta_jet.value

    @cached_property
    def lie_xi(self) -> np.ndarray:
        return lie(self.v, self.cp.xi_j, 1).value

    @cached_property
    def lie_phi(self) -> np.ndarray:
        return lie(self.v, self.cp.phi_j, 1).value

    @cached_property
    def lie_ricci(self) -> np.ndarray:
        return lie(self.v, self.pg.ricci, 0).value

    @cached_property
    def lie_riemann(self) -> np.ndarray:
        return lie(self.v, self.pg.riemann, 1).value

    @cached_property
    def lie_conn(self) -> np.ndarray:
        return lie_connection_jet(self.v, self.pg.gamma, self.pg.riemann).value

    @cached_property
    def lie_deta(self) -> np.ndarray:
        return lie(self.v, d_one_form(self.cp.eta_j), 0).value

    @cached_property
    def c_jet(self) -> Jet:
        """(L_V eta)(xi) as a jet."""
        return jeinsum("i,i->", self.lie_eta_jet, self.cp.xi_j)

    def directional(self, f: Jet) -> float:
        """V f for a scalar jet f."""
        return float(self.v.value @ f.grad().value)


def _not_applicable(rep: VerificationReport, names: Sequence[tuple[str, str]], tol: float, why: str):
    for name, tag in names:
        rep.checks.append(Check.not_applicable(name, tag, tol, why))


THEOREM1_CHECKS = (
    ("L_V nabla from nabla Ric", "soliton-lie-connection"),
    ("(L_V nabla)(X, xi) = -2 Q phi X + 4n phi X", "lie-connection-xi"),
    ("(L_V R)(X, xi) xi = 4(QX - 2nX)", "lie-curvature-xi-xi"),
    ("(L_V eta)(X) - g(L_V xi, X) + 2(lambda + 2n) eta(X) = 0", "lie-eta-xi-relation"),
    ("eta(L_V xi) = 2n + lambda", "eta-lie-xi"),
    ("Ric = (n - lambda/2) g + (n + lambda/2) eta(x)eta", "eta-einstein-soliton"),
    ("r = 2n(n+1) - n lambda", "scalar-curvature-soliton"),
    ("lambda = 2n + 4", "lambda-value"),
    ("r = -2n", "scalar-curvature-value"),
    ("Ric = -2g + 2(n+1) eta(x)eta", "null-eta-einstein"),
    ("(L_V nabla)(Y,Z) = 4(n+1)(eta(Y) phi Z + eta(Z) phi Y)", "lie-connection-final"),
    ("L_V Ric = 8(n+1)(g - (2n+1) eta(x)eta)", "lie-ricci"),
    ("L_V g = -4(n+1)(g + eta(x)eta)", "lie-metric"),
    ("L_V Ric from L_V g and L_V eta", "lie-ricci-from-metric"),
    ("L_V eta = -4(n+1) eta", "lie-eta"),
    ("L_V xi = 4(n+1) xi", "lie-xi"),
    ("L_V d eta = -4(n+1) g(., phi .)", "lie-d-eta"),
    ("L_V phi = 0", "lie-phi"),
    ("W = 0", "tanaka-webster"),
)


def theorem1_suite(
    s: ContactStructure, V: TensorField, points: Sequence, tol: float = 1e-7
) -> VerificationReport:
    """Every intermediate and final statement about a soliton over a Sasakian structure."""
    rep = VerificationReport(suite="theorem1", model=s.name)
    sasaki = max(max_abs(s.at(p, 2).sasakian_residual()) for p in points)
    rep.checks.append(Check.from_values("structure is Sasakian", "sasakian-nabla-phi", [sasaki], tol))
    sol = soliton_report(s.geometry, SolitonData(V), points, tol, s)
    rep.extend(sol)
    rep.classification = sol.classification
    if sasaki > tol:
        _not_applicable(rep, THEOREM1_CHECKS, tol, "structure is not Sasakian")
        rep.classification = "not-applicable"
        return rep
    if not sol.passed:
        _not_applicable(rep, THEOREM1_CHECKS, tol, "V is not a soliton field for this metric")
        return rep

    n = s.n
    lam = sol.fitted["lambda"].value
    res = Residuals()
    ws, alphas, betas = [], [], []
    for p in points:
        sp = SolitonPoint(s, V, p, 3)
        cp = sp.cp
        g, eta, xi, phi, Q = cp.g, cp.eta, cp.xi, cp.phi, cp.ricci_op
        ident, ee = cp.ident, cp.eta_eta
        ric, r = cp.ricci, cp.scalar
        lc = sp.lie_conn
        conn = connection_commutation_residuals(cp.pg, sp.v, lam)
        phi_sym = np.einsum("i,kj->kij", eta, phi) + np.einsum("j,ki->kij", eta, phi)
        items = [
            conn["soliton connection"],
            np.einsum("kij,j->ki", lc, xi) - (-2 * Q @ phi + 4 * n * phi),
            np.einsum("lijk,j,k->li", sp.lie_riemann, xi, xi) - 4 * (Q - 2 * n * ident),
            sp.lie_eta - g @ sp.lie_xi + 2 * (lam + 2 * n) * eta,
            eta @ sp.lie_xi - (2 * n + lam),
            ric - (n - lam / 2) * g - (n + lam / 2) * ee,
            r - (2 * n * (n + 1) - n * lam),
            lam - (2 * n + 4),
            r + 2 * n,
            ric + 2 * g - 2 * (n + 1) * ee,
            lc - 4 * (n + 1) * phi_sym,
            sp.lie_ricci - 8 * (n + 1) * (g - (2 * n + 1) * ee),
            sp.lie_g + 4 * (n + 1) * (g + ee),
            sp.lie_ricci
            - (8 * (n + 1) * (g + ee) + 2 * (n + 1) * (np.outer(sp.lie_eta, eta) + np.outer(eta, sp.lie_eta))),
            sp.lie_eta + 4 * (n + 1) * eta,
            sp.lie_xi - 4 * (n + 1) * xi,
            sp.lie_deta + 4 * (n + 1) * (g @ phi),
            sp.lie_phi,
            r - cp.ricci_xi_xi + 4 * n,
        ]
        for (name, tag), val in zip(THEOREM1_CHECKS, items):
            res.add(name, tag, val)
        ws.append(r - cp.ricci_xi_xi + 4 * n)
        alphas.append(cp.alpha)
        betas.append(cp.beta)
    rep.checks.extend(res.checks(tol))
    alpha, beta = fit_constant(alphas), fit_constant(betas)
    rep.fitted["alpha"] = alpha
    rep.fitted["beta"] = beta
    rep.fitted["W"] = fit_constant(ws)
    rep.checks.append(
        Check.from_values("D-homothetically fixed (alpha = -2)", "d-homothetically-fixed", [alpha.value + 2, alpha.spread], tol)
    )
    rep.checks.append(
        Check.from_values("expanding (lambda > 0)", "soliton-trichotomy", [lam], 0.0, comparison="above")
    )
    rep.checks.append(
        Check.from_values("non-trivial (beta != 0)", "soliton-trichotomy", [abs(beta.value)], tol, comparison="above")
    )
    return rep


LEMMA1_CHECKS = (
    ("L_V eta = c eta", "phi-preserving-eta"),
    ("L_V xi = -c xi", "phi-preserving-xi"),
    ("L_V g = c(g + eta(x)eta)", "phi-preserving-metric"),
    ("(L_V g)(X, xi) = 2c eta(X)", "phi-preserving-metric-xi"),
    ("(L_V g)(X, phi Y) = (dc ^ eta)(X,Y) + c g(X, phi Y)", "phi-preserving-metric-phi"),
    ("c constant", "phi-preserving-constant"),
)


def lemma1_suite(
    s: ContactStructure, V: TensorField, points: Sequence, tol: float = 1e-8
) -> VerificationReport:
    """For V with L_V phi = 0: fit c from (L_V eta)(xi) and check the three conclusions."""
    rep = VerificationReport(suite="lemma1", model=s.name)
    sps = [SolitonPoint(s, V, p, 3) for p in points]
    hyp = max(max_abs(sp.lie_phi) for sp in sps)
    rep.checks.append(Check.from_values("hypothesis L_V phi = 0", "lie-phi", [hyp], tol))
    if hyp > tol:
        _not_applicable(rep, LEMMA1_CHECKS, tol, "V does not preserve phi")
        rep.classification = "not-applicable"
        return rep
    c = fit_constant(float(sp.c_jet.value) for sp in sps)
    rep.fitted["c"] = c
    res = Residuals()
    for sp in sps:
        cp = sp.cp
        cv = c.value
        dc = sp.c_jet.grad().value
        dc_eta = 0.5 * (np.outer(dc, cp.eta) - np.outer(cp.eta, dc))
        items = [
            sp.lie_eta - cv * cp.eta,
            sp.lie_xi + cv * cp.xi,
            sp.lie_g - cv * (cp.g + cp.eta_eta),
            sp.lie_g @ cp.xi - 2 * cv * cp.eta,
            sp.lie_g @ cp.phi - dc_eta - cv * (cp.g @ cp.phi),
            np.concatenate([[float(sp.c_jet.value) - cv], dc]),
        ]
        for (name, tag), val in zip(LEMMA1_CHECKS, items):
            res.add(name, tag, val)
    rep.checks.extend(res.checks(tol))
    return rep


THEOREM2_CHECKS = (
    ("V alpha = 0", "v-alpha"),
    ("V beta = 0", "v-beta"),
    ("V r = 0", "v-scalar"),
    ("r = (2n+1) alpha + beta", "scalar-from-eta-einstein"),
    ("L_V g = c(g + eta(x)eta)", "phi-preserving-metric"),
    ("nabla L_V g = -c(...)", "nabla-lie-metric"),
    ("(L_V nabla)(Y,Z) = -c(eta(Z) phi Y + eta(Y) phi Z + g(Y, phi h Z) xi)", "phi-preserving-connection"),
    ("L_V Ric via curvature", "phi-preserving-lie-ricci"),
    ("L_V Ric via eta-Einstein form", "eta-einstein-lie-ricci"),
    ("V alpha + c(alpha + 2) = 0", "branch-alpha"),
    ("V beta + c(alpha + 2 beta - 4n - 2) = 0", "branch-beta"),
)


def theorem2_suite(
    s: ContactStructure, V: TensorField, points: Sequence, tol: float = 1e-7
) -> VerificationReport:
    """Either V is an infinitesimal automorphism, or the structure is D-homothetically fixed K-contact.

    Raises TheoremViolation when the hypotheses hold but neither branch does.
    """
    rep = VerificationReport(suite="theorem2", model=s.name)
    n = s.n
    sps = [SolitonPoint(s, V, p, 3) for p in points]
    fit_res, lie_phi, v_r = [], [], []
    for sp in sps:
        cp = sp.cp
        fit_res.append(max_abs(cp.ricci - cp.alpha * cp.g - cp.beta * cp.eta_eta))
        lie_phi.append(max_abs(sp.lie_phi))
        v_r.append(abs(sp.directional(cp.pg.scalar)))
    hyps = [
        ("hypothesis eta-Einstein", "eta-einstein", fit_res),
        ("hypothesis L_V phi = 0", "lie-phi", lie_phi),
        ("hypothesis V r = 0", "v-scalar", v_r),
    ]
    for name, tag, vals in hyps:
        rep.checks.append(Check.from_values(name, tag, vals, tol))
    if not all(c.passed for c in rep.checks):
        _not_applicable(rep, THEOREM2_CHECKS, tol, "hypotheses do not hold")
        rep.classification = "not-applicable"
        return rep

    c = fit_constant(float(sp.c_jet.value) for sp in sps)
    rep.fitted["c"] = c
    cv = c.value
    res = Residuals()
    alphas, betas, h_norms, auto = [], [], [], []
    for sp in sps:
        cp = sp.cp
        g, eta, xi, phi, h = cp.g, cp.eta, cp.xi, cp.phi, cp.h
        ee = cp.eta_eta
        a_j, b_j = cp.alpha_beta_jets
        alpha, beta = float(a_j.value), float(b_j.value)
        v_alpha, v_beta = sp.directional(a_j), sp.directional(b_j)
        v_r = sp.directional(cp.pg.scalar)
        alphas.append(alpha)
        betas.append(beta)
        h_norms.append(max_abs(h))
        auto.append(max(max_abs(sp.lie_g), max_abs(sp.lie_eta), max_abs(sp.lie_xi)))
        m = phi + phi @ h
        gm = g @ m
        nabla_lie_g = nabla(sp.lie_g_jet, cp.pg.gamma, 0).value  # [Y, Z, X]
        expected_nlg = -cv * (np.einsum("z,yx->yzx", eta, gm) + np.einsum("y,zx->yzx", eta, gm))
        phih = jeinsum("ij,jk->ik", cp.phi_j, cp.h_jet)
        nabla_xi_phih = np.einsum("abm,m->ab", nabla(phih, cp.pg.gamma, 1).value, xi)
        conn_expected = -cv * (
            np.einsum("z,ky->kyz", eta, phi)
            + np.einsum("y,kz->kyz", eta, phi)
            + np.einsum("yz,k->kyz", g @ phi @ h, xi)
        )
        ric_curv = cv * (-2 * g + 2 * h.T @ g + 2 * (2 * n + 1) * ee) - cv * (nabla_xi_phih.T @ g)
        ric_ee = (v_alpha + cv * alpha) * g + (v_beta + cv * (alpha + 2 * beta)) * ee
        items = [
            v_alpha,
            v_beta,
            v_r,
            cp.scalar - ((2 * n + 1) * alpha + beta),
            sp.lie_g - cv * (g + ee),
            nabla_lie_g - expected_nlg,
            sp.lie_conn - conn_expected,
            sp.lie_ricci - ric_curv,
            sp.lie_ricci - ric_ee,
            v_alpha + cv * (alpha + 2),
            v_beta + cv * (alpha + 2 * beta - 4 * n - 2),
        ]
        for (name, tag), val in zip(THEOREM2_CHECKS, items):
            res.add(name, tag, val)
    rep.checks.extend(res.checks(tol))
    alpha_f, beta_f = fit_constant(alphas), fit_constant(betas)
    rep.fitted["alpha"] = alpha_f
    rep.fitted["beta"] = beta_f
    rep.fitted["|h|"] = fit_constant(h_norms)

    branch_auto = abs(cv) < tol and c.spread < tol and max(auto) < tol
    branch_fixed = (
        abs(alpha_f.value + 2) < tol and alpha_f.spread < tol and max(h_norms) < tol
    )
    rep.checks.append(
        Check(
            name="dichotomy",
            tag="phi-preserving-dichotomy",
            threshold=tol,
            passed=branch_auto or branch_fixed,
            points=len(points),
            max_residual=min(max(abs(cv), max(auto)), max(abs(alpha_f.value + 2), max(h_norms))),
        )
    )
    branches = []
    if branch_auto:
        branches.append("automorphism")
    if branch_fixed:
        branches.append("D-homothetically fixed K-contact")
    if not branches:
        raise TheoremViolation(
            f"neither branch holds on {s.name}: c = {cv:.3g}, alpha + 2 = {alpha_f.value + 2:.3g}, "
            f"|h| = {max(h_norms):.3g}"
        )
    rep.classification = " and ".join(branches)
    return rep
