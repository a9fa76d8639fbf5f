"""Contact metric structures (eta, xi, phi, g): axioms, h and l, classification.

Matrix conventions: ``phi[i, j]`` is phi^i_j, so ``phi @ X`` applies phi to a
vector, and the operator X -> eta(X) xi is the matrix ``outer(xi, eta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument, PreconditionError
from .fields import (
    Chart,
    TensorField,
    contact_volume_coefficient,
    d_one_form,
    evaluate,
)
from .jets import DEFAULT_ORDER, Jet, jeinsum
from .report import Check, Fitted, Residuals, VerificationReport, fit_constant, max_abs
from .riemann import MetricGeometry, PointGeometry, lie, nabla


@dataclass(frozen=True, eq=False)
class ContactStructure:
    """A candidate contact metric structure of dimension 2n+1 on one chart."""

    n: int
    eta: TensorField
    xi: TensorField
    phi: TensorField
    g: TensorField
    name: str = "contact"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument("n must be at least 1")
        if self.chart.dim != 2 * self.n + 1:
            raise InvalidArgument(f"chart dimension {self.chart.dim} is not 2n+1 = {2 * self.n + 1}")
        for f, rank in ((self.eta, (0, 1)), (self.xi, (1, 0)), (self.phi, (1, 1)), (self.g, (0, 2))):
            if f.rank != rank:
                raise InvalidArgument(f"{f.name or 'field'} has rank {f.rank}, expected {rank}")

    @property
    def chart(self) -> Chart:
        return self.g.chart

    @cached_property
    def geometry(self) -> MetricGeometry:
        return MetricGeometry(self.g)

    def at(self, p, order: int = DEFAULT_ORDER) -> "ContactPoint":
        return ContactPoint(self, p, order)


class ContactPoint:
    """Structure tensors and derived operators of a contact structure at one point."""

    def __init__(self, s: ContactStructure, p, order: int = DEFAULT_ORDER):
        self.s = s
        self.n = s.n
        self.order = order
        self.point = s.chart.check_point(p)
        self.pg: PointGeometry = s.geometry.at(self.point, order)
        self.eta_j = evaluate(s.eta, self.point, order)
        self.xi_j = evaluate(s.xi, self.point, order)
        self.phi_j = evaluate(s.phi, self.point, order)

    # plain values
    @cached_property
    def g(self) -> np.ndarray:
        return self.pg.g.value

    @cached_property
    def eta(self) -> np.ndarray:
        return self.eta_j.value

    @cached_property
    def xi(self) -> np.ndarray:
        return self.xi_j.value

    @cached_property
    def phi(self) -> np.ndarray:
        return self.phi_j.value

    @cached_property
    def eta_xi(self) -> np.ndarray:
        """Matrix of X -> eta(X) xi."""
        return np.outer(self.xi, self.eta)

    @cached_property
    def eta_eta(self) -> np.ndarray:
        return np.outer(self.eta, self.eta)

    @cached_property
    def ident(self) -> np.ndarray:
        return np.eye(self.s.chart.dim)

    # derived operators
    @cached_property
    def h_jet(self) -> Jet:
        """h = 1/2 L_xi phi, known to one order less than the structure."""
        return lie(self.xi_j, self.phi_j, 1) * 0.5

    @cached_property
    def h(self) -> np.ndarray:
        return self.h_jet.value

    @cached_property
    def l(self) -> np.ndarray:
        """l X = R(X, xi) xi."""
        return np.einsum("lijk,j,k->li", self.pg.riemann.value, self.xi, self.xi)

    @cached_property
    def ricci(self) -> np.ndarray:
        return self.pg.ricci.value

    @cached_property
    def ricci_op(self) -> np.ndarray:
        return self.pg.ricci_op.value

    @cached_property
    def scalar(self) -> float:
        return float(self.pg.scalar.value)

    @cached_property
    def ricci_xi_xi(self) -> float:
        return float(self.xi @ self.ricci @ self.xi)

    @cached_property
    def nabla_phi(self) -> np.ndarray:
        """[a, j, m] = ((nabla_m phi) d_j)^a."""
        return nabla(self.phi_j, self.pg.gamma, 1).value

    @cached_property
    def alpha_beta_jets(self) -> tuple[Jet, Jet]:
        """Pointwise eta-Einstein coefficients as jets (one order below curvature)."""
        ric_xx = jeinsum("ij,i,j->", self.pg.ricci, self.xi_j, self.xi_j)
        alpha = (self.pg.scalar - ric_xx) * (1.0 / (2 * self.n))
        beta = ric_xx - alpha
        return alpha, beta

    @property
    def alpha(self) -> float:
        return float(self.alpha_beta_jets[0].value)

    @property
    def beta(self) -> float:
        return float(self.alpha_beta_jets[1].value)

    def sasakian_residual(self) -> np.ndarray:
        """(nabla_X phi) Y - g(X, Y) xi + eta(Y) X, indexed [a, Y, X]."""
        return (
            self.nabla_phi
            - np.einsum("mj,a->ajm", self.g, self.xi)
            + np.einsum("j,am->ajm", self.eta, self.ident)
        )

    def killing_residual(self) -> np.ndarray:
        return lie(self.xi_j, self.pg.g, 0).value


# axioms ------------------------------------------------------------------------


def axiom_residuals(s: ContactStructure, p) -> dict[str, np.ndarray | float]:
    eta_j = evaluate(s.eta, p, 1)
    eta = eta_j.value
    xi = evaluate(s.xi, p, 0).value
    phi = evaluate(s.phi, p, 0).value
    g = evaluate(s.g, p, 0).value
    deta = d_one_form(eta_j).value
    ident = np.eye(s.chart.dim)
    return {
        "eta(xi) = 1": eta @ xi - 1.0,
        "d eta(xi, .) = 0": xi @ deta,
        "phi^2 = -I + eta (x) xi": phi @ phi - (-ident + np.outer(xi, eta)),
        "d eta(X, Y) = g(X, phi Y)": deta - g @ phi,
        "eta(X) = g(X, xi)": eta - g @ xi,
        "phi xi = 0": phi @ xi,
        "eta o phi = 0": eta @ phi,
        "volume": contact_volume_coefficient(eta, deta),
    }


_AXIOM_TAGS = {
    "eta(xi) = 1": "reeb-normalisation",
    "d eta(xi, .) = 0": "reeb-kernel",
    "phi^2 = -I + eta (x) xi": "phi-square",
    "d eta(X, Y) = g(X, phi Y)": "associated-metric",
    "eta(X) = g(X, xi)": "eta-metric-dual",
    "phi xi = 0": "phi-xi",
    "eta o phi = 0": "eta-phi",
}


def verify_axioms(s: ContactStructure, points: Sequence, tol: float = 1e-9) -> VerificationReport:
    """Residuals of the contact metric axioms at each point; passes iff all are below ``tol``."""
    res = Residuals()
    volumes = []
    for p in points:
        r = axiom_residuals(s, p)
        volumes.append(abs(r.pop("volume")))
        for name, val in r.items():
            res.add(name, _AXIOM_TAGS[name], val)
    rep = VerificationReport(suite="axioms", model=s.name)
    rep.checks = res.checks(tol)
    rep.checks.append(
        Check.from_values(
            "eta ^ (d eta)^n nonvanishing", "contact-condition", volumes, tol, comparison="above"
        )
    )
    return rep


def compute_h(s: ContactStructure, p) -> np.ndarray:
    return ContactPoint(s, p, 2).h


def compute_l(s: ContactStructure, p) -> np.ndarray:
    return ContactPoint(s, p, 2).l


def self_adjoint_residual(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    """g(aX, Y) - g(X, aY)."""
    ga = a.T @ g
    return ga - ga.T


# identities valid on every contact metric manifold ------------------------------------


def identity_residuals(cp: ContactPoint) -> dict[str, tuple[str, np.ndarray]]:
    n = cp.n
    phi, h, l, ident = cp.phi, cp.h, cp.l, cp.ident
    nabla_xi = nabla(cp.xi_j, cp.pg.gamma, 1).value  # [k, j] = nabla_j xi^k
    nabla_h = nabla(cp.h_jet, cp.pg.gamma, 1).value  # [a, b, m]
    nabla_xi_h = np.einsum("abm,m->ab", nabla_h, cp.xi)
    tr_h2 = np.trace(h @ h)
    div_phi = np.einsum("iji->j", cp.nabla_phi)
    return {
        "nabla xi = -phi - phi h": ("nabla-xi", nabla_xi + phi + phi @ h),
        "l - phi l phi = -2(h^2 + phi^2)": ("l-phi-l-phi", l - phi @ l @ phi + 2 * (h @ h + phi @ phi)),
        "nabla_xi h = phi - phi l - phi h^2": ("nabla-xi-h", nabla_xi_h - (phi - phi @ l - phi @ h @ h)),
        "Tr l = Ric(xi, xi)": ("trace-l", np.trace(l) - cp.ricci_xi_xi),
        "Ric(xi, xi) = 2n - Tr h^2": ("ricci-xi-xi", cp.ricci_xi_xi - (2 * n - tr_h2)),
        "Tr h = 0": ("h-trace-free", np.trace(h)),
        "Tr h phi = 0": ("h-phi-trace-free", np.trace(h @ phi)),
        "h phi = -phi h": ("h-phi-anticommute", h @ phi + phi @ h),
        "h self-adjoint": ("h-self-adjoint", self_adjoint_residual(cp.g, h)),
        "l self-adjoint": ("l-self-adjoint", self_adjoint_residual(cp.g, l)),
        "div phi = -2n eta": ("divergence-phi", div_phi + 2 * n * cp.eta),
    }


def identity_suite(s: ContactStructure, points: Sequence, tol: float = 1e-8) -> VerificationReport:
    """Structure identities for the operators h and l on any contact metric manifold."""
    res = Residuals()
    h_norms = []
    for p in points:
        cp = s.at(p, 3)
        for name, (tag, val) in identity_residuals(cp).items():
            res.add(name, tag, val)
        h_norms.append(float(np.linalg.norm(cp.h)))
    rep = VerificationReport(suite="identities", model=s.name)
    rep.checks = res.checks(tol)
    rep.fitted["|h|"] = fit_constant(h_norms)
    return rep


def sasakian_residuals(cp: ContactPoint) -> dict[str, tuple[str, np.ndarray]]:
    n = cp.n
    xi, eta, ident = cp.xi, cp.eta, cp.ident
    R = cp.pg.riemann.value
    Q = cp.ricci_op
    nQ = cp.pg.nabla_ricci_op.value  # [a, b, m] = ((nabla_m Q) d_b)^a
    r_xy_xi = np.einsum("lijk,k->lij", R, xi)
    expected = np.einsum("j,li->lij", eta, ident) - np.einsum("i,lj->lij", eta, ident)
    return {
        "(nabla_X phi)Y = g(X,Y) xi - eta(Y) X": ("sasakian-nabla-phi", cp.sasakian_residual()),
        "R(X,Y) xi = eta(Y) X - eta(X) Y": ("sasakian-curvature-xi", r_xy_xi - expected),
        "Q xi = 2n xi": ("ricci-xi", Q @ xi - 2 * n * xi),
        "R(X, xi) xi = X - eta(X) xi": ("l-sasakian", cp.l - (ident - cp.eta_xi)),
        "Q phi = phi Q": ("ricci-phi-commute", Q @ cp.phi - cp.phi @ Q),
        "nabla_xi Q = 0": ("ricci-parallel-xi", np.einsum("abm,m->ab", nQ, xi)),
        "(nabla_X Q) xi = Q phi X - 2n phi X": (
            "nabla-ricci-xi",
            np.einsum("abm,b->am", nQ, xi) - (Q @ cp.phi - 2 * n * cp.phi),
        ),
        "L_xi g = 0": ("xi-killing", cp.killing_residual()),
    }


def sasakian_suite(s: ContactStructure, points: Sequence, tol: float = 1e-8) -> VerificationReport:
    res = Residuals()
    for p in points:
        for name, (tag, val) in sasakian_residuals(s.at(p, 3)).items():
            res.add(name, tag, val)
    rep = VerificationReport(suite="sasakian", model=s.name)
    rep.checks = res.checks(tol)
    return rep


# classification --------------------------------------------------------------------


FLAGS = (
    "contact-metric",
    "K-contact",
    "Sasakian",
    "eta-Einstein",
    "Einstein",
    "D-homothetically-fixed",
    "null-eta-Einstein",
)


@dataclass
class StructureClass:
    flags: dict[str, bool]
    alpha: Fitted
    beta: Fitted
    residuals: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, flag: str) -> bool:
        return self.flags[flag]


def classify(s: ContactStructure, points: Sequence, tol: float = 1e-7) -> StructureClass:
    """Flag K-contact, Sasakian, eta-Einstein and related classes from residual thresholds.

    Raises PreconditionError when the contact metric axioms fail.
    """
    axioms = verify_axioms(s, points, tol)
    if not axioms.passed:
        bad = [c.name for c in axioms.checks if not c.passed]
        raise PreconditionError(f"not a contact metric structure; failing axioms: {bad}")
    n = s.n
    killing, sasaki, fit = [], [], []
    alphas, betas = [], []
    for p in points:
        cp = s.at(p, 3)
        killing.append(max_abs(cp.killing_residual()))
        sasaki.append(max_abs(cp.sasakian_residual()))
        a, b = cp.alpha, cp.beta
        alphas.append(a)
        betas.append(b)
        fit.append(max_abs(cp.ricci - a * cp.g - b * cp.eta_eta))
    alpha, beta = fit_constant(alphas), fit_constant(betas)
    residuals = {
        "K-contact": max(killing),
        "Sasakian": max(sasaki),
        "eta-Einstein": max(fit),
        "Einstein": float(np.max(np.abs(betas))),
        "alpha+2": float(np.max(np.abs(np.asarray(alphas) + 2))),
        "beta-2(n+1)": float(np.max(np.abs(np.asarray(betas) - 2 * (n + 1)))),
        "alpha spread": alpha.spread,
        "beta spread": beta.spread,
    }
    flags = {"contact-metric": True}
    flags["K-contact"] = residuals["K-contact"] < tol
    flags["Sasakian"] = residuals["Sasakian"] < tol
    flags["eta-Einstein"] = residuals["eta-Einstein"] < tol
    flags["Einstein"] = flags["eta-Einstein"] and residuals["Einstein"] < tol
    flags["D-homothetically-fixed"] = (
        flags["K-contact"] and flags["eta-Einstein"] and residuals["alpha+2"] < tol
    )
    flags["null-eta-Einstein"] = (
        flags["Sasakian"]
        and flags["D-homothetically-fixed"]
        and residuals["beta-2(n+1)"] < tol
    )
    return StructureClass(flags=flags, alpha=alpha, beta=beta, residuals=residuals)


def classify_report(s: ContactStructure, points: Sequence, tol: float = 1e-7) -> VerificationReport:
    rep = VerificationReport(suite="classify", model=s.name)
    try:
        sc = classify(s, points, tol)
    except PreconditionError as exc:
        rep.checks.append(Check.not_applicable("classification", "contact-metric", tol, str(exc)))
        rep.classification = "refused"
        return rep
    tags = {
        "K-contact": "xi-killing",
        "Sasakian": "sasakian-nabla-phi",
        "eta-Einstein": "eta-einstein",
    }
    # each flag is evidenced by a residual below tol, its absence by one above
    for flag, tag in tags.items():
        held = sc.flags[flag]
        rep.checks.append(
            Check.from_values(
                f"{flag} residual" if held else f"not {flag} residual",
                tag,
                [sc.residuals[flag]],
                tol,
                comparison="below" if held else "above",
            )
        )
    rep.fitted["alpha"] = sc.alpha
    rep.fitted["beta"] = sc.beta
    rep.classification = ", ".join(f for f in FLAGS if sc.flags[f])
    return rep


# D-homothetic deformation --------------------------------------------------------------


def _derived(chart, up, down, name, combine: Callable, *sources: TensorField) -> TensorField:
    def fn(x: Jet):
        vals = [evaluate(f, x.value, x.spec.order) for f in sources]
        return combine(*vals)

    return TensorField(chart, up, down, fn, name)


def d_homothetic_deform(s: ContactStructure, a: float) -> ContactStructure:
    """eta -> a eta, xi -> xi / a, phi -> phi, g -> a g + a(a-1) eta (x) eta."""
    if not a > 0:
        raise InvalidArgument(f"deformation constant must be positive, got {a}")
    a = float(a)
    chart = s.chart
    tag = f"{s.name}~a={a:g}"
    eta = _derived(chart, 0, 1, f"eta[{tag}]", lambda e: e * a, s.eta)
    xi = _derived(chart, 1, 0, f"xi[{tag}]", lambda v: v * (1.0 / a), s.xi)
    g = _derived(
        chart,
        0,
        2,
        f"g[{tag}]",
        lambda gg, e: gg * a + jeinsum("i,j->ij", e, e) * (a * (a - 1.0)),
        s.g,
        s.eta,
    )
    return ContactStructure(n=s.n, eta=eta, xi=xi, phi=s.phi, g=g, name=tag)


def d_homothetic_alpha(alpha: float, a: float) -> float:
    """Image of the eta-Einstein coefficient alpha under the deformation with constant a."""
    return (alpha + 2.0 - 2.0 * a) / a


# transverse Ricci and the Tanaka-Webster scalar -----------------------------------------------


def project_to_contact(cp: ContactPoint, v: np.ndarray, min_norm: float = 1e-6) -> np.ndarray:
    """Unit vector (for g) in the contact distribution along -phi^2 v."""
    w = -(cp.phi @ (cp.phi @ v))
    norm = float(np.sqrt(w @ cp.g @ w))
    if norm < min_norm:
        raise InvalidArgument("vector has no component in the contact distribution")
    return w / norm


def transverse_ricci_check(
    s: ContactStructure, points: Sequence, tol: float = 1e-8, seed: int = 0
) -> VerificationReport:
    """Ric(X, Y) + 2 g(X, Y) on the contact distribution of a Sasakian structure."""
    rng = np.random.default_rng(seed)
    res = Residuals()
    rep = VerificationReport(suite="transverse-ricci", model=s.name)
    for p in points:
        cp = s.at(p, 3)
        if max_abs(cp.sasakian_residual()) > tol:
            raise PreconditionError(f"structure {s.name} is not Sasakian at {p}")
        pair = []
        while len(pair) < 2:
            try:
                pair.append(project_to_contact(cp, rng.standard_normal(s.chart.dim)))
            except InvalidArgument:
                continue
        x, y = pair
        res.add("X, Y in D", "contact-distribution", [cp.eta @ x, cp.eta @ y])
        res.add("Ric^T = Ric + 2g on D vanishes", "transverse-ricci", x @ (cp.ricci + 2 * cp.g) @ y)
    rep.checks = res.checks(tol)
    return rep


def tanaka_webster_scalar(s: ContactStructure, p) -> float:
    """W = r - Ric(xi, xi) + 4n."""
    cp = s.at(p, 2)
    return cp.scalar - cp.ricci_xi_xi + 4 * s.n
