"""Closed-form model manifolds and the model catalog.

* The Heisenberg group H^{2n+1} in global coordinates (x^1..x^n, y^1..y^n, z)
  with its left-invariant Sasakian structure and expanding soliton field.
* D-homothetic deformations of it.
* Random polynomial metrics and vector fields for universal identity tests.
* A flat contact metric structure on R^3 that is not K-contact.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from . import jets
from .contact import ContactStructure, d_homothetic_deform, project_to_contact, verify_axioms
from .errors import GeometryError, InvalidArgument
from .fields import Chart, TensorField, constant_field, evaluate, sample_points
from .jets import Jet, jeinsum
from .report import Check, Residuals, VerificationReport
from .riemann import MetricGeometry, lie, sectional_curvature


# Heisenberg group -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeisenbergModel:
    n: int
    structure: ContactStructure
    soliton_V: TensorField
    lam: float

    @property
    def chart(self) -> Chart:
        return self.structure.chart


def heisenberg_chart(n: int) -> Chart:
    names = tuple(f"x{i + 1}" for i in range(n)) + tuple(f"y{i + 1}" for i in range(n)) + ("z",)
    return Chart(2 * n + 1, names)


def heisenberg_structure(n: int) -> ContactStructure:
    """eta = (dz - sum y^i dx^i)/2, xi = 2 d/dz, g = eta (x) eta + (1/4) sum (dx^i^2 + dy^i^2)."""
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    chart = heisenberg_chart(n)
    dim = 2 * n + 1
    z = 2 * n

    def eta(x: Jet):
        return jets.stack([-0.5 * x[n + i] for i in range(n)] + [0.0] * n + [0.5])

    def phi(x: Jet):
        rows = [[0.0] * dim for _ in range(dim)]
        for i in range(n):
            rows[n + i][i] = -1.0  # phi(d/dx^i) = -d/dy^i
            rows[i][n + i] = 1.0  # phi(d/dy^i) = d/dx^i + y^i d/dz
            rows[z][n + i] = x[n + i]
        return jets.stack(rows, x.spec)

    def metric(x: Jet):
        # expanded eta (x) eta + diag/4; the cross terms couple dx^i with dx^j and dz
        rows = [[0.0] * dim for _ in range(dim)]
        for i in range(n):
            yi = x[n + i]
            for j in range(n):
                rows[i][j] = yi * x[n + j] * 0.25 + (0.25 if i == j else 0.0)
            rows[i][z] = rows[z][i] = yi * -0.25
            rows[n + i][n + i] = 0.25
        rows[z][z] = 0.25
        return jets.stack(rows, x.spec)

    xi = np.zeros(dim)
    xi[z] = 2.0
    return ContactStructure(
        n=n,
        eta=TensorField(chart, 0, 1, eta, "eta"),
        xi=constant_field(chart, 1, 0, xi, "xi"),
        phi=TensorField(chart, 1, 1, phi, "phi"),
        g=TensorField(chart, 0, 2, metric, "g"),
        name=f"heisenberg:n={n}",
    )


def heisenberg_metric_from_eta(n: int) -> TensorField:
    """The Heisenberg metric assembled as a tensor product (regression reference)."""
    s = heisenberg_structure(n)
    flat = np.zeros((2 * n + 1, 2 * n + 1))
    flat[: 2 * n, : 2 * n] = 0.25 * np.eye(2 * n)

    def fn(x: Jet):
        e = evaluate(s.eta, x.value, x.spec.order)
        return jeinsum("i,j->ij", e, e) + flat

    return TensorField(s.chart, 0, 2, fn, "eta(x)eta + flat/4")


def heisenberg_soliton_field(n: int, scale: float = 1.0) -> TensorField:
    """V = -2(n+1) (x^i d/dx^i + y^i d/dy^i + 2 z d/dz), optionally rescaled."""
    chart = heisenberg_chart(n)
    weights = np.ones(2 * n + 1)
    weights[-1] = 2.0
    c = -2.0 * (n + 1) * scale
    return TensorField(chart, 1, 0, lambda x: x * (weights * c), "V")


def build_heisenberg(n: int) -> HeisenbergModel:
    return HeisenbergModel(
        n=n,
        structure=heisenberg_structure(n),
        soliton_V=heisenberg_soliton_field(n),
        lam=2.0 * n + 4.0,
    )


def heisenberg_deformed(n: int, a: float) -> ContactStructure:
    s = d_homothetic_deform(heisenberg_structure(n), a)
    return ContactStructure(n, s.eta, s.xi, s.phi, s.g, name=f"heisenberg-deformed:n={n},a={a:g}")


def phi_sectional_curvature(s: ContactStructure, x: np.ndarray, p) -> float:
    """Sectional curvature of the plane spanned by X and phi X, for X in the contact distribution."""
    cp = s.at(p, 2)
    x = np.asarray(x, dtype=float)
    if abs(cp.eta @ x) > 1e-8:
        raise InvalidArgument("X must lie in the contact distribution (eta(X) = 0)")
    px = cp.phi @ x
    if np.sqrt(abs(px @ cp.g @ px)) < 1e-6:
        raise InvalidArgument("degenerate plane: phi X vanishes")
    return sectional_curvature(cp.pg, x, px)


def random_contact_direction(s: ContactStructure, p, rng) -> np.ndarray:
    cp = s.at(p, 0)
    while True:
        try:
            return project_to_contact(cp, rng.standard_normal(s.chart.dim))
        except InvalidArgument:
            continue


# PDE system for phi-preserving fields ------------------------------------------------


def pde_residuals(n: int, v: TensorField, p) -> dict[str, np.ndarray]:
    """Residuals of the system obtained from L_V xi = 4(n+1) xi and L_V phi = 0.

    Components: V^i (x-part), Vb^i (y-part), V^z.  The Vb^j equation carries
    the term dV^z/dx^j, which is forced by the z-component of (L_V phi)(d/dy^j);
    the reduced form without it is reported too and does not see that term.
    """
    jv = evaluate(v, p, 1)
    val = jv.value
    d = jv.grad().value  # d[k, m] = d_m V^k
    xs, ys, z = slice(0, n), slice(n, 2 * n), 2 * n
    y = np.asarray(p, dtype=float)[ys]
    dV_dx, dV_dy, dV_dz = d[xs, xs], d[xs, ys], d[xs, z]  # [i, j]
    dVb_dx, dVb_dy, dVb_dz = d[ys, xs], d[ys, ys], d[ys, z]
    dVz_dx, dVz_dy, dVz_dz = d[z, xs], d[z, ys], d[z, z]
    vb = val[ys]
    return {
        "dV^i/dx^j = dVb^i/dy^j": dV_dx - dVb_dy,
        "dV^i/dy^j = -dVb^i/dx^j": dV_dy + dVb_dx,
        "y^i dV^i/dy^j = dV^z/dy^j": y @ dV_dy - dVz_dy,
        "Vb^j = dV^z/dx^j + y^j dV^z/dz - y^i dVb^i/dy^j": vb - (dVz_dx + y * dVz_dz - y @ dVb_dy),
        "Vb^j = y^j dV^z/dz - y^i dVb^i/dy^j": vb - (y * dVz_dz - y @ dVb_dy),
        "dV^z/dz = -4(n+1)": np.atleast_1d(dVz_dz + 4.0 * (n + 1)),
        "V^i, Vb^i independent of z": np.concatenate([dV_dz, dVb_dz]),
    }


PDE_TAGS = {
    "dV^i/dx^j = dVb^i/dy^j": "pde-cauchy-riemann-1",
    "dV^i/dy^j = -dVb^i/dx^j": "pde-cauchy-riemann-2",
    "y^i dV^i/dy^j = dV^z/dy^j": "pde-vz-y",
    "Vb^j = dV^z/dx^j + y^j dV^z/dz - y^i dVb^i/dy^j": "pde-vbar",
    "Vb^j = y^j dV^z/dz - y^i dVb^i/dy^j": "pde-vbar-reduced",
    "dV^z/dz = -4(n+1)": "pde-vz-z",
    "V^i, Vb^i independent of z": "pde-z-independence",
}


def pde_check(
    model: HeisenbergModel, v_candidate: TensorField, points: Sequence, tol: float = 1e-10
) -> VerificationReport:
    """Residual of each PDE, cross-checked against L_V xi and L_V phi directly."""
    n = model.n
    s = model.structure
    res = Residuals()
    for p in points:
        for name, val in pde_residuals(n, v_candidate, p).items():
            res.add(name, PDE_TAGS[name], val)
        vj = evaluate(v_candidate, p, 1)
        xi = evaluate(s.xi, p, 1)
        phi = evaluate(s.phi, p, 1)
        res.add("L_V xi = 4(n+1) xi", "lie-xi-soliton", lie(vj, xi, 1).value - 4 * (n + 1) * xi.value)
        res.add("L_V phi = 0", "lie-phi-soliton", lie(vj, phi, 1).value)
    rep = VerificationReport(suite="pde", model=s.name)
    rep.checks = res.checks(tol)
    return rep


def pde_mutations(n: int) -> dict[str, tuple[TensorField, str]]:
    """Candidates that each break one equation of the system, with the equation they target."""
    base = heisenberg_soliton_field(n)
    chart = base.chart
    dim = 2 * n + 1

    def shifted(var: int, name: str) -> TensorField:
        e = np.zeros(dim)
        e[-1] = 1.0

        def fn(x: Jet):
            return evaluate(base, x.value, x.spec.order) + x[var] * e

        return TensorField(chart, 1, 0, fn, name)

    xi = np.zeros(dim)
    xi[-1] = 2.0
    return {
        "F = x1": (shifted(0, "V+x1 d/dz"), "Vb^j = dV^z/dx^j + y^j dV^z/dz - y^i dVb^i/dy^j"),
        "F = y1": (shifted(n, "V+y1 d/dz"), "y^i dV^i/dy^j = dV^z/dy^j"),
        "V = xi": (constant_field(chart, 1, 0, xi, "xi"), "dV^z/dz = -4(n+1)"),
    }


# random polynomial data ----------------------------------------------------------------


@dataclass(frozen=True)
class RandomMetricSpec:
    dim: int
    degree: int = 3
    eps: float = 0.3
    seed: int = 0
    box: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgument("dimension must be positive")
        if not 0 <= self.degree <= 3:
            raise InvalidArgument("polynomial degree must be in 0..3")


def monomial_exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(degree + 1):
        for combo in combinations_with_replacement(range(dim), deg):
            m = [0] * dim
            for v in combo:
                m[v] += 1
            out.append(tuple(m))
    return out


def monomials(x: Jet, exponents: Sequence[tuple[int, ...]]) -> Jet:
    """Vector jet of the monomials x^alpha."""
    parts = []
    for m in exponents:
        term = jets.Jet.constant(x.spec, 1.0)
        for var, k in enumerate(m):
            if k:
                term = term * x[var] ** k
        parts.append(term)
    return jets.stack(parts, x.spec)


def polynomial_field(chart: Chart, up: int, down: int, exponents, coeffs, name="") -> TensorField:
    """Field whose components are sum_alpha coeffs[alpha, ...] x^alpha."""
    coeffs = np.asarray(coeffs, dtype=float)
    idx = "abcd"[: up + down]
    return TensorField(
        chart, up, down, lambda x: jeinsum(f"z,z{idx}->{idx}", monomials(x, exponents), coeffs), name
    )


def _positive_on_box(g: TensorField, spec: RandomMetricSpec, rng) -> bool:
    lo, hi = spec.box
    corners = np.array(np.meshgrid(*[[lo, hi]] * spec.dim)).reshape(spec.dim, -1).T
    pts = np.vstack([corners[:64], rng.uniform(lo, hi, size=(64, spec.dim))])
    return all(np.linalg.eigvalsh(g(p))[0] > 0.05 for p in pts)


def random_metric_field(spec: RandomMetricSpec, max_tries: int = 20) -> TensorField:
    """g = I + eps * (symmetric polynomial matrix), positive definite on the box.

    Coefficients are uniform in [-1, 1] divided by sqrt(#monomials), so eps sets
    the typical size of the perturbation independently of dimension and degree.
    """
    rng = np.random.default_rng([spec.seed, spec.dim, 1])
    chart = Chart(spec.dim, sample_box=spec.box)
    exps = monomial_exponents(spec.dim, spec.degree)
    for _ in range(max_tries):
        c = rng.uniform(-1.0, 1.0, size=(len(exps), spec.dim, spec.dim))
        c = 0.5 * (c + c.transpose(0, 2, 1)) * (spec.eps / np.sqrt(len(exps)))
        c[0] += np.eye(spec.dim)
        g = polynomial_field(chart, 0, 2, exps, c, f"random-metric:dim={spec.dim},seed={spec.seed}")
        if _positive_on_box(g, spec, rng):
            return g
    raise GeometryError(f"no positive definite metric found for {spec} after {max_tries} tries")


def random_metric(spec: RandomMetricSpec) -> MetricGeometry:
    return MetricGeometry(random_metric_field(spec))


def random_vector_field(spec: RandomMetricSpec, scale: float = 1.0) -> TensorField:
    rng = np.random.default_rng([spec.seed, spec.dim, 2])
    chart = Chart(spec.dim, sample_box=spec.box)
    exps = monomial_exponents(spec.dim, spec.degree)
    c = rng.uniform(-1.0, 1.0, size=(len(exps), spec.dim)) * scale
    return polynomial_field(chart, 1, 0, exps, c, f"random-V:dim={spec.dim},seed={spec.seed}")


def random_function(spec: RandomMetricSpec) -> TensorField:
    rng = np.random.default_rng([spec.seed, spec.dim, 3])
    chart = Chart(spec.dim, sample_box=spec.box)
    exps = monomial_exponents(spec.dim, spec.degree)
    c = rng.uniform(-1.0, 1.0, size=len(exps))
    return polynomial_field(chart, 0, 0, exps, c, f"random-f:dim={spec.dim},seed={spec.seed}")


# flat non-K-contact candidate -------------------------------------------------------------


def flat_r3_candidate() -> ContactStructure:
    """eta = (cos z dx + sin z dy)/2 with the flat metric (dx^2 + dy^2 + dz^2)/4."""
    chart = Chart(3, ("x", "y", "z"))

    def eta(x: Jet):
        return jets.stack([0.5 * x[2].cos(), 0.5 * x[2].sin(), 0.0])

    def xi(x: Jet):
        return jets.stack([2.0 * x[2].cos(), 2.0 * x[2].sin(), 0.0])

    def phi(x: Jet):
        c, s = x[2].cos(), x[2].sin()
        return jets.stack([[0.0, 0.0, s], [0.0, 0.0, -c], [-s, c, 0.0]])

    return ContactStructure(
        n=1,
        eta=TensorField(chart, 0, 1, eta, "eta"),
        xi=TensorField(chart, 1, 0, xi, "xi"),
        phi=TensorField(chart, 1, 1, phi, "phi"),
        g=constant_field(chart, 0, 2, 0.25 * np.eye(3), "g"),
        name="flat-r3",
    )


def build_flat_r3_candidate(points: Sequence | None = None, tol: float = 1e-9):
    """The flat candidate if it passes the axiom checker, else ``(None, report)``."""
    s = flat_r3_candidate()
    if points is None:
        points = sample_points(s.chart, 16, seed=0)
    rep = verify_axioms(s, points, tol)
    if not rep.passed:
        worst = max((c for c in rep.checks if not c.passed), key=lambda c: c.statistic or 0)
        rep.notes.append(f"model rejected: {worst.name} residual {worst.statistic:.3g}")
        return None, rep
    return s, rep


# catalog ---------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    selector: str
    kind: str
    structure: ContactStructure | None
    geometry: MetricGeometry
    V: TensorField | None
    lam: float | None
    params: dict


def parse_selector(selector: str) -> tuple[str, dict]:
    kind, _, rest = selector.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise InvalidArgument(f"malformed model parameter {item!r} in {selector!r}")
            params[key.strip()] = val.strip()
    return kind.strip(), params


def resolve_model(selector: str) -> CatalogEntry:
    """Look up a model by name and parameters, e.g. ``heisenberg:n=2``."""
    kind, params = parse_selector(selector)
    try:
        if kind == "heisenberg":
            m = build_heisenberg(int(params.get("n", 1)))
            return CatalogEntry(selector, kind, m.structure, m.structure.geometry, m.soliton_V, m.lam, params)
        if kind == "heisenberg-deformed":
            n, a = int(params.get("n", 1)), float(params.get("a", 2))
            s = heisenberg_deformed(n, a)
            return CatalogEntry(selector, kind, s, s.geometry, s.xi, None, params)
        if kind == "random":
            spec = RandomMetricSpec(
                dim=int(params.get("dim", 3)),
                seed=int(params.get("seed", 0)),
                degree=int(params.get("degree", 3)),
                eps=float(params.get("eps", 0.3)),
            )
            return CatalogEntry(selector, kind, None, random_metric(spec), random_vector_field(spec), None, params)
        if kind == "flat-r3":
            s = flat_r3_candidate()
            return CatalogEntry(selector, kind, s, s.geometry, s.xi, None, params)
    except ValueError as exc:
        raise InvalidArgument(f"bad parameters in model selector {selector!r}: {exc}") from exc
    raise InvalidArgument(f"unknown model {kind!r}")
