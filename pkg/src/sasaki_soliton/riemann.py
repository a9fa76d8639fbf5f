"""Levi-Civita calculus on a chart.

Index conventions for component arrays:

* ``gamma[k, i, j]`` is the Christoffel symbol Gamma^k_ij.
* ``riemann[l, i, j, k]`` is the l-th component of R(d_i, d_j) d_k with
  R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
* ``ricci[j, k] = riemann[i, i, j, k]`` (trace of X -> R(X,Y)Z).
* Covariant derivatives append the differentiation index last:
  ``nabla(T)[..., m] = (nabla_m T)[...]``.
* ``lie_conn[k, i, j]`` is the k-th component of (L_V nabla)(d_i, d_j).

Every kernel works on jets: a tensor known to order ``k`` yields derivatives
known to order ``k - 1``, and products are truncated to the lowest order.
"""

from __future__ import annotations

import string
import threading
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jets
from .errors import CapabilityError, InvalidArgument, SingularValueError
from .fields import TensorField, d_one_form, d_two_form, evaluate, raised
from .jets import DEFAULT_ORDER, MAX_ORDER, Jet, jeinsum, jsum
from .report import Residuals, VerificationReport

_SLOTS = "abcdefgh"


# jet-level kernels -------------------------------------------------------------


def christoffel_jet(g: Jet, ginv: Jet) -> Jet:
    dg = g.grad()  # dg[a, b, c] = d_c g_ab
    lowered = (dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg) * 0.5  # [i, j, l]
    return jeinsum("kl,ijl->kij", ginv, lowered)


def riemann_jet(gamma: Jet) -> Jet:
    dgam = gamma.grad()  # dgam[l, j, k, i] = d_i Gamma^l_jk
    quad = jeinsum("lim,mjk->lijk", gamma, gamma)
    return jsum(
        dgam.transpose(0, 3, 1, 2),
        -dgam.transpose(0, 1, 3, 2),
        quad,
        -quad.transpose(0, 2, 1, 3),
    )


def nabla(t: Jet, gamma: Jet, up: int) -> Jet:
    """Covariant derivative of a tensor jet whose first ``up`` axes are contravariant."""
    r = t.ndim
    idx = _SLOTS[:r]
    terms = [t.grad()]
    for s in range(r):
        src = idx[:s] + "y" + idx[s + 1 :]
        if s < up:
            terms.append(jeinsum(f"{idx[s]}zy,{src}->{idx}z", gamma, t))
        else:
            terms.append(-jeinsum(f"yz{idx[s]},{src}->{idx}z", gamma, t))
    return jsum(*terms)


def lie(v: Jet, t: Jet, up: int) -> Jet:
    """Lie derivative of a tensor jet along a vector jet (coordinate formula)."""
    r = t.ndim
    idx = _SLOTS[:r]
    dv = v.grad()  # dv[a, m] = d_m V^a
    terms = [jeinsum(f"z,{idx}z->{idx}", v, t.grad())]
    for s in range(r):
        src = idx[:s] + "y" + idx[s + 1 :]
        if s < up:
            terms.append(-jeinsum(f"{idx[s]}y,{src}->{idx}", dv, t))
        else:
            terms.append(jeinsum(f"y{idx[s]},{src}->{idx}", dv, t))
    return jsum(*terms)


def lie_connection_jet(v: Jet, gamma: Jet, riemann: Jet) -> Jet:
    """(L_V nabla)(X, Y) = nabla_X nabla_Y V - nabla_{nabla_X Y} V + R(V, X) Y."""
    dv = nabla(v, gamma, 1)  # [k, j] = nabla_j V^k
    ddv = nabla(dv, gamma, 1)  # [k, j, i] = nabla_i nabla_j V^k
    return jsum(ddv.transpose(0, 2, 1), jeinsum("kmij,m->kij", riemann, v))


def lie_connection_coordinate(v: Jet, gamma: Jet) -> Jet:
    """Coordinate form of L_V Gamma; an independent route to :func:`lie_connection_jet`."""
    dv = v.grad()  # [k, m] = d_m V^k
    ddv = dv.grad()  # [k, j, i] = d_i d_j V^k
    dgam = gamma.grad()  # [k, i, j, m] = d_m Gamma^k_ij
    return jsum(
        ddv.transpose(0, 2, 1),
        jeinsum("m,kijm->kij", v, dgam),
        -jeinsum("mij,km->kij", gamma, dv),
        jeinsum("kmj,mi->kij", gamma, dv),
        jeinsum("kim,mj->kij", gamma, dv),
    )


def contract_vector(t: Jet | np.ndarray, v, slot: int):
    """Insert a vector into one covariant slot of a tensor array."""
    nd = t.ndim
    idx = string.ascii_lowercase[:nd]
    out = idx[:slot] + idx[slot + 1 :]
    return jeinsum(f"{idx},{idx[slot]}->{out}", t, v)


# geometry at a point ----------------------------------------------------------


class PointGeometry:
    """Curvature data of a metric at one point, derived lazily from one metric jet.

    With the metric known to order ``m``: Christoffel symbols to ``m-1``,
    curvature and Ricci data to ``m-2``, their covariant derivatives to ``m-3``.
    """

    def __init__(self, metric: TensorField, point, order: int = DEFAULT_ORDER):
        self.point = np.asarray(point, dtype=float)
        self.order = order
        g = evaluate(metric, self.point, order)
        g0 = g.value
        if not np.allclose(g0, g0.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g0).max())):
            raise InvalidArgument(f"metric is not symmetric at {self.point}")
        eig = np.linalg.eigvalsh(g0)
        if eig[0] <= 0:
            raise SingularValueError(
                f"metric is not positive definite at {self.point} (min eigenvalue {eig[0]:.3g})"
            )
        self.g = g

    def _need(self, order_loss: int, what: str):
        if self.order < order_loss:
            raise CapabilityError(
                f"{what} needs metric jets of order >= {order_loss}, have {self.order}"
            )

    @cached_property
    def ginv(self) -> Jet:
        return jets.inv(self.g)

    @cached_property
    def gamma(self) -> Jet:
        self._need(1, "Christoffel symbols")
        return christoffel_jet(self.g, self.ginv)

    @cached_property
    def riemann(self) -> Jet:
        self._need(2, "curvature")
        return riemann_jet(self.gamma)

    @cached_property
    def ricci(self) -> Jet:
        return self.riemann.trace(0, 1)

    @cached_property
    def ricci_op(self) -> Jet:
        return jeinsum("ik,kj->ij", self.ginv, self.ricci)

    @cached_property
    def scalar(self) -> Jet:
        return self.ricci_op.trace(0, 1)

    @cached_property
    def riemann_lowered(self) -> np.ndarray:
        """R_ijkl = g(R(d_i, d_j) d_k, d_l) as plain values."""
        return np.einsum("mijk,ml->ijkl", self.riemann.value, self.g.value)

    @cached_property
    def nabla_g(self) -> Jet:
        return nabla(self.g, self.gamma, 0)

    @cached_property
    def nabla_ricci(self) -> Jet:
        self._need(3, "the covariant derivative of Ricci")
        return nabla(self.ricci, self.gamma, 0)

    @cached_property
    def nabla_ricci_op(self) -> Jet:
        self._need(3, "the covariant derivative of the Ricci operator")
        return nabla(self.ricci_op, self.gamma, 1)

    def covariant(self, t: Jet, up: int) -> Jet:
        return nabla(t, self.gamma, up)

    def laplacian_scalar(self) -> float:
        """(Delta r) with Delta = -div grad; needs metric jets of order 4."""
        self._need(4, "the Laplacian of the scalar curvature")
        dr = self.scalar.grad()  # covector, order m-3
        hess = nabla(dr, self.gamma, 0)  # [i, j] = nabla_j d_i r
        return float(-np.einsum("ij,ij->", self.ginv.value, hess.value))


class MetricGeometry:
    """A Riemannian metric on a chart with memoised per-point curvature data.

    The cache is keyed by (point, order) and guarded by a lock, so concurrent
    evaluation at distinct points is safe; cached values are never mutated.
    """

    def __init__(self, g: TensorField, cache_size: int = 256):
        if g.rank != (0, 2):
            raise InvalidArgument(f"metric must be a (0,2) field, got {g.rank}")
        self.g = g
        self.chart = g.chart
        self._cache: dict = {}
        self._lock = threading.Lock()
        self._cache_size = cache_size

    @property
    def dim(self) -> int:
        return self.chart.dim

    def at(self, p, order: int = DEFAULT_ORDER) -> PointGeometry:
        p = self.chart.check_point(p)
        if order > MAX_ORDER:
            raise CapabilityError(f"metric jets of order {order} are not supported")
        key = (p.tobytes(), order)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        pg = PointGeometry(self.g, p, order)
        with self._lock:
            if len(self._cache) >= self._cache_size:
                self._cache.clear()
            self._cache[key] = pg
        return pg


# field-level operations ---------------------------------------------------------


def christoffel(geom: MetricGeometry, p, order: int = DEFAULT_ORDER) -> Jet:
    return geom.at(p, order).gamma


def riemann_tensor(geom: MetricGeometry, p, order: int = DEFAULT_ORDER) -> Jet:
    return geom.at(p, order).riemann


def ricci(geom: MetricGeometry, p, order: int = DEFAULT_ORDER) -> Jet:
    return geom.at(p, order).ricci


def ricci_operator(geom: MetricGeometry, p, order: int = DEFAULT_ORDER) -> Jet:
    return geom.at(p, order).ricci_op


def scalar_curvature(geom: MetricGeometry, p, order: int = DEFAULT_ORDER) -> float:
    return float(geom.at(p, order).scalar.value)


def sectional_curvature(pg: PointGeometry, x: np.ndarray, y: np.ndarray) -> float:
    """K(X, Y) = g(R(X,Y)Y, X) / (|X|^2 |Y|^2 - g(X,Y)^2)."""
    g = pg.g.value
    num = np.einsum("ijkl,i,j,k,l->", pg.riemann_lowered, x, y, y, x)
    den = (x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2
    if den <= 1e-14:
        raise InvalidArgument("degenerate plane in sectional curvature")
    return float(num / den)


def covariant_derivative(geom: MetricGeometry, t: TensorField) -> TensorField:
    """The (p, q+1) field nabla T, differentiation index last."""

    def fn(x: Jet) -> Jet:
        k = x.spec.order
        return nabla(raised(t, x), geom.at(x.value, k + 1).gamma, t.up)

    return TensorField(t.chart, t.up, t.down + 1, fn, f"nabla({t.name})")


def lie_derivative(v: TensorField, t: TensorField) -> TensorField:
    """L_V T for tensors of rank (0, q) or (1, q), q <= 3."""
    if v.rank != (1, 0):
        raise InvalidArgument("lie_derivative needs a vector field V")
    if t.up > 1 or t.down > 3:
        raise CapabilityError(f"Lie derivative of a {t.rank} tensor is not supported")
    return TensorField(
        t.chart,
        t.up,
        t.down,
        lambda x: lie(raised(v, x), raised(t, x), t.up),
        f"L_{v.name}({t.name})",
    )


def lie_derivative_connection(geom: MetricGeometry, v: TensorField) -> TensorField:
    """(L_V nabla) as a (1, 2) field; needs two more jet orders than requested."""

    def fn(x: Jet) -> Jet:
        k = x.spec.order
        pg = geom.at(x.value, k + 2)
        return lie_connection_jet(raised(v, x, 2), pg.gamma, pg.riemann)

    return TensorField(geom.chart, 1, 2, fn, f"L_{v.name}(nabla)")


# universal identity checks -------------------------------------------------------


def connection_commutation_residuals(pg: PointGeometry, v: Jet, soliton_lambda=None) -> dict:
    """Residuals of the commutation formula for L_V and nabla acting on g.

    ``(L_V nabla g - nabla L_V g)(X; Y, Z) = -g((L_V nabla)(X,Y), Z) - g((L_V nabla)(X,Z), Y)``
    with the left side built from coordinate Lie derivatives of g and of nabla g
    and the right side from the closed form of L_V nabla.  When a soliton
    constant is supplied, also the expression of L_V nabla through nabla Ric.
    """
    g = pg.g
    lie_g = lie(v, g, 0)  # order m-1
    lhs = jsum(lie(v, pg.nabla_g, 0), -nabla(lie_g, pg.gamma, 0))  # [a, b, m]
    lc = lie_connection_jet(v, pg.gamma, pg.riemann).value  # [k, i, j]
    gv = g.value
    low = np.einsum("bk,kma->abm", gv, lc) + np.einsum("ak,kmb->abm", gv, lc)
    out = {"commutation": lhs.value + low}
    if soliton_lambda is not None:
        nr = pg.nabla_ricci.value  # [x, y, z] = (nabla_z Ric)(x, y)
        lowered = np.einsum("lk,kij->ijl", gv, lc)  # g(L(i, j), l)
        rhs = nr.transpose(0, 1, 2) - np.einsum("jli->ijl", nr) - np.einsum("ilj->ijl", nr)
        # rhs[i, j, l] = (nabla_l Ric)(i, j) - (nabla_i Ric)(j, l) - (nabla_j Ric)(i, l)
        out["soliton connection"] = lowered - rhs
    return out


def curvature_commutation_residual(pg: PointGeometry, v: Jet) -> np.ndarray:
    """(L_V R)(X,Y)Z - [(nabla_X L_V nabla)(Y,Z) - (nabla_Y L_V nabla)(X,Z)]."""
    lie_r = lie(v, pg.riemann, 1).value  # [l, i, j, k]
    lc = lie_connection_jet(v, pg.gamma, pg.riemann)
    dlc = nabla(lc, pg.gamma, 1).value  # [l, a, b, m] = nabla_m L^l_ab
    rhs = np.einsum("ljki->lijk", dlc) - np.einsum("likj->lijk", dlc)
    return lie_r - rhs


def _vector_jet(v, p, order):
    return evaluate(v, p, order) if isinstance(v, TensorField) else v


def commutation_check_connection(
    geom: MetricGeometry,
    v: TensorField,
    points: Sequence,
    tol: float = 1e-8,
    soliton_lambda: float | None = None,
) -> VerificationReport:
    """Universal L_V / nabla commutation on g, plus the soliton form when lambda is given."""
    res = Residuals()
    for p in points:
        pg = geom.at(p, 3)
        out = connection_commutation_residuals(pg, evaluate(v, p, 3), soliton_lambda)
        res.add("connection commutation", "lie-nabla-commutation", out["commutation"])
        if soliton_lambda is not None:
            res.add("soliton connection", "soliton-lie-connection", out["soliton connection"])
    rep = VerificationReport(suite="commutation-connection", model=geom.g.name)
    rep.checks = res.checks(tol)
    return rep


def commutation_check_curvature(
    geom: MetricGeometry, v: TensorField, points: Sequence, tol: float = 1e-7
) -> VerificationReport:
    """L_V R computed directly against its expression through nabla(L_V nabla)."""
    res = Residuals()
    for p in points:
        pg = geom.at(p, 3)
        res.add(
            "curvature commutation",
            "lie-curvature-commutation",
            curvature_commutation_residual(pg, evaluate(v, p, 3)),
        )
    rep = VerificationReport(suite="commutation-curvature", model=geom.g.name)
    rep.checks = res.checks(tol)
    return rep


def bianchi_residuals(pg: PointGeometry) -> dict:
    r = pg.riemann.value
    first = r + np.einsum("ljki->lijk", r) + np.einsum("lkij->lijk", r)
    nr = pg.nabla_ricci.value  # [j, k, i] = nabla_i Ric_jk
    div_ric = np.einsum("ij,jki->k", pg.ginv.value, nr)
    dr = pg.scalar.grad().value
    return {"first": first, "second": div_ric - 0.5 * dr}


def bianchi_checks(
    geom: MetricGeometry, points: Sequence, tol_first: float = 1e-9, tol_second: float = 1e-8
) -> VerificationReport:
    res = Residuals()
    for p in points:
        b = bianchi_residuals(geom.at(p, 3))
        res.add("first Bianchi", "first-bianchi", b["first"])
        res.add("contracted second Bianchi", "contracted-bianchi", b["second"])
    rep = VerificationReport(suite="bianchi", model=geom.g.name)
    rep.checks = res.checks(tol_first, {"contracted second Bianchi": tol_second})
    return rep


UNIVERSAL_TOLERANCES = {
    "connection commutation": 1e-7,
    "curvature commutation": 1e-6,
    "metric compatibility": 1e-10,
    "first Bianchi": 1e-9,
    "contracted second Bianchi": 1e-8,
    "d d = 0": 1e-10,
}


def universal_suite(
    geom: MetricGeometry,
    v: TensorField,
    points: Sequence,
    tolerances: dict[str, float] | None = None,
) -> VerificationReport:
    """Identities that hold for every metric and vector field.

    ``d d = 0`` is checked on the 1-form g(V, .).
    """
    tols = dict(UNIVERSAL_TOLERANCES, **(tolerances or {}))
    res = Residuals()
    for p in points:
        pg = geom.at(p, 3)
        vj = evaluate(v, p, 3)
        out = connection_commutation_residuals(pg, vj)
        res.add("connection commutation", "lie-nabla-commutation", out["commutation"])
        res.add("curvature commutation", "lie-curvature-commutation", curvature_commutation_residual(pg, vj))
        res.add("metric compatibility", "metric-compatibility", pg.nabla_g.value)
        b = bianchi_residuals(pg)
        res.add("first Bianchi", "first-bianchi", b["first"])
        res.add("contracted second Bianchi", "contracted-bianchi", b["second"])
        omega = jeinsum("ij,j->i", pg.g, vj)
        res.add("d d = 0", "d-squared", d_two_form(d_one_form(omega)).value)
    rep = VerificationReport(suite="universal", model=geom.g.name)
    rep.checks = res.checks(max(tols.values()), tols)
    return rep
