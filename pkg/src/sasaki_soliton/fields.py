"""Charts, tensor fields given by closed-form components, and field-level calculus.

A :class:`TensorField` wraps a component function ``fn(x) -> components`` where
``x`` is the vector jet of chart coordinates seeded at the evaluation point.
Writing the function with ordinary arithmetic on ``x[i]`` makes every partial
derivative of every component available through the jet.  Component arrays put
contravariant (upper) axes first, then covariant ones: ``phi[i, j]`` is
``phi^i_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import DomainError, InvalidArgument, NumericError
from .jets import DEFAULT_ORDER, Jet, JetSpec
from .report import Check, VerificationReport


@dataclass(frozen=True)
class Chart:
    """A single coordinate chart.

    ``bounds`` restricts the domain (``None`` means all of R^dim); ``sample_box``
    is the default box used when drawing random points.
    """

    dim: int
    names: tuple[str, ...] = ()
    bounds: tuple[float, float] | None = None
    sample_box: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgument("chart dimension must be positive")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i}" for i in range(self.dim)))
        if len(self.names) != self.dim:
            raise InvalidArgument("one variable name per chart dimension is required")
        if len(set(self.names)) != self.dim:
            raise InvalidArgument(f"variable names must be distinct: {self.names}")

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DomainError(f"point has shape {p.shape}, chart expects ({self.dim},)")
        if not np.all(np.isfinite(p)):
            raise DomainError(f"non-finite point coordinates {p}")
        if self.bounds is not None:
            lo, hi = self.bounds
            if np.any(p < lo) or np.any(p > hi):
                raise DomainError(f"point {p} outside chart domain [{lo}, {hi}]^{self.dim}")
        return p


def sample_points(chart: Chart, count: int, seed: int = 0, box=None) -> np.ndarray:
    """``count`` uniform random points in a box, reproducible from ``seed``."""
    lo, hi = box if box is not None else chart.sample_box
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(count, chart.dim))


ComponentFn = Callable[[Jet], object]


@dataclass(frozen=True, eq=False)
class TensorField:
    """A (p, q) tensor field on a chart with jet-evaluable components."""

    chart: Chart
    up: int
    down: int
    fn: ComponentFn = field(repr=False)
    name: str = ""

    @property
    def rank(self) -> tuple[int, int]:
        return (self.up, self.down)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.chart.dim,) * (self.up + self.down)

    def evaluate(self, p, order: int = DEFAULT_ORDER) -> Jet:
        return evaluate(self, p, order)

    def __call__(self, p, order: int = 0) -> np.ndarray:
        """Plain component values at ``p``."""
        return evaluate(self, p, order).value


class ScalarField(TensorField):
    """A (0, 0) tensor field."""

    def __init__(self, chart: Chart, fn: ComponentFn, name: str = ""):
        super().__init__(chart, 0, 0, fn, name)


def evaluate(f: TensorField, p, derivative_order: int = DEFAULT_ORDER) -> Jet:
    """Components of ``f`` at ``p`` as jets carrying partials up to ``derivative_order``."""
    p = f.chart.check_point(p)
    spec = JetSpec(f.chart.dim, derivative_order)
    out = f.fn(jets.seed(spec, p))
    out = jets.as_jet(out, spec) if isinstance(out, Jet) else _promote(out, spec)
    if out.spec.order != derivative_order:
        raise InvalidArgument(f"{f.name or 'field'} returned a jet of the wrong order")
    if out.shape != f.shape:
        raise InvalidArgument(
            f"{f.name or 'field'} returned components of shape {out.shape}, expected {f.shape}"
        )
    if not np.all(np.isfinite(out.coeffs)):
        raise NumericError(f"{f.name or 'field'} produced non-finite components at {p}")
    return out


def _promote(out, spec: JetSpec) -> Jet:
    if isinstance(out, (list, tuple)):
        return jets.stack(out, spec)
    return Jet.constant(spec, out)


def raised(f: TensorField, x: Jet, extra: int = 1) -> Jet:
    """Evaluate ``f`` at the base point of ``x`` with ``extra`` more orders."""
    return evaluate(f, x.value, x.spec.order + extra)


def constant_field(chart: Chart, up: int, down: int, values, name: str = "") -> TensorField:
    values = np.asarray(values, dtype=float)
    return TensorField(chart, up, down, lambda x: values, name)


def coordinate_field(chart: Chart, index: int) -> TensorField:
    """The coordinate vector field d/dx^index."""
    e = np.zeros(chart.dim)
    e[index] = 1.0
    return constant_field(chart, 1, 0, e, f"d/d{chart.names[index]}")


# field calculus -------------------------------------------------------------


def _require(f: TensorField, up: int, down: int, what: str):
    if f.rank != (up, down):
        raise InvalidArgument(f"{what} expects a ({up},{down}) field, got {f.rank}")


def d_one_form(omega: Jet) -> Jet:
    """Component exterior derivative of a 1-form jet, 1/2 convention; order drops by one."""
    grad = omega.grad()  # grad[j, i] = d_i omega_j
    return (grad.transpose(1, 0) - grad) * 0.5


def d_two_form(omega: Jet) -> Jet:
    """Component exterior derivative of a 2-form jet, (1/3) of the cyclic sum of partials."""
    grad = omega.grad()  # grad[i, j, k] = d_k omega_ij
    return (grad.transpose(2, 0, 1) + grad.transpose(1, 2, 0) + grad) * (1.0 / 3)


def exterior_derivative(omega: TensorField) -> TensorField:
    """d(omega) for a 1-form, using d w(X,Y) = 1/2 (X w(Y) - Y w(X) - w([X,Y]))."""
    _require(omega, 0, 1, "exterior_derivative")
    return TensorField(
        omega.chart, 0, 2, lambda x: d_one_form(raised(omega, x)), f"d({omega.name})"
    )


def bracket_jets(X: Jet, Y: Jet) -> Jet:
    dX, dY = X.grad(), Y.grad()  # dY[k, j] = d_j Y^k
    return jets.jeinsum("j,kj->k", X, dY) - jets.jeinsum("j,kj->k", Y, dX)


def lie_bracket(X: TensorField, Y: TensorField) -> TensorField:
    """[X, Y]^k = X^j d_j Y^k - Y^j d_j X^k."""
    _require(X, 1, 0, "lie_bracket")
    _require(Y, 1, 0, "lie_bracket")
    if X.chart != Y.chart:
        raise InvalidArgument("lie_bracket needs both fields on the same chart")
    return TensorField(
        X.chart,
        1,
        0,
        lambda x: bracket_jets(raised(X, x), raised(Y, x)),
        f"[{X.name},{Y.name}]",
    )


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of an antisymmetric matrix by expansion along the first row."""
    m = a.shape[0]
    if m == 0:
        return 1.0
    if m % 2:
        return 0.0
    total = 0.0
    rest = list(range(1, m))
    for pos, j in enumerate(rest):
        if a[0, j] == 0.0:
            continue
        keep = [k for k in rest if k != j]
        total += (-1) ** pos * a[0, j] * pfaffian(a[np.ix_(keep, keep)])
    return total


def contact_volume_coefficient(eta: np.ndarray, deta: np.ndarray) -> float:
    """Coefficient of eta ^ (d eta)^n on the coordinate top form.

    Normalised as ``(1/2^n) sum_sigma sgn(sigma) eta_s0 prod deta_{s(2i-1) s(2i)}``,
    which expands to ``n! sum_k (-1)^k eta_k Pf(deta without row/col k)``.
    """
    dim = eta.shape[0]
    n = (dim - 1) // 2
    total = 0.0
    for k in range(dim):
        keep = [i for i in range(dim) if i != k]
        total += (-1) ** k * eta[k] * pfaffian(deta[np.ix_(keep, keep)])
    return math.factorial(n) * total


def volume_form_check(
    eta: TensorField, n: int, points: Sequence, tol: float = 1e-9
) -> VerificationReport:
    """Check that eta ^ (d eta)^n is non-vanishing at every sample point."""
    _require(eta, 0, 1, "volume_form_check")
    if eta.chart.dim != 2 * n + 1:
        raise InvalidArgument(f"chart dimension {eta.chart.dim} is not 2n+1 for n={n}")
    coeffs = []
    for p in points:
        e = evaluate(eta, p, 1)
        coeffs.append(contact_volume_coefficient(e.value, d_one_form(e).value))
    rep = VerificationReport(suite="volume-form", model=eta.name or "eta")
    rep.checks.append(
        Check.from_values(
            "contact volume form nonvanishing",
            "contact-condition",
            np.abs(coeffs),
            tol,
            comparison="above",
        )
    )
    rep.notes.append(f"coefficient range [{min(coeffs):.6g}, {max(coeffs):.6g}]")
    return rep
