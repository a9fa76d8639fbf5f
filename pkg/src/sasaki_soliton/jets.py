"""Truncated multivariate Taylor arithmetic ("jets").

A :class:`Jet` holds the Taylor coefficients of an array-valued function of
``dim`` variables around a point, up to total degree ``order``.  Coefficients
are stored densely in graded-lexicographic multi-index order along axis 0, so
``coeffs[0]`` is the value and truncating to a lower order is a prefix slice.
The remaining axes carry the component shape (scalar, vector, matrix, ...), so
one jet object represents a whole tensor at a point and products of tensors
are single vectorised calls through :func:`jeinsum`.

Coefficients are derivatives divided by multi-index factorials; use
:meth:`Jet.derivative` to recover true partial derivatives.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence, Union

import numpy as np

from .errors import CapabilityError, InvalidArgument, SingularValueError

#: Highest order any jet may carry.  Order 4 is only used internally for the
#: Laplacian of the scalar curvature; user-facing configuration stops at 3.
MAX_ORDER = 4
DEFAULT_ORDER = 3

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class JetSpec:
    """Number of variables and truncation order of a jet.

    Order 0 jets (value only) arise from differentiating order-1 jets.
    """

    dim: int
    order: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidArgument(f"jet dim must be a positive integer, got {self.dim!r}")
        if not isinstance(self.order, (int, np.integer)) or self.order < 0:
            raise InvalidArgument(f"jet order must be a non-negative integer, got {self.order!r}")
        if self.order > MAX_ORDER:
            raise CapabilityError(
                f"jet order {self.order} exceeds the supported maximum {MAX_ORDER}"
            )

    @property
    def size(self) -> int:
        return math.comb(self.dim + self.order, self.order)

    @property
    def multi_indices(self) -> tuple[tuple[int, ...], ...]:
        return _tables(self.dim, self.order).multis

    def index(self, multi: Sequence[int]) -> int:
        multi = tuple(int(m) for m in multi)
        if len(multi) != self.dim:
            raise InvalidArgument(f"multi-index {multi} has wrong length for dim {self.dim}")
        if any(m < 0 for m in multi):
            raise InvalidArgument(f"negative entry in multi-index {multi}")
        if sum(multi) > self.order:
            raise InvalidArgument(
                f"multi-index {multi} has degree {sum(multi)} > order {self.order}"
            )
        return _tables(self.dim, self.order).position[multi]

    def with_order(self, order: int) -> "JetSpec":
        return JetSpec(self.dim, order)


class _Tables:
    """Index bookkeeping for one (dim, order) pair; built once and cached."""

    def __init__(self, dim: int, order: int):
        multis = []
        for deg in range(order + 1):
            # graded-lex: degree first, then lexicographic descending exponents
            block = []
            for combo in combinations_with_replacement(range(dim), deg):
                m = [0] * dim
                for v in combo:
                    m[v] += 1
                block.append(tuple(m))
            block.sort(reverse=True)
            multis.extend(block)
        self.multis = tuple(multis)
        self.position = {m: k for k, m in enumerate(multis)}
        self.degree = np.array([sum(m) for m in multis])
        self.factorial = np.array(
            [math.prod(math.factorial(e) for e in m) for m in multis], dtype=float
        )

        # product table: pairs (i, j) with deg(i) + deg(j) <= order, sorted by target
        triples = []
        for i, mi in enumerate(multis):
            for j, mj in enumerate(multis):
                if self.degree[i] + self.degree[j] <= order:
                    k = self.position[tuple(a + b for a, b in zip(mi, mj))]
                    triples.append((k, i, j))
        triples.sort()
        tri = np.array(triples, dtype=np.intp)
        self.mul_k = tri[:, 0]
        self.mul_i = tri[:, 1]
        self.mul_j = tri[:, 2]
        self.mul_starts = np.flatnonzero(np.r_[True, np.diff(self.mul_k) != 0])

        # differentiation: coefficient beta of d/dx_v comes from beta + e_v
        if order >= 1:
            n_low = math.comb(dim + order - 1, order - 1)
            src = np.empty((dim, n_low), dtype=np.intp)
            fac = np.empty((dim, n_low))
            for b, mb in enumerate(multis[:n_low]):
                for v in range(dim):
                    up = list(mb)
                    up[v] += 1
                    src[v, b] = self.position[tuple(up)]
                    fac[v, b] = up[v]
            self.diff_src = src
            self.diff_fac = fac


@lru_cache(maxsize=None)
def _tables(dim: int, order: int) -> _Tables:
    return _Tables(dim, order)


def _expand(arr: np.ndarray, ndim: int) -> np.ndarray:
    """Insert unit axes after axis 0 so that ``arr`` has ``ndim`` dimensions."""
    missing = ndim - arr.ndim
    if missing <= 0:
        return arr
    return arr.reshape(arr.shape[:1] + (1,) * missing + arr.shape[1:])


class Jet:
    """Array-valued truncated Taylor expansion.

    Parameters
    ----------
    spec : JetSpec
        Number of variables and truncation order.
    coeffs : array_like
        Array of shape ``(spec.size, *shape)``.
    """

    __slots__ = ("spec", "coeffs")
    __array_priority__ = 1000

    def __init__(self, spec: JetSpec, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 0 or coeffs.shape[0] != spec.size:
            raise InvalidArgument(
                f"coefficient array of shape {coeffs.shape} does not match spec size {spec.size}"
            )
        self.spec = spec
        self.coeffs = coeffs

    # construction -----------------------------------------------------

    @classmethod
    def constant(cls, spec: JetSpec, value: ArrayLike) -> "Jet":
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros((spec.size,) + value.shape)
        coeffs[0] = value
        return cls(spec, coeffs)

    # basic accessors ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def order(self) -> int:
        return self.spec.order

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    def __repr__(self):
        return f"Jet(dim={self.spec.dim}, order={self.spec.order}, shape={self.shape})"

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.spec, self.coeffs[(slice(None),) + key])

    def __len__(self):
        return self.shape[0]

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.spec, self.coeffs.transpose((0,) + tuple(a + 1 for a in axes)))

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(self.spec, self.coeffs.reshape((self.spec.size,) + tuple(shape)))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % self.ndim + 1 for a in axis)
        return Jet(self.spec, self.coeffs.sum(axis=axis))

    def trace(self, axis1: int = 0, axis2: int = 1) -> "Jet":
        return Jet(
            self.spec,
            np.trace(self.coeffs, axis1=axis1 % self.ndim + 1, axis2=axis2 % self.ndim + 1),
        )

    # truncation and differentiation --------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order > self.spec.order:
            raise CapabilityError(
                f"cannot raise jet order from {self.spec.order} to {order}"
            )
        if order == self.spec.order:
            return self
        low = self.spec.with_order(order)
        return Jet(low, self.coeffs[: low.size])

    def diff(self, var: int) -> "Jet":
        """Partial derivative along one variable; the order drops by one."""
        if not 0 <= var < self.spec.dim:
            raise InvalidArgument(f"variable index {var} out of range for dim {self.spec.dim}")
        if self.spec.order < 1:
            raise CapabilityError("cannot differentiate an order-0 jet")
        t = _tables(self.spec.dim, self.spec.order)
        fac = _expand(t.diff_fac[var], self.coeffs.ndim)
        return Jet(self.spec.with_order(self.spec.order - 1), self.coeffs[t.diff_src[var]] * fac)

    def grad(self) -> "Jet":
        """All first partials, stacked along a new trailing axis."""
        if self.spec.order < 1:
            raise CapabilityError("cannot differentiate an order-0 jet")
        t = _tables(self.spec.dim, self.spec.order)
        parts = [
            self.coeffs[t.diff_src[v]] * _expand(t.diff_fac[v], self.coeffs.ndim)
            for v in range(self.spec.dim)
        ]
        return Jet(self.spec.with_order(self.spec.order - 1), np.stack(parts, axis=-1))

    def derivative(self, multi: Sequence[int]) -> np.ndarray:
        """True partial derivative for the given multi-index (componentwise)."""
        k = self.spec.index(multi)
        return self.coeffs[k] * _tables(self.spec.dim, self.spec.order).factorial[k]

    # arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.spec != self.spec:
                raise InvalidArgument(f"jet spec mismatch: {self.spec} vs {other.spec}")
            return other
        return Jet.constant(self.spec, other)

    def __add__(self, other):
        o = self._coerce(other)
        nd = max(self.coeffs.ndim, o.coeffs.ndim)
        return Jet(self.spec, _expand(self.coeffs, nd) + _expand(o.coeffs, nd))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        nd = max(self.coeffs.ndim, o.coeffs.ndim)
        return Jet(self.spec, _expand(self.coeffs, nd) - _expand(o.coeffs, nd))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(self.spec, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            nd = max(self.coeffs.ndim, other.ndim + 1)
            return Jet(self.spec, _expand(self.coeffs, nd) * _expand(other[None], nd))
        o = self._coerce(other)
        t = _tables(self.spec.dim, self.spec.order)
        nd = max(self.coeffs.ndim, o.coeffs.ndim)
        prod = _expand(self.coeffs, nd)[t.mul_i] * _expand(o.coeffs, nd)[t.mul_j]
        return Jet(self.spec, np.add.reduceat(prod, t.mul_starts, axis=0))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * self._coerce(other).reciprocal()
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise SingularValueError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise InvalidArgument("jets support only non-negative integer powers")
        out = Jet.constant(self.spec, np.ones(self.shape))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def reciprocal(self) -> "Jet":
        return transcend(self, "recip")

    def sqrt(self) -> "Jet":
        return transcend(self, "sqrt")

    def sin(self) -> "Jet":
        return transcend(self, "sin")

    def cos(self) -> "Jet":
        return transcend(self, "cos")

    def exp(self) -> "Jet":
        return transcend(self, "exp")


# public operation surface --------------------------------------------------


def seed_variable(spec: JetSpec, index: int, value: float) -> Jet:
    """Jet of the coordinate function ``x_index`` around ``value``."""
    if not 0 <= index < spec.dim:
        raise InvalidArgument(f"variable index {index} out of range for dim {spec.dim}")
    coeffs = np.zeros(spec.size)
    coeffs[0] = value
    if spec.order >= 1:
        e = [0] * spec.dim
        e[index] = 1
        coeffs[spec.index(e)] = 1.0
    return Jet(spec, coeffs)


def seed(spec: JetSpec, point) -> Jet:
    """All coordinate functions at ``point`` as one vector-valued jet."""
    point = np.asarray(point, dtype=float)
    if point.shape != (spec.dim,):
        raise InvalidArgument(f"point of shape {point.shape} does not match dim {spec.dim}")
    coeffs = np.zeros((spec.size, spec.dim))
    coeffs[0] = point
    if spec.order >= 1:
        coeffs[1 : spec.dim + 1] = np.eye(spec.dim)
    return Jet(spec, coeffs)


def arithmetic(a: Jet, b: Jet, op: str) -> Jet:
    """Apply ``add``, ``sub``, ``mul`` or ``div`` to two jets of identical spec."""
    if not (isinstance(a, Jet) and isinstance(b, Jet)):
        raise InvalidArgument("arithmetic expects two jets")
    if a.spec != b.spec:
        raise InvalidArgument(f"jet spec mismatch: {a.spec} vs {b.spec}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a * b.reciprocal()
    raise InvalidArgument(f"unknown arithmetic op {op!r}")


def _taylor_coefficients(fn: str, x0: np.ndarray, order: int) -> list[np.ndarray]:
    """f^(k)(x0) / k! for k = 0..order, elementwise."""
    if fn == "sin":
        cycle = [np.sin(x0), np.cos(x0), -np.sin(x0), -np.cos(x0)]
        return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]
    if fn == "cos":
        cycle = [np.cos(x0), -np.sin(x0), -np.cos(x0), np.sin(x0)]
        return [cycle[k % 4] / math.factorial(k) for k in range(order + 1)]
    if fn == "exp":
        e = np.exp(x0)
        return [e / math.factorial(k) for k in range(order + 1)]
    if fn == "sqrt":
        if np.any(x0 <= 0):
            raise SingularValueError("sqrt of a jet with non-positive constant term")
        return [_binom_half(k) * x0 ** (0.5 - k) for k in range(order + 1)]
    if fn == "recip":
        if np.any(x0 == 0):
            raise SingularValueError("reciprocal of a jet with zero constant term")
        return [(-1.0) ** k * x0 ** (-1.0 - k) for k in range(order + 1)]
    raise InvalidArgument(f"unknown function {fn!r}")


def _binom_half(k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= (0.5 - i) / (i + 1)
    return out


def transcend(a: Jet, fn: str) -> Jet:
    """Compose ``sin``, ``cos``, ``exp``, ``sqrt`` or ``recip`` with a jet."""
    x0 = a.value
    coefs = _taylor_coefficients(fn, x0, a.spec.order)
    shift = Jet(a.spec, a.coeffs.copy())
    shift.coeffs[0] = 0.0
    out = Jet.constant(a.spec, coefs[0])
    power = None
    for k in range(1, a.spec.order + 1):
        power = shift if power is None else power * shift
        out = out + power * coefs[k]
    return out


def extract_derivative(a: Jet, multi: Sequence[int]) -> np.ndarray | float:
    """Partial derivative of ``a`` for a multi-index (coefficient times factorial)."""
    d = a.derivative(multi)
    return float(d) if np.ndim(d) == 0 else d


# contractions --------------------------------------------------------------


def _parse(subscripts: str, n_ops: int):
    subscripts = subscripts.replace(" ", "")
    if "->" not in subscripts:
        raise InvalidArgument("jeinsum requires an explicit output ('->')")
    ins, out = subscripts.split("->")
    ins = ins.split(",")
    if len(ins) != n_ops:
        raise InvalidArgument(f"{len(ins)} operand subscripts for {n_ops} operands")
    return ins, out


def _pair(a, sa: str, b, sb: str, so: str):
    a_jet, b_jet = isinstance(a, Jet), isinstance(b, Jet)
    free = next(c for c in string.ascii_letters if c not in sa + sb + so)
    if not a_jet and not b_jet:
        return np.einsum(f"{sa},{sb}->{so}", a, b)
    if a_jet and not b_jet:
        return Jet(a.spec, np.einsum(f"{free}{sa},{sb}->{free}{so}", a.coeffs, b))
    if b_jet and not a_jet:
        return Jet(b.spec, np.einsum(f"{sa},{free}{sb}->{free}{so}", a, b.coeffs))
    if a.spec.dim != b.spec.dim:
        raise InvalidArgument(f"jet dim mismatch: {a.spec.dim} vs {b.spec.dim}")
    order = min(a.spec.order, b.spec.order)
    a, b = a.truncate(order), b.truncate(order)
    t = _tables(a.spec.dim, order)
    prod = np.einsum(
        f"{free}{sa},{free}{sb}->{free}{so}", a.coeffs[t.mul_i], b.coeffs[t.mul_j]
    )
    return Jet(a.spec, np.add.reduceat(prod, t.mul_starts, axis=0))


def jeinsum(subscripts: str, *operands):
    """``numpy.einsum`` over jets and plain arrays.

    Operands may mix :class:`Jet` and ndarray.  Products of jets of different
    orders are truncated to the lowest order, which is the order to which the
    product is actually known.  Operands are contracted left to right.
    """
    ins, out = _parse(subscripts, len(operands))
    cur, cur_sub = operands[0], ins[0]
    for k in range(1, len(operands)):
        later = set("".join(ins[k + 1 :]) + out)
        nxt_sub = ins[k]
        keep = []
        for c in cur_sub + nxt_sub:
            if c in later and c not in keep:
                keep.append(c)
        res_sub = "".join(keep) if k < len(operands) - 1 else out
        cur = _pair(cur, cur_sub, operands[k], nxt_sub, res_sub)
        cur_sub = res_sub
    if len(operands) == 1:
        if isinstance(cur, Jet):
            free = next(c for c in string.ascii_letters if c not in cur_sub + out)
            return Jet(cur.spec, np.einsum(f"{free}{cur_sub}->{free}{out}", cur.coeffs))
        return np.einsum(f"{cur_sub}->{out}", cur)
    return cur


def stack(items, spec: JetSpec | None = None) -> Jet:
    """Build an array jet from a (nested) sequence of scalar jets and numbers."""
    if spec is None:
        spec = _find_spec(items)
        if spec is None:
            raise InvalidArgument("stack of plain numbers needs an explicit spec")

    def build(node):
        if isinstance(node, Jet):
            if node.spec != spec:
                raise InvalidArgument(f"jet spec mismatch: {node.spec} vs {spec}")
            return node.coeffs
        if isinstance(node, (list, tuple)):
            parts = [build(x) for x in node]
            return np.stack(parts, axis=1)
        c = np.zeros((spec.size,) + np.shape(node))
        c[0] = node
        return c

    return Jet(spec, build(items))


def _find_spec(node):
    if isinstance(node, Jet):
        return node.spec
    if isinstance(node, (list, tuple)):
        for x in node:
            s = _find_spec(x)
            if s is not None:
                return s
    return None


def as_jet(x, spec: JetSpec) -> Jet:
    """Promote an array (or accept a jet) to a jet of the given spec, truncating if needed."""
    if isinstance(x, Jet):
        if x.spec.dim != spec.dim:
            raise InvalidArgument(f"jet dim mismatch: {x.spec.dim} vs {spec.dim}")
        return x.truncate(spec.order)
    return Jet.constant(spec, x)


def outer(a: Jet, b: Jet) -> Jet:
    """Tensor product over component axes."""
    la = string.ascii_lowercase[: a.ndim]
    lb = string.ascii_lowercase[a.ndim : a.ndim + b.ndim]
    return jeinsum(f"{la},{lb}->{la}{lb}", a, b)


def inv(m: Jet) -> Jet:
    """Matrix inverse over the last two axes via the truncated Neumann series."""
    m0 = m.value
    try:
        cond = np.linalg.cond(m0)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy raises only on bad shapes
        raise SingularValueError(str(exc)) from exc
    if not np.all(np.isfinite(cond)) or np.any(cond > 1e12):
        raise SingularValueError("matrix jet is singular at its base point")
    a0 = np.linalg.inv(m0)
    nil = Jet(m.spec, m.coeffs.copy())
    nil.coeffs[0] = 0.0
    step = _matmul(-a0, nil)
    out = Jet.constant(m.spec, a0)
    term = out
    for _ in range(m.spec.order):
        term = _matmul(step, term)
        out = out + term
    return out


def _matmul(a, b):
    """Matrix product over the last two axes of jets/arrays (same leading shape)."""
    nd = (a.ndim if isinstance(a, Jet) else np.ndim(a)) - 2
    lead = string.ascii_lowercase[:nd]
    return jeinsum(f"{lead}xy,{lead}yz->{lead}xz", a, b)


def common_order(*jets: Jet) -> list[Jet]:
    """Truncate jets to the lowest order among them."""
    order = min(j.spec.order for j in jets)
    return [j.truncate(order) for j in jets]


def jsum(*terms: Jet) -> Jet:
    """Sum jets of possibly different orders, keeping the lowest order."""
    terms = common_order(*terms)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out
