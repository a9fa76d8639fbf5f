import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sasaki_soliton import jets
from sasaki_soliton.errors import CapabilityError, InvalidArgument, SingularValueError
from sasaki_soliton.jets import Jet, JetSpec, jeinsum, seed, stack


@st.composite
def jet_triples(draw):
    dim = draw(st.integers(1, 3))
    order = draw(st.integers(0, 3))
    spec = JetSpec(dim, order)
    coeff = arrays(np.float64, (spec.size,), elements=st.floats(-2, 2, allow_nan=False))
    return spec, [Jet(spec, draw(coeff)) for _ in range(3)]


def close(a: Jet, b: Jet, tol=1e-10):
    return np.allclose(a.coeffs, b.coeffs, atol=tol, rtol=tol)


@given(jet_triples())
@settings(max_examples=60, deadline=None)
def test_ring_laws(data):
    _, (a, b, c) = data
    assert close(a + b, b + a)
    assert close(a * b, b * a)
    assert close((a * b) * c, a * (b * c))
    assert close(a * (b + c), a * b + a * c)
    assert close((a - b) + b, a)


@given(jet_triples())
@settings(max_examples=40, deadline=None)
def test_division_inverts_multiplication(data):
    spec, (a, b, _) = data
    b = b + (3.0 - b.value)  # keep the base value away from zero
    assert close((a * b) / b, a, 1e-8)
    assert close(b * b.reciprocal(), Jet.constant(spec, 1.0), 1e-9)


@given(jet_triples())
@settings(max_examples=40, deadline=None)
def test_truncation_is_a_ring_morphism(data):
    spec, (a, b, _) = data
    for k in range(spec.order + 1):
        assert close((a * b).truncate(k), a.truncate(k) * b.truncate(k))


def test_multi_index_layout():
    spec = JetSpec(2, 2)
    assert spec.size == 6
    assert spec.multi_indices == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert spec.index((1, 1)) == 4
    with pytest.raises(InvalidArgument):
        spec.index((2, 1))
    with pytest.raises(InvalidArgument):
        spec.index((1,))


def test_spec_validation():
    with pytest.raises(CapabilityError):
        JetSpec(3, 5)
    with pytest.raises(InvalidArgument):
        JetSpec(0, 2)
    with pytest.raises(InvalidArgument):
        JetSpec(2, -1)


def test_spec_mismatch_is_rejected():
    a = Jet.constant(JetSpec(2, 2), 1.0)
    b = Jet.constant(JetSpec(2, 3), 1.0)
    with pytest.raises(InvalidArgument):
        a + b
    with pytest.raises(InvalidArgument):
        jets.arithmetic(a, b, "mul")


# derivative library ---------------------------------------------------------------


def _xy(order=3, point=(0.7, -0.4)):
    x = seed(JetSpec(2, order), np.array(point))
    return x[0], x[1]


def test_polynomial_derivatives():
    x, y = _xy()
    f = x**3 * y + 2 * x * y**2
    x0, y0 = 0.7, -0.4
    assert math.isclose(f.derivative((1, 0)), 3 * x0**2 * y0 + 2 * y0**2)
    assert math.isclose(f.derivative((1, 1)), 3 * x0**2 + 4 * y0)
    assert math.isclose(f.derivative((3, 0)), 6 * y0)
    assert math.isclose(f.derivative((1, 2)), 4.0)
    assert math.isclose(jets.extract_derivative(f, (0, 0)), f.value.item())


def test_sin_of_product():
    x, y = _xy()
    f = (x * y).sin()
    x0, y0 = 0.7, -0.4
    t = x0 * y0
    assert math.isclose(f.derivative((1, 0)), y0 * math.cos(t))
    assert math.isclose(f.derivative((1, 1)), math.cos(t) - t * math.sin(t))
    assert math.isclose(f.derivative((0, 3)), -(x0**3) * math.cos(t))


@pytest.mark.parametrize(
    "fn, d3",
    [
        ("exp", lambda u: math.exp(u)),
        ("cos", lambda u: math.sin(u)),
        ("sqrt", lambda u: 3 / 8 * u ** (-2.5)),
        ("reciprocal", lambda u: -6 / u**4),
    ],
)
def test_third_derivatives_of_transcendentals(fn, d3):
    u0 = 1.3
    x = jets.seed_variable(JetSpec(1, 3), 0, u0)
    f = getattr(x, fn)()
    assert math.isclose(f.derivative((3,)), d3(u0), rel_tol=1e-12)


def test_chain_rule_through_exp():
    x, y = _xy()
    f = (x + 2 * y).exp()
    e = math.exp(0.7 - 0.8)
    assert math.isclose(f.derivative((1, 2)), 4 * e)
    assert math.isclose(f.derivative((0, 3)), 8 * e)


def test_sqrt_domain():
    x = jets.seed_variable(JetSpec(1, 2), 0, -1.0)
    with pytest.raises(SingularValueError):
        x.sqrt()


def test_grad_lowers_order_and_matches_derivatives():
    x, y = _xy()
    f = x**2 * y.sin()
    g = f.grad()
    assert g.spec.order == 2 and g.shape == (2,)
    assert math.isclose(g.value[0], f.derivative((1, 0)))
    assert math.isclose(g[1].derivative((1, 1)), f.derivative((1, 2)))


def test_order_consistency():
    point = np.array([0.3, -0.2, 0.5])

    def f(x):
        return (x[0] * x[1]).cos() + x[2] ** 3 * x[0].exp()

    hi = f(seed(JetSpec(3, 3), point))
    for k in range(3):
        lo = f(seed(JetSpec(3, k), point))
        assert np.allclose(hi.truncate(k).coeffs, lo.coeffs)


def test_jeinsum_matches_numpy_on_values(rng):
    spec = JetSpec(2, 2)
    a = Jet(spec, rng.normal(size=(spec.size, 3, 3)))
    b = Jet(spec, rng.normal(size=(spec.size, 3)))
    m = rng.normal(size=(3, 3))
    out = jeinsum("ij,j,jk->ik", a, b, m)
    assert np.allclose(out.value, np.einsum("ij,j,jk->ik", a.value, b.value, m))
    # product rule for the first derivative
    d = out.diff(0).value
    expect = np.einsum("ij,j,jk->ik", a.diff(0).value, b.value, m) + np.einsum(
        "ij,j,jk->ik", a.value, b.diff(0).value, m
    )
    assert np.allclose(d, expect)


def test_jeinsum_truncates_to_lowest_order(rng):
    a = Jet(JetSpec(2, 3), rng.normal(size=(10, 2)))
    b = Jet(JetSpec(2, 1), rng.normal(size=(3, 2)))
    assert jeinsum("i,i->", a, b).spec.order == 1


def test_matrix_inverse_jet(rng):
    spec = JetSpec(3, 3)
    x = seed(spec, np.array([0.1, 0.2, -0.3]))
    m = stack([[2 + x[0], x[1] * x[2], 0.0], [x[1] * x[2], 3 + x[1] ** 2, x[0]], [0.0, x[0], 1 + x[2].exp()]], spec)
    mi = jets.inv(m)
    ident = jeinsum("ij,jk->ik", m, mi)
    assert np.allclose(ident.coeffs[0], np.eye(3))
    assert np.allclose(ident.coeffs[1:], 0.0, atol=1e-12)


def test_inverse_of_singular_matrix():
    m = Jet.constant(JetSpec(2, 1), np.zeros((2, 2)))
    with pytest.raises(SingularValueError):
        jets.inv(m)


def test_component_operations():
    spec = JetSpec(2, 2)
    x = seed(spec, np.array([1.0, 2.0]))
    m = stack([[x[0], x[1]], [x[0] * x[1], 1.0]], spec)
    assert m.shape == (2, 2)
    assert np.allclose(m.T.value, m.value.T)
    assert math.isclose(m.trace().value.item(), 2.0)
    assert np.allclose(m.sum(axis=0).value, [3.0, 3.0])
    assert m.reshape(4).shape == (4,)
