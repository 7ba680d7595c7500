import numpy as np
import pytest

from bargmann_lab import quadrature
from bargmann_lab.errors import InvalidArgument, NumericalFailure, ResourceLimitError


def test_order_one_is_single_node_at_origin():
    r = quadrature.build_hermite_rule(1)
    assert r.nodes.tolist() == [0.0]
    assert r.weights.tolist() == pytest.approx([1.0], abs=1e-15)


def test_low_order_moments():
    r2 = quadrature.build_hermite_rule(2)
    assert r2.weights @ r2.nodes**2 == pytest.approx(0.5, abs=1e-14)
    r8 = quadrature.build_hermite_rule(8)
    assert r8.weights @ r8.nodes**6 == pytest.approx(15 / 8, abs=1e-13)


@pytest.mark.parametrize("order", [1, 2, 5, 16, 33, 64])
def test_rule_invariants(order):
    r = quadrature.build_hermite_rule(order)
    assert abs(r.weights.sum() - 1.0) <= 1e-14
    assert np.all(r.weights > 0)
    assert np.max(np.abs(r.nodes + r.nodes[::-1])) <= 1e-14
    for m in range(2 * order):
        exact = 0.0 if m % 2 else np.prod(np.arange(m - 1, 0, -2, dtype=float)) / 2 ** (m // 2)
        # high moments can only be resolved to the rounding scale sum w |x|^m
        scale = max(1.0, r.weights @ np.abs(r.nodes) ** m)
        assert abs(r.weights @ r.nodes**m - exact) <= 1e-13 * scale


def test_invalid_order():
    with pytest.raises(InvalidArgument):
        quadrature.build_hermite_rule(0)
    with pytest.raises(InvalidArgument):
        quadrature.build_product_rule(1, 0)


def test_product_rule_shape_and_mass():
    r = quadrature.build_product_rule(2, 3)
    assert r.points.shape == (3**4, 2)
    assert abs(r.weights.sum() - 1.0) <= 1e-12
    assert quadrature.integrate(r, lambda z: np.ones(z.shape[0])) == pytest.approx(1.0, abs=1e-14)


def test_second_and_fourth_moments():
    r1 = quadrature.build_product_rule(1, 2)
    assert quadrature.integrate(r1, lambda z: np.abs(z[:, 0]) ** 2).real == pytest.approx(1.0, abs=1e-14)
    r2 = quadrature.build_product_rule(2, 3)
    val = quadrature.integrate(r2, lambda z: np.sum(np.abs(z) ** 2, axis=1) ** 2)
    # E|z|^4 per coordinate is 2, cross term 2 * 1 * 1
    assert val.real == pytest.approx(2 + 2 + 2, abs=1e-12)


def test_integrate_examples(rule16):
    assert quadrature.integrate(rule16, lambda z: np.exp(z[:, 0] * 0)) == pytest.approx(1.0)
    sq = quadrature.integrate(rule16, lambda z: np.abs(np.exp(z[:, 0])) ** 2)
    assert sq.real == pytest.approx(np.e, rel=1e-13)
    odd = quadrature.integrate(rule16, lambda z: np.conj(z[:, 0]) * z[:, 0] ** 2)
    assert abs(odd) <= 1e-14


def test_integrate_matrix(rule16):
    A = np.array([[1, 2j], [3, -1]])
    const = quadrature.integrate_matrix(rule16, lambda z: np.broadcast_to(A, (z.shape[0], 2, 2)))
    assert np.allclose(const, A, atol=1e-14)
    second = quadrature.integrate_matrix(rule16, lambda z: np.abs(z[:, 0])[:, None, None] ** 2 * A)
    assert np.allclose(second, A, atol=1e-13)
    first = quadrature.integrate_matrix(rule16, lambda z: z[:, 0][:, None, None] * A)
    assert np.allclose(first, 0, atol=1e-14)


def test_nonfinite_integrand_reports_node(rule16):
    def f(z):
        out = np.ones(z.shape[0])
        out[7] = np.nan
        return out

    with pytest.raises(NumericalFailure) as err:
        quadrature.integrate(rule16, f)
    assert np.allclose(err.value.where, rule16.points[7])


def test_point_budget(monkeypatch):
    with pytest.raises(ResourceLimitError) as err:
        quadrature.build_product_rule(2, 20, budget=1000)
    assert err.value.budget == 1000
    monkeypatch.setenv("BARGMANN_POINT_BUDGET", "100")
    with pytest.raises(ResourceLimitError):
        quadrature.build_product_rule(1, 11)
    monkeypatch.setenv("BARGMANN_POINT_BUDGET", "lots")
    with pytest.raises(InvalidArgument):
        quadrature.point_budget()


def test_disk_rule_area_and_mass():
    r = quadrature.disk_rule(0.0, 1.0, 24)
    assert quadrature.integrate(r, lambda z: np.ones(z.shape[0])).real == pytest.approx(1 - np.exp(-1), rel=1e-14)
    # e^{|z|^2} cancels the Gaussian: plain area over pi
    area = quadrature.integrate(r, lambda z: np.exp(np.abs(z[:, 0]) ** 2)).real
    assert area == pytest.approx(1.0, rel=1e-14)


def test_exterior_rule_complements_disk():
    inner = quadrature.disk_rule(0.0, 1.3, 24).weights.sum()
    outer = quadrature.exterior_rule(1.3, 24).weights.sum()
    assert inner + outer == pytest.approx(1.0, abs=1e-14)


def test_gaussian_rule_reproduces_shifted_moment():
    r = quadrature.gaussian_rule(16, 0.7 - 0.2j, 0.5)
    # f = exp(-|z - c|^2 / s^2 + |z|^2) makes the integrand a pure dilated Gaussian
    c, s = 0.7 - 0.2j, 0.5
    val = quadrature.integrate(r, lambda z: np.exp(-np.abs(z[:, 0] - c) ** 2 / s**2 + np.abs(z[:, 0]) ** 2))
    assert val.real == pytest.approx(s**2, rel=1e-13)


def test_linearity(rule16):
    f = lambda z: np.cos(z[:, 0].real) + 1j * z[:, 0].imag ** 2
    g = lambda z: np.abs(z[:, 0]) ** 3
    a, b = 0.3 - 2j, 1.7
    lhs = quadrature.integrate(rule16, lambda z: a * f(z) + b * g(z))
    rhs = a * quadrature.integrate(rule16, f) + b * quadrature.integrate(rule16, g)
    assert abs(lhs - rhs) <= 1e-13 * (abs(a) + abs(b))


@pytest.mark.parametrize("family", ["gaussian", "ball"])
def test_order_doubling_self_consistency(family):
    from bargmann_lab import fock, symbols, toeplitz

    params = {"family": "gaussian_radial", "t": 0.5} if family == "gaussian" else {"family": "ball_indicator", "R": 1.2}
    phi = symbols.make_symbol(params, 1, 1)
    spec = fock.TruncationSpec(1, 6)
    a = toeplitz.assemble_toeplitz(phi, spec, quadrature.build_product_rule(1, 12)).matrix
    b = toeplitz.assemble_toeplitz(phi, spec, quadrature.build_product_rule(1, 24)).matrix
    assert np.max(np.abs(a - b)) <= 1e-12
