import json

import numpy as np
import pytest

from bargmann_lab import fock, functionals, quadrature, symbols, toeplitz
from bargmann_lab.errors import InvalidArgument

from oracle_values import SCALAR_BALL_N


def sym(params, d=1):
    return symbols.make_symbol(params, 1, d)


def zero_symbol(d=2):
    return sym({"family": "constant", "A": np.zeros((d, d))}, d)


def test_stroethoff_constant(rule24):
    A = np.array([[1, 2j], [0, 1]])
    phi = sym({"family": "constant", "A": A}, 2)
    for z in (0.0, 1.5 - 2j, 4.0):
        assert functionals.stroethoff_N(phi, z, rule24) == pytest.approx(symbols.hs_norm(A) ** 2, rel=1e-13)
    assert functionals.stroethoff_N(sym({"family": "constant"}, 5), 3.0, rule24) == pytest.approx(5.0)


def test_stroethoff_zero_and_linear(rule24):
    assert functionals.stroethoff_N(zero_symbol(), 1.0, rule24) == 0
    lin = sym({"family": "monomial", "q": 1, "A": [[1]]})
    for z in (0.0, 0.8 - 0.3j, -2.0):
        assert functionals.stroethoff_N(lin, z, rule24) == pytest.approx(abs(z) ** 2 + 1, rel=1e-12)


@pytest.mark.parametrize("z", sorted(SCALAR_BALL_N))
def test_stroethoff_ball_against_oracle(z, rule32):
    phi = sym({"family": "ball_indicator", "R": 1.0})
    assert functionals.stroethoff_N(phi, z, rule32) == pytest.approx(SCALAR_BALL_N[z], rel=1e-9)


def test_necessary_constant(rule24):
    A = np.array([[1, 2j], [0, 1]])
    phi = sym({"family": "constant", "A": A}, 2)
    g = np.array([0.6, 0.8j])
    for z in (0.0, 3.0j):
        assert functionals.necessary_M(phi, z, g, rule24) == pytest.approx(np.linalg.norm(A @ g) ** 2, rel=1e-13)


def test_necessary_requires_unit_vector(rule24):
    with pytest.raises(InvalidArgument):
        functionals.necessary_M(sym({"family": "constant"}, 2), 0.0, [1.0, 1.0], rule24)


def test_ball_gap_between_functionals(rule32):
    d = 4
    phi = sym({"family": "ball_indicator", "R": 1.0}, d)
    e1 = np.eye(d)[0]
    for r in (0.0, 1.0, 2.5, 4.0):
        M = functionals.necessary_M(phi, r, e1, rule32)
        N = functionals.stroethoff_N(phi, r, rule32)
        assert N == pytest.approx(d * M, rel=1e-12)
        mass = quadrature.integrate(quadrature.disk_rule(-r, 1.0, 32), lambda w: np.ones(w.shape[0])).real
        assert M <= mass * (1 + 1e-12)


def test_necessary_below_stroethoff(rule24):
    rng = np.random.default_rng(9)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    for params in ({"family": "ball_indicator", "R": 1.2}, {"family": "gaussian_radial", "t": 0.5}):
        phi = sym({**params, "A": A}, 3)
        for _ in range(4):
            z = complex(*rng.uniform(-2, 2, 2))
            g = rng.normal(size=3) + 1j * rng.normal(size=3)
            g /= np.linalg.norm(g)
            assert functionals.necessary_M(phi, z, g, rule24) <= functionals.stroethoff_N(phi, z, rule24) + 1e-10


def test_xi_hs_bound_constant(rule24):
    A = np.array([[1, 1], [0, 2j]])
    phi = sym({"family": "constant", "A": A}, 2)
    for w in (0.0, 0.5 + 0.5j, -1.5):
        expected = symbols.hs_norm(A) ** 2 * (np.exp(abs(w) ** 2) - 1)
        assert functionals.xi_hs_bound_residual(phi, 0.3, w, rule24) == pytest.approx(expected, abs=1e-12)


def test_xi_hs_bound_gaussian_grid(rule24):
    phi = sym({"family": "gaussian_radial", "t": 1.0})
    xs = np.linspace(-2, 2, 5)
    for zr in xs:
        for wr in xs:
            for wi in xs:
                w = complex(wr, wi)
                res = functionals.xi_hs_bound_residual(phi, zr, w, rule24)
                assert res >= -1e-9


def test_analytic_identity(rule24):
    assert functionals.analytic_identity_residual(sym({"family": "constant"}, 2), 1.0, 2j, rule24) <= 1e-13
    phi = sym({"family": "monomial", "q": 2, "A": [[1, 0], [0, 2]]}, 2)
    assert functionals.analytic_identity_residual(phi, 1.0, 1j, rule24) <= 1e-9
    with pytest.raises(InvalidArgument):
        functionals.analytic_identity_residual(sym({"family": "ball_indicator"}), 0.0, 0.0, rule24)


def test_growth_margin(rule24):
    const = sym({"family": "constant", "A": [[1, 2], [0, 1]]}, 2)
    assert functionals.xi_growth_margin(const, 0.7, 0.0, rule24) == pytest.approx(0.0, abs=1e-12)
    assert functionals.xi_growth_margin(zero_symbol(), 1.0, 0.5, rule24) == 0
    ball = sym({"family": "ball_indicator", "R": 1.0}, 2)
    xs = np.linspace(-2, 2, 5)
    for z in xs:
        for w in xs:
            assert functionals.xi_growth_margin(ball, z, complex(w, -w / 2), rule24) >= 0
    with pytest.raises(InvalidArgument):
        functionals.xi_growth_margin(sym({"family": "monomial", "q": 1}), 0.0, 0.0, rule24)


def test_weighted_identity_trivial_weight(rule16):
    phi = sym({"family": "gaussian_radial", "t": 1.0})
    nothing = lambda z, w: np.zeros(np.broadcast_shapes(z.shape[:-1], w.shape[:-1]))
    assert functionals.weighted_kernel_identity(nothing, phi, rule16,
                                                z_rule=quadrature.disk_rule(0.0, 1.0, 6)) == (0.0, 0.0)


def test_weighted_identity_constant_symbol(rule24):
    A = np.array([[1, 1j], [0, 1]])
    phi = sym({"family": "constant", "A": A}, 2)
    lhs, rhs = functionals.weighted_kernel_identity(functionals.RadialCutoff(1.0), phi, rule24)
    # int_{|z|<1} e^{|z|^2} dmu = area / pi = 1
    assert rhs == pytest.approx(symbols.hs_norm(A) ** 2, rel=1e-12)
    assert abs(lhs - rhs) <= 1e-5


def test_radial_cutoff():
    inside, outside = functionals.RadialCutoff(1.0), functionals.RadialCutoff(1.0, inside=False)
    z = np.array([[0.5], [1.0], [2.0]])
    w = np.zeros((3, 1))
    assert inside(z, w).tolist() == [1.0, 0.0, 0.0]
    assert outside(z, w).tolist() == [0.0, 1.0, 1.0]


def test_tail_decomposition_adds_up(rule16):
    phi = sym({"family": "ball_indicator", "R": 1.0, "A": [[1, 0.5], [0, 1]]}, 2)
    spec = fock.TruncationSpec(1, 4, 2)
    parts = [toeplitz.assemble_integral_operator(
        toeplitz.weighted_theta_kernel(functionals.RadialCutoff(1.5, inside=flag), phi, rule16), spec, rule16).matrix
        for flag in (True, False)]
    whole = toeplitz.assemble_integral_operator(toeplitz.theta_kernel(phi, rule16), spec, rule16).matrix
    assert np.max(np.abs(parts[0] + parts[1] - whole)) <= 1e-8


def test_ball_stroethoff_tail_envelope(rule32):
    d, R = 2, 1.0
    phi = sym({"family": "ball_indicator", "R": R}, d)
    radii = np.arange(2.0, 5.01, 0.5)
    for direction in functionals.default_directions(1, seed=4):
        vals = [functionals.stroethoff_N(phi, r * direction[0], rule32) for r in radii]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert all(v <= d * np.exp(-(r - R) ** 2) for r, v in zip(radii, vals))


def test_schur_alpha_ratio_constant(rule24):
    A = np.array([[1, 0], [1j, 1]])
    phi = sym({"family": "constant", "A": A}, 2)
    C = symbols.hs_norm(A)
    for r in (0.0, 1.0, 2.0):
        assert functionals.schur_alpha_ratio(phi, r, 0.0, rule24) == pytest.approx(2 * C * np.exp(-r**2 / 2), rel=1e-10)
    assert functionals.schur_alpha_ratio(phi, 0.0, 1.5 - 1j, rule24) == pytest.approx(2 * C, rel=1e-10)
    for z in (0.0, 3.0j):
        assert functionals.schur_beta_ratio(phi, z, rule24) == pytest.approx(2 * C, rel=1e-9)


def test_schur_empty_tail(rule16):
    phi = sym({"family": "ball_indicator", "R": 1.0}, 2)
    rep = functionals.schur_tail_report(phi, 8.0, fock.TruncationSpec(1, 3, 2), rule16)
    assert rep.tail_norm <= 1e-10 and rep.beta_hat <= 1e-10 and rep.passes


def test_schur_report_errors(rule16):
    spec = fock.TruncationSpec(1, 2, 1)
    with pytest.raises(InvalidArgument):
        functionals.schur_tail_report(sym({"family": "monomial", "q": 1}), 1.0, spec, rule16)
    with pytest.raises(InvalidArgument):
        functionals.schur_tail_report(sym({"family": "constant"}), 1.0, spec, rule16, grid=np.zeros((0, 1)))
    with pytest.raises(InvalidArgument):
        functionals.schur_tail_report(sym({"family": "constant"}), -1.0, spec, rule16)


def test_tail_exponent_fit():
    radii = np.linspace(0, 5, 11)
    values = np.exp(-0.8 * radii[:, None] ** 2) * np.ones((1, 4))
    assert functionals.fit_tail_exponent(radii, values) == pytest.approx(0.8, rel=1e-12)
    assert np.isnan(functionals.fit_tail_exponent(radii[:2], values[:2] * 0))


def test_profile_and_serialisation(tmp_path, rule16):
    phi = sym({"family": "ball_indicator", "R": 1.0}, 2)
    prof = functionals.functional_profile(phi, "necessary", rule16, radii=[0.0, 1.0, 2.0], g=[1, 1j], threads=2)
    assert prof.values.shape == (3, 4) and np.all(prof.values >= 0)
    assert np.allclose(np.linalg.norm(prof.g), 1.0)
    functionals.write_profile(prof, tmp_path / "p")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "radius,direction_index,value" and len(lines) == 13
    meta = json.loads((tmp_path / "p.json").read_text())
    assert meta["functional"] == "necessary" and meta["quadrature_order"] == 16
    assert meta["symbol"]["family"] == "ball_indicator"
    with pytest.raises(InvalidArgument):
        functionals.functional_profile(phi, "other", rule16)
    with pytest.raises(InvalidArgument):
        functionals.functional_profile(phi, "stroethoff", rule16, radii=[1.0, 0.5])


def test_profile_threads_do_not_change_values(rule16):
    phi = sym({"family": "gaussian_radial", "t": 0.5}, 2)
    a = functionals.functional_profile(phi, "stroethoff", rule16, radii=[0.0, 1.0, 2.0], threads=1)
    b = functionals.functional_profile(phi, "stroethoff", rule16, radii=[0.0, 1.0, 2.0], threads=3)
    assert np.array_equal(a.values, b.values)


def test_schur_report_serialisation(tmp_path, rule16):
    phi = sym({"family": "constant"}, 2)
    grid = functionals.default_grid(1, radii=[0.0, 1.0, 2.0])
    rep = functionals.schur_tail_report(phi, 1.0, fock.TruncationSpec(1, 3, 2), rule16, grid=grid)
    functionals.write_schur_report(rep, tmp_path / "s", phi.description, 16)
    meta = json.loads((tmp_path / "s.json").read_text())
    assert meta["passes"] is True and meta["tolerance"] == 0.01
    assert len(meta["alpha_ratios"]) == 12
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "radius,direction_index,value" and rows[1].endswith(",")
