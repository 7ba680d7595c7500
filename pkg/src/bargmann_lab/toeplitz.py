"""Truncated Toeplitz operators, the projected-symbol kernel and integral operators.

Conventions
-----------
* Basis layout: the vector index ``j*d + a`` pairs scalar basis function
  ``e_j`` (graded-lex position ``j``) with fiber vector ``h_a``.
* ``xi(z, w) g = int Phi(u + z) g conj(k_w(u)) dmu(u)``, the projection of the
  translated symbol evaluated at ``w``.
* Kernels store the matrix ``Theta(z, w)`` itself.  The adjoint kernel of a
  symbol is defined through its adjoint action, so
  ``Theta(z, w) = (k_z(w) xi(z, w - z))^H`` is formed explicitly.
"""

import json
from dataclasses import dataclass
from math import ceil
from pathlib import Path

import numpy as np

from . import fock, quadrature
from .errors import InvalidArgument, NumericalFailure
from .fock import TruncationSpec, enumerate_basis, monomial_matrix
from .symbols import OperatorSymbol, hs_norm, translate_symbol


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Dense matrix of an operator compressed to the truncated space."""

    spec: TruncationSpec
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.spec.dim, self.spec.dim):
            raise InvalidArgument(
                f"matrix shape {self.matrix.shape} does not match dim {self.spec.dim}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise NumericalFailure("operator matrix has non-finite entries")

    @property
    def basis(self):
        return enumerate_basis(self.spec)

    def block(self, k, j):
        """The ``d x d`` block coupling input ``e_j`` to output ``e_k``."""
        d = self.spec.d
        return self.matrix[k * d:(k + 1) * d, j * d:(j + 1) * d]

    def evaluate(self, vector, z):
        """Value at ``z`` of the function with coefficient vector ``vector``."""
        coeffs = np.asarray(vector).reshape(self.spec.N, self.spec.d)
        return fock.evaluate_expansion(coeffs, self.spec, z)[0]


# -- quadrature adapted to a symbol ---------------------------------------------

def symbol_rule(phi: OperatorSymbol, rule):
    """Rule for ``int Phi(u) F(u) dmu(u)`` placed where ``Phi`` lives.

    Ball-supported symbols (n = 1) get a disk rule on the support, Gaussian
    symbols a Hermite rule matched to ``Phi(u) exp(-|u|^2)``; anything else
    uses ``rule`` unchanged.  The order of ``rule`` sets the adapted order.
    """
    order = getattr(rule, "order", 0)
    hint = phi.concentration
    if not hint or not order:
        return rule
    kind, center, param = hint
    center = np.asarray(center, dtype=complex) - phi.shift
    if kind == "ball" and phi.n == 1:
        return quadrature.disk_rule(center[0], param, order)
    if kind == "gaussian":
        t = float(param)
        return quadrature.gaussian_rule(order, t * center / (1.0 + t), 1.0 / np.sqrt(1.0 + t))
    return rule


def _check_rule_order(phi, spec, rule):
    order = getattr(rule, "order", 0)
    if not order or phi.degree is None:
        return
    need = spec.D + 1 + ceil(phi.degree / 2)
    if order < need:
        raise InvalidArgument(
            f"rule order {order} too low for D={spec.D} and symbol degree {phi.degree}; need {need}"
        )


def _check_dims(phi, spec):
    if phi.n != spec.n or phi.d != spec.d:
        raise InvalidArgument(
            f"symbol lives on C^{phi.n} with fiber {phi.d}, truncation has n={spec.n}, d={spec.d}"
        )


def _pairwise_products(X, E):
    # S[k, j] = sum_p X[p, k] E[p, j], reduced along a contiguous axis so
    # each entry's summation order is independent of the basis size
    P, N = X.shape
    out = np.empty((N, E.shape[1]), dtype=complex)
    Xt, Et = np.ascontiguousarray(X.T), np.ascontiguousarray(E.T)
    for k in range(N):
        out[k] = np.sum(Xt[k][None, :] * Et, axis=1)
    return out


def assemble_toeplitz(phi: OperatorSymbol, spec: TruncationSpec, rule) -> TruncatedOperator:
    """Compression of ``T_Phi`` to the truncation.

    Entry ``((k, b), (j, a)) = int <Phi(w) h_a, h_b> e_j(w) conj(e_k(w)) dmu(w)``.
    For polynomial symbols the product rule must have order at least
    ``D + 1 + ceil(deg/2)``.
    """
    _check_dims(phi, spec)
    _check_rule_order(phi, spec, rule)
    srule = symbol_rule(phi, rule)
    E = monomial_matrix(enumerate_basis(spec), srule.points)
    if phi.separable:
        values = phi.scalar(srule.points)
        X = np.conj(E) * (srule.weights * values)[:, None]
        scalar = _pairwise_products(X, E)
        matrix = np.kron(scalar, phi.matrix)
    else:
        values = phi(srule.points)
        X = np.conj(E) * srule.weights[:, None]
        P, N, d = E.shape[0], spec.N, spec.d
        G = (X[:, :, None] * E[:, None, :]).reshape(P, N * N)
        blocks = (G.T @ values.reshape(P, d * d)).reshape(N, N, d, d)
        matrix = blocks.transpose(0, 2, 1, 3).reshape(N * d, N * d)
    if not np.all(np.isfinite(matrix)):
        raise NumericalFailure("non-finite Toeplitz entry")
    return TruncatedOperator(spec, matrix)


# -- the projected translated symbol ---------------------------------------------

def _xi_parts(phi, z, W, rule):
    """``xi(z, w_q)`` for all rows of ``W``.

    Returns ``(scalar, None)`` with shape ``(Q,)`` for separable symbols
    (``xi = scalar * A``) or ``(None, values)`` with shape ``(Q, d, d)``.
    The translated symbol is sampled once per ``z`` and reused for every w.
    """
    z = np.asarray(z, dtype=complex).reshape(phi.n)
    W = np.asarray(W, dtype=complex).reshape(-1, phi.n)
    shifted = translate_symbol(phi, z)
    srule = symbol_rule(shifted, rule)
    with np.errstate(over="ignore", invalid="ignore"):
        expo = np.exp(np.conj(srule.points) @ W.T)
        if phi.separable:
            coef = srule.weights * shifted.scalar(srule.points)
            out, values = coef @ expo, None
        else:
            vals = shifted(srule.points) * srule.weights[:, None, None]
            values = np.einsum("pba,pq->qba", vals, expo)
            out = None
    check = out if out is not None else values
    if not np.all(np.isfinite(check)):
        bad = ~np.isfinite(check.reshape(W.shape[0], -1)).all(axis=1)
        radius = float(np.linalg.norm(W[np.argmax(bad)]))
        raise NumericalFailure(f"kernel factor overflow at |w| = {radius:.6g}", radius)
    return out, values


def xi_grid(phi, z, W, rule):
    """``xi(z, w)`` for every row ``w`` of ``W`` as a ``(Q, d, d)`` array."""
    scalar, values = _xi_parts(phi, z, W, rule)
    if scalar is not None:
        return scalar[:, None, None] * phi.matrix
    return values


def xi_eval(phi: OperatorSymbol, z, w, rule) -> np.ndarray:
    """The matrix ``xi(z, w)`` whose action on ``g`` is ``P(Phi_z g)(w)``."""
    return xi_grid(phi, z, np.reshape(w, (1, -1)), rule)[0]


def theta_adjoint_eval(phi: OperatorSymbol, z, w, rule) -> np.ndarray:
    """``Theta(z, w) = (k_z(w) xi(z, w - z))^H``, the adjoint-kernel value."""
    z = np.asarray(z, dtype=complex).reshape(phi.n)
    w = np.asarray(w, dtype=complex).reshape(phi.n)
    inner = fock.kernel_eval(w, z) * xi_eval(phi, z, w - z, rule)
    return inner.conj().T


@dataclass(frozen=True, eq=False)
class KernelEvaluator:
    """Operator-valued kernel ``(z, w) -> d x d`` evaluated on grids.

    ``scalar`` maps ``(Z, W)`` point arrays to a ``(P, Q)`` array and the
    kernel is ``scalar * matrix``; otherwise ``full`` returns ``(P, Q, d, d)``.
    """

    n: int
    d: int
    tag: str
    scalar: object = None
    matrix: np.ndarray = None
    full: object = None

    def grid(self, Z, W):
        Z = np.asarray(Z, dtype=complex).reshape(-1, self.n)
        W = np.asarray(W, dtype=complex).reshape(-1, self.n)
        if self.scalar is not None:
            return self.scalar(Z, W)[:, :, None, None] * self.matrix
        return self.full(Z, W)

    def __call__(self, z, w):
        return self.grid(z, w)[0, 0]


def _theta_scalar_rows(phi, rule, gamma=None):
    # rows Theta(z_i, .) for one z at a time; returns the conjugated scalar
    # factor conj(gamma(z, w - z) k_z(w) xi(z, w - z))
    def scalar(Z, W):
        out = np.empty((Z.shape[0], W.shape[0]), dtype=complex)
        for i, z in enumerate(Z):
            xi, _ = _xi_parts(phi, z, W - z, rule)
            row = fock.kernel_eval(W, z) * xi
            if gamma is not None:
                row = row * gamma(z[None, :], W - z)
            out[i] = np.conj(row)
        return out

    def full(Z, W):
        out = np.empty((Z.shape[0], W.shape[0], phi.d, phi.d), dtype=complex)
        for i, z in enumerate(Z):
            _, xi = _xi_parts(phi, z, W - z, rule)
            fac = fock.kernel_eval(W, z)
            if gamma is not None:
                fac = fac * gamma(z[None, :], W - z)
            out[i] = np.conj(fac)[:, None, None] * np.conj(np.swapaxes(xi, 1, 2))
        return out

    return scalar, full


def theta_kernel(phi: OperatorSymbol, rule) -> KernelEvaluator:
    """Kernel of the integral operator representing ``T_Phi^*``."""
    scalar, full = _theta_scalar_rows(phi, rule)
    if phi.separable:
        return KernelEvaluator(phi.n, phi.d, "theta_adjoint", scalar=scalar,
                               matrix=phi.matrix.conj().T)
    return KernelEvaluator(phi.n, phi.d, "theta_adjoint", full=full)


def weighted_theta_kernel(gamma, phi: OperatorSymbol, rule) -> KernelEvaluator:
    """``Theta_gamma(x, y) = (gamma(x, y - x) k_x(y) xi(x, y - x))^H``.

    ``gamma(z, v)`` broadcasts over leading axes of its two point arrays.
    """
    scalar, full = _theta_scalar_rows(phi, rule, gamma)
    if phi.separable:
        return KernelEvaluator(phi.n, phi.d, "theta_weighted", scalar=scalar,
                               matrix=phi.matrix.conj().T)
    return KernelEvaluator(phi.n, phi.d, "theta_weighted", full=full)


def xi_kernel(phi: OperatorSymbol, rule) -> KernelEvaluator:
    """``(z, w) -> xi(z, w)`` as a kernel."""
    def scalar(Z, W):
        return np.stack([_xi_parts(phi, z, W, rule)[0] for z in Z])

    def full(Z, W):
        return np.stack([_xi_parts(phi, z, W, rule)[1] for z in Z])

    if phi.separable:
        return KernelEvaluator(phi.n, phi.d, "xi", scalar=scalar, matrix=phi.matrix)
    return KernelEvaluator(phi.n, phi.d, "xi", full=full)


def constant_kernel(matrix, n=1, fn=None, tag="custom"):
    """Kernel ``fn(z, w) * matrix`` from a broadcasting scalar function."""
    matrix = np.asarray(matrix, dtype=complex)
    if fn is None:
        def fn(Z, W):
            return np.ones((Z.shape[0], W.shape[0]), dtype=complex)

    def scalar(Z, W):
        return np.asarray(fn(Z[:, None, :], W[None, :, :]), dtype=complex) * np.ones(
            (Z.shape[0], W.shape[0]))

    return KernelEvaluator(n, matrix.shape[0], tag, scalar=scalar, matrix=matrix)


# -- integral operators ----------------------------------------------------------

def assemble_integral_operator(theta: KernelEvaluator, spec: TruncationSpec, rule) -> TruncatedOperator:
    """Compression of ``I_Theta`` by double quadrature with ``rule`` on both axes.

    Entry ``((k, b), (j, a)) = iint <Theta(z, w) h_a, h_b> e_j(w) conj(e_k(z)) dmu dmu``.
    """
    if theta.n != spec.n or theta.d != spec.d:
        raise InvalidArgument("kernel and truncation dimensions differ")
    quadrature.check_budget(rule.size**2)
    E = monomial_matrix(enumerate_basis(spec), rule.points)
    left = np.conj(E) * rule.weights[:, None]
    right = E * rule.weights[:, None]
    if theta.scalar is not None:
        S = theta.scalar(rule.points, rule.points)
        _finite(S)
        matrix = np.kron(left.T @ S @ right, theta.matrix)
    else:
        K = theta.full(rule.points, rule.points)
        _finite(K)
        blocks = np.einsum("zk,zwba,wj->kbja", left, K, right, optimize=True)
        N, d = spec.N, spec.d
        matrix = blocks.reshape(N * d, N * d)
    return TruncatedOperator(spec, matrix)


def _finite(values):
    if not np.all(np.isfinite(values)):
        raise NumericalFailure("kernel produced non-finite values on the node grid")


def kernel_hs_l2norm(theta: KernelEvaluator, rule, z_rule=None, w_rule=None) -> float:
    """``sqrt(iint ||Theta(z, w)||_HS^2 dmu(z) dmu(w))``.

    Both axes use ``rule`` unless a rule adapted to the kernel's support is
    given for either variable.
    """
    z_rule = rule if z_rule is None else z_rule
    w_rule = rule if w_rule is None else w_rule
    quadrature.check_budget(z_rule.size * w_rule.size)
    if theta.scalar is not None:
        S = theta.scalar(z_rule.points, w_rule.points)
        _finite(S)
        total = (z_rule.weights @ np.abs(S) ** 2 @ w_rule.weights) * hs_norm(theta.matrix) ** 2
    else:
        K = theta.full(z_rule.points, w_rule.points)
        _finite(K)
        total = z_rule.weights @ hs_norm(K) ** 2 @ w_rule.weights
    return float(np.sqrt(total))


def adjoint_consistency_residual(phi: OperatorSymbol, spec: TruncationSpec, rule) -> float:
    """Max-entry distance between ``T_Phi^*`` and ``I_{Theta_Phi}`` on the truncation."""
    T = assemble_toeplitz(phi, spec, rule).matrix
    I = assemble_integral_operator(theta_kernel(phi, rule), spec, rule).matrix
    return float(np.max(np.abs(T.conj().T - I)))


def translation_identity_residual(phi, lam, g, z, spec, rule) -> float:
    """``|(T_Phi k_lam (x) g)(z) - k_lam(z) xi(lam, z - lam) g|``.

    The left side applies the assembled matrix to the truncated coherent
    vector, so it carries the truncation error bounded by
    :func:`coherent_truncation_bound`.
    """
    lam = np.asarray(lam, dtype=complex).reshape(spec.n)
    z = np.asarray(z, dtype=complex).reshape(spec.n)
    g = np.asarray(g, dtype=complex).reshape(spec.d)
    T = assemble_toeplitz(phi, spec, rule)
    coh = fock.coherent_coeffs(lam, spec)
    lhs = T.evaluate(T.matrix @ np.kron(coh.coeffs, g), z)
    rhs = fock.kernel_eval(z, lam) * (xi_eval(phi, lam, z - lam, rule) @ g)
    return float(np.linalg.norm(lhs - rhs))


def coherent_truncation_bound(phi, lam, g, z, spec) -> float:
    """Cauchy-Schwarz bound on the evaluation error from truncating ``k_lam``.

    ``|(T (k - k_D))(z)| <= ||k_z|| sup||Phi|| ||g|| ||k - k_D||``.  Infinite
    for symbols without a sup bound.
    """
    if phi.sup_hs_bound is None:
        return float("inf")
    tail = np.sqrt(fock.tail_mass(lam, spec.D))
    return float(fock.kernel_norm(z) * phi.sup_hs_bound * np.linalg.norm(g) * tail)


# -- serialisation ---------------------------------------------------------------

def save_operator(op: TruncatedOperator, prefix):
    """Write ``<prefix>.top.json`` (header) and ``<prefix>.top.csv`` (entries).

    Each CSV line is one matrix row written as ``re,im`` pairs.
    """
    prefix = str(prefix)
    header = {"n": op.spec.n, "D": op.spec.D, "d": op.spec.d, "ordering": "graded-lex",
              "layout": "j*d+a", "rows": op.spec.dim, "cols": op.spec.dim}
    Path(prefix + ".top.json").write_text(json.dumps(header, sort_keys=True, indent=2) + "\n")
    lines = []
    for row in op.matrix:
        pairs = np.empty(2 * row.size)
        pairs[0::2], pairs[1::2] = row.real, row.imag
        lines.append(",".join(repr(float(x)) for x in pairs))
    Path(prefix + ".top.csv").write_text("\n".join(lines) + "\n")
    return Path(prefix + ".top.json"), Path(prefix + ".top.csv")


def load_operator(prefix) -> TruncatedOperator:
    prefix = str(prefix)
    header = json.loads(Path(prefix + ".top.json").read_text())
    if header.get("ordering") != "graded-lex" or header.get("layout") != "j*d+a":
        raise InvalidArgument(f"unsupported operator header {header}")
    raw = np.loadtxt(prefix + ".top.csv", delimiter=",", ndmin=2)
    matrix = raw[:, 0::2] + 1j * raw[:, 1::2]
    return TruncatedOperator(TruncationSpec(header["n"], header["D"], header["d"]), matrix)
