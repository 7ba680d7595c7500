"""Finite truncation of the scalar Segal-Bargmann space.

The orthonormal basis is ``e_j(z) = z^j / sqrt(j!)`` over multi-indices
``j`` of total degree at most ``D``, in graded lexicographic order, so the
degree-D basis is a prefix of the degree-(D+1) basis.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np
from scipy.special import gammainc, gammaln

from . import quadrature
from .errors import InvalidArgument

WORKING_BOX = 3.0


@dataclass(frozen=True)
class TruncationSpec:
    """Finite model of the vector-valued space: ``n`` variables, degree ``D``,
    fiber dimension ``d``."""

    n: int
    D: int
    d: int = 1

    def __post_init__(self):
        if self.n < 1 or self.D < 0 or self.d < 1:
            raise InvalidArgument(f"invalid truncation {self}")

    @property
    def N(self):
        """Number of scalar basis functions, ``binomial(D + n, n)``."""
        return comb(self.D + self.n, self.n)

    @property
    def dim(self):
        return self.N * self.d


@lru_cache(maxsize=None)
def _basis(n, D):
    out = []
    for total in range(D + 1):
        # combinations of variable slots give every composition of `total`;
        # sorting descending puts (1,0) before (0,1)
        level = set()
        for slots in combinations_with_replacement(range(n), total):
            level.add(tuple(slots.count(i) for i in range(n)))
        out.extend(sorted(level, reverse=True))
    return tuple(out)


def enumerate_basis(spec: TruncationSpec):
    """Multi-indices of total degree <= D in graded lexicographic order."""
    return list(_basis(spec.n, spec.D))


def _as_points(z, n=None):
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if n is not None and z.shape[-1] != n:
        raise InvalidArgument(f"expected points in C^{n}, got shape {z.shape}")
    return z


def monomial_eval(j, z):
    """``z^j / sqrt(j!)`` for a multi-index ``j`` and a point (or points) ``z``."""
    j = tuple(int(v) for v in j)
    z = _as_points(z, len(j))
    log_norm = -0.5 * sum(gammaln(v + 1.0) for v in j)
    out = np.exp(log_norm) * np.prod(z ** np.array(j), axis=-1)
    return out if out.ndim else complex(out)


def monomial_matrix(basis, points):
    """Values ``e_j(z_p)`` as a ``(P, N)`` array."""
    points = _as_points(points)
    exps = np.array(basis, dtype=float)
    log_norm = -0.5 * np.sum(gammaln(exps + 1.0), axis=1)
    # powers through cumulative products keep exact integer exponents
    D = int(exps.sum(axis=1).max()) if len(basis) else 0
    out = np.ones((points.shape[0], len(basis)), dtype=complex)
    for i in range(points.shape[1]):
        pw = np.ones((points.shape[0], D + 1), dtype=complex)
        for k in range(1, D + 1):
            pw[:, k] = pw[:, k - 1] * points[:, i]
        out *= pw[:, exps[:, i].astype(int)]
    return out * np.exp(log_norm)


def kernel_eval(z, w):
    """Reproducing kernel ``exp(<z, w>)`` with ``<z, w> = sum z_i conj(w_i)``.

    Broadcasts over leading axes of ``z`` and ``w``.
    """
    z = _as_points(z)
    w = _as_points(w)
    if z.shape[-1] != w.shape[-1]:
        raise InvalidArgument(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    out = np.exp(np.sum(z * np.conj(w), axis=-1))
    return out if out.ndim else complex(out)


def kernel_norm(z):
    """``||k_z|| = exp(|z|^2 / 2)``, forced by ``||k_z||^2 = k_z(z)``."""
    z = _as_points(z)
    return float(np.exp(0.5 * np.sum(np.abs(z) ** 2)))


def ktilde_eval(lam, w):
    """``|k_lam(w)|^2 / k_lam(lam) = exp(2 Re<w, lam> - |lam|^2)``."""
    lam = _as_points(lam)
    w = _as_points(w)
    out = np.exp(2.0 * np.real(np.sum(w * np.conj(lam), axis=-1)) - np.sum(np.abs(lam) ** 2))
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class CoherentVector:
    """Truncated coefficients of ``k_lam`` in the monomial basis.

    The vector is not renormalised; ``deficit`` is the missing squared norm
    ``exp(|lam|^2) - sum |coeffs|^2`` computed directly from the tail.
    """

    lam: np.ndarray
    coeffs: np.ndarray
    deficit: float = field(default=0.0)


def tail_mass(lam, D):
    """``sum_{|j| > D} |lam^j|^2 / j!``, the squared norm lost by truncation."""
    x = float(np.sum(np.abs(_as_points(lam)) ** 2))
    if x == 0.0:
        return 0.0
    return float(np.exp(x) * gammainc(D + 1, x))


def coherent_coeffs(lam, spec: TruncationSpec) -> CoherentVector:
    lam = _as_points(lam, spec.n)
    coeffs = monomial_matrix(enumerate_basis(spec), np.conj(lam)[None, :])[0]
    return CoherentVector(lam, coeffs, tail_mass(lam, spec.D))


def evaluate_expansion(coeffs, spec, z):
    """Evaluate ``sum_j coeffs[j] e_j(z)``; ``coeffs`` may carry a fiber axis."""
    E = monomial_matrix(enumerate_basis(spec), _as_points(z, spec.n).reshape(-1, spec.n))
    return E @ np.asarray(coeffs)


def gram_matrix(spec, rule):
    """Quadrature Gram matrix ``<e_j, e_k>`` of the truncated monomial basis."""
    E = monomial_matrix(enumerate_basis(spec), rule.points)
    return (np.conj(E) * rule.weights[:, None]).T @ E


def cov_residual(f, lam, rule, support=None):
    """Both sides of the translation change of variables, by quadrature.

    Returns ``|int f(w + lam) dmu(w) - int f(w) ktilde_lam(w) dmu(w)|``.
    ``f`` is vectorised over ``(P, n)`` point arrays.  When ``f`` vanishes
    outside a ball, pass ``support=(center, radius)``; each side is then
    integrated with a disk rule on its own support (n = 1 only).
    """
    lam = _as_points(lam, rule.n)
    if support is None:
        left_rule = right_rule = rule
    else:
        center, radius = support
        order = getattr(rule, "order", None) or 32
        left_rule = quadrature.disk_rule(complex(np.ravel(center)[0]) - lam[0], radius, order)
        right_rule = quadrature.disk_rule(center, radius, order)
    left = quadrature.integrate(left_rule, lambda w: f(w + lam))
    right = quadrature.integrate(right_rule, lambda w: f(w) * ktilde_eval(lam, w))
    return abs(left - right)
