"""Quadrature against the Gaussian measure on C^n.

All rules in this module integrate against

    dmu(z) = pi^{-n} exp(-|z|^2) dV(z),

the normalising density is folded into the weights once, so callers never
multiply by ``pi**-n`` themselves.  A complex point is split into its real
and imaginary parts, so a product rule on C^n is a tensor rule over 2n real
axes.

Besides the plain tensor Gauss-Hermite rule there are a few *adapted*
rules that still integrate against ``mu`` but place their nodes where an
integrand lives: a disk rule for integrands supported in a ball, an
exterior rule for ``{|z| >= r}``, and a shifted/dilated Hermite rule for
integrands carrying their own Gaussian factor.
"""

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_laguerre

from .errors import InvalidArgument, NumericalFailure, ResourceLimitError

DEFAULT_POINT_BUDGET = 10**7


def point_budget():
    """Current quadrature point budget (``BARGMANN_POINT_BUDGET`` overrides)."""
    raw = os.environ.get("BARGMANN_POINT_BUDGET")
    if raw is None:
        return DEFAULT_POINT_BUDGET
    try:
        budget = int(raw)
    except ValueError:
        raise InvalidArgument(f"BARGMANN_POINT_BUDGET must be an integer, got {raw!r}")
    if budget < 1:
        raise InvalidArgument("BARGMANN_POINT_BUDGET must be positive")
    return budget


def check_budget(count, budget=None):
    budget = point_budget() if budget is None else budget
    if count > budget:
        raise ResourceLimitError(
            f"quadrature needs {count} points, point budget is {budget}", budget
        )


@dataclass(frozen=True, eq=False)
class QuadratureRule1D:
    """Gauss-Hermite rule for the weight ``exp(-x^2)/sqrt(pi)``."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def build_hermite_rule(order: int) -> QuadratureRule1D:
    """Gauss-Hermite nodes and normalised weights (they sum to one).

    Nodes come from the symmetric tridiagonal Jacobi matrix (Golub-Welsch),
    polished by Newton steps on the orthonormal recurrence.  Weights are
    the reciprocal Christoffel function ``1 / sum_k h_k(x)^2``, which keeps
    the tiny outer weights accurate to full relative precision.
    """
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise InvalidArgument(f"order must be a positive integer, got {order!r}")
    order = int(order)
    if order == 1:
        nodes, weights = np.zeros(1), np.ones(1)
    else:
        k = np.arange(1, order)
        x = eigh_tridiagonal(np.zeros(order), np.sqrt(k / 2.0), eigvals_only=True)
        for _ in range(3):
            h = _orthonormal_hermite(x, order + 1)
            # h_q' = sqrt(2 q) h_{q-1}
            x = x - h[order] / (np.sqrt(2.0 * order) * h[order - 1])
        nodes = 0.5 * (x - x[::-1])
        h = _orthonormal_hermite(nodes, order)
        weights = 1.0 / np.sum(h * h, axis=0)
        weights = 0.5 * (weights + weights[::-1])
        weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule1D(order, nodes, weights)


def _orthonormal_hermite(x, count):
    # rows h_0..h_{count-1}, orthonormal for exp(-x^2)/sqrt(pi)
    h = np.empty((count,) + x.shape)
    h[0] = 1.0
    if count > 1:
        h[1] = np.sqrt(2.0) * x
    for m in range(1, count - 1):
        h[m + 1] = np.sqrt(2.0 / (m + 1)) * x * h[m] - np.sqrt(m / (m + 1.0)) * h[m - 1]
    return h


@dataclass(frozen=True, eq=False)
class PointRule:
    """Points in C^n with positive weights integrating against ``mu``.

    ``points`` has shape ``(P, n)`` and ``weights`` shape ``(P,)``.
    """

    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self):
        return self.points.shape[1]

    @property
    def size(self):
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class ProductRule(PointRule):
    """Tensor Gauss-Hermite rule over the 2n real axes of C^n."""

    order: int = 0
    axis: QuadratureRule1D = None


def build_product_rule(n: int, order: int, budget=None) -> ProductRule:
    """Tensor rule with ``order**(2n)`` points for ``mu`` on C^n.

    Exact for polynomials in the real coordinates of degree at most
    ``2*order - 1`` in each coordinate.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n!r}")
    axis = build_hermite_rule(order)
    check_budget(order ** (2 * n), budget)
    grids = np.meshgrid(*([axis.nodes] * (2 * n)), indexing="ij")
    wgrids = np.meshgrid(*([axis.weights] * (2 * n)), indexing="ij")
    real = np.stack([g.ravel() for g in grids], axis=1)
    points = real[:, 0::2] + 1j * real[:, 1::2]
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    points.setflags(write=False)
    weights.setflags(write=False)
    return ProductRule(points, weights, order=int(order), axis=axis)


def _frozen(points, weights):
    points = np.ascontiguousarray(points, dtype=complex)
    weights = np.ascontiguousarray(weights, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return PointRule(points, weights)


def gaussian_rule(order, center, scale, budget=None):
    """Hermite rule adapted to a Gaussian bump ``exp(-|z-center|^2/scale^2)``.

    Nodes are ``center + scale * x`` for the tensor nodes ``x``; weights are
    rescaled by the density ratio so the rule still integrates against
    ``mu``.  An integrand of the form ``exp(-|z-center|^2/scale^2 + |z|^2)``
    times a polynomial is then integrated exactly.
    """
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    base = build_product_rule(center.shape[0], order, budget)
    x = base.points
    pts = center + scale * x
    n = center.shape[0]
    log_ratio = -np.sum(np.abs(pts) ** 2, axis=1) + np.sum(np.abs(x) ** 2, axis=1)
    weights = base.weights * scale ** (2 * n) * np.exp(log_ratio)
    return _frozen(pts, weights)


@lru_cache(maxsize=None)
def _unit_disk(order):
    # area rule on the unit disk: Gauss-Legendre in r (with the r Jacobian),
    # trapezoid in the angle
    r, wr = np.polynomial.legendre.leggauss(order)
    r = 0.5 * (r + 1.0)
    wr = 0.5 * wr * r
    m = 2 * order
    theta = 2.0 * np.pi * np.arange(m) / m
    pts = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    w = np.repeat(wr, m) * (2.0 * np.pi / m)
    return pts, w


def disk_rule(center, radius, order):
    """Rule for ``integral over ball(center, radius) of f dmu`` (n = 1).

    Spectrally accurate for integrands smooth on the closed disk, which is
    what makes indicator symbols tractable.
    """
    if radius <= 0:
        raise InvalidArgument("disk radius must be positive")
    c = complex(np.ravel(center)[0])
    u, w = _unit_disk(int(order))
    pts = c + radius * u
    weights = radius**2 * w * np.exp(-np.abs(pts) ** 2) / np.pi
    return _frozen(pts[:, None], weights)


@lru_cache(maxsize=None)
def _laguerre(order):
    return roots_laguerre(order)


def exterior_rule(radius, order, decay=1.0):
    """Rule for ``integral over {|z| >= radius} of f dmu`` (n = 1).

    With ``s = |z|^2 - radius^2`` the measure becomes ``exp(-s) ds dtheta``;
    nodes in ``s`` are Gauss-Laguerre for ``exp(-decay*s)``.  Choose
    ``decay < 1`` when ``f`` itself grows like ``exp((1-decay)|z|^2)``.
    """
    if radius < 0:
        raise InvalidArgument("radius must be non-negative")
    s, ws = _laguerre(int(order))
    s = s / decay
    ws = ws / decay * np.exp((decay - 1.0) * s)
    m = 2 * int(order)
    theta = 2.0 * np.pi * np.arange(m) / m
    rho = np.sqrt(s + radius**2)
    pts = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(ws, m) * np.exp(-radius**2) / m
    return _frozen(pts[:, None], weights)


def _evaluate(rule, f):
    values = np.asarray(f(rule.points))
    if values.shape[:1] != (rule.size,):
        raise InvalidArgument(
            f"integrand returned shape {values.shape}, expected leading axis {rule.size}"
        )
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.nonzero(bad.reshape(rule.size, -1).any(axis=1))[0][0])
        node = rule.points[idx]
        raise NumericalFailure(f"non-finite integrand value at node {node}", node)
    return values


def integrate(rule: PointRule, f) -> complex:
    """Weighted sum ``sum_p w_p f(z_p)``.

    ``f`` is called once with the whole ``(P, n)`` point array and must
    return ``P`` values.
    """
    values = _evaluate(rule, f)
    return complex(np.sum(rule.weights * values))


def integrate_matrix(rule: PointRule, F) -> np.ndarray:
    """Entrywise integral of a matrix-valued ``F`` returning ``(P, d, d)``."""
    values = _evaluate(rule, F)
    return np.sum(rule.weights[:, None, None] * values, axis=0)
