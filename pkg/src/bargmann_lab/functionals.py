"""Compactness functionals, the kernel bounds behind them, and the Schur tail.

Two functionals of ``z`` drive everything here:

* the Hilbert-Schmidt functional ``N(z) = int ||xi(z, w)||_HS^2 dmu(w)``,
  whose decay at infinity is sufficient for compactness of ``T_Phi``;
* the vector functional ``M(z, g) = int ||xi(z, w) g||^2 dmu(w)``, whose decay
  is necessary.

At finite fiber dimension both are finite; the gap between them shows up as
growth in ``d``.
"""

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import fock, quadrature
from .errors import InvalidArgument
from .parallel import ordered_map
from .symbols import OperatorSymbol, hs_norm, translate_symbol
from .toeplitz import (
    _xi_parts,
    assemble_integral_operator,
    symbol_rule,
    weighted_theta_kernel,
    xi_eval,
    xi_grid,
)

TAGS = ("stroethoff", "necessary")


def _point(z, n):
    return np.asarray(z, dtype=complex).reshape(n)


def _xi_sq_norms(phi, z, rule):
    """``(w-weights, ||xi(z, w)||_HS^2)`` over the nodes of ``rule``."""
    scalar, values = _xi_parts(phi, _point(z, phi.n), rule.points, rule)
    if scalar is not None:
        return np.abs(scalar) ** 2 * hs_norm(phi.matrix) ** 2
    return hs_norm(values) ** 2


def stroethoff_N(phi: OperatorSymbol, z, rule) -> float:
    """``int ||xi(z, w)||_HS^2 dmu(w)``."""
    return float(rule.weights @ _xi_sq_norms(phi, z, rule))


def necessary_M(phi: OperatorSymbol, z, g, rule) -> float:
    """``int ||xi(z, w) g||^2 dmu(w)`` for a unit fiber vector ``g``."""
    g = np.asarray(g, dtype=complex).reshape(phi.d)
    if abs(np.linalg.norm(g) - 1.0) > 1e-12:
        raise InvalidArgument("g must be a unit vector")
    scalar, values = _xi_parts(phi, _point(z, phi.n), rule.points, rule)
    if scalar is not None:
        sq = np.abs(scalar) ** 2 * np.linalg.norm(phi.matrix @ g) ** 2
    else:
        sq = np.linalg.norm(values @ g, axis=1) ** 2
    return float(rule.weights @ sq)


def symbol_hs_mass(phi: OperatorSymbol, z, rule) -> float:
    """``int ||Phi(u + z)||_HS^2 dmu(u)``."""
    shifted = translate_symbol(phi, _point(z, phi.n))
    srule = symbol_rule(shifted, rule)
    return float(srule.weights @ (hs_norm(shifted(srule.points)) ** 2))


def xi_hs_bound_residual(phi: OperatorSymbol, z, w, rule) -> float:
    """``k_w(w) int ||Phi_z||_HS^2 dmu - ||xi(z, w)||_HS^2`` (non-negative in theory)."""
    w = _point(w, phi.n)
    rhs = np.exp(np.sum(np.abs(w) ** 2)) * symbol_hs_mass(phi, z, rule)
    return float(rhs - hs_norm(xi_eval(phi, z, w, rule)) ** 2)


def analytic_identity_residual(phi: OperatorSymbol, z, w, rule) -> float:
    """``| ||xi(z, w)||_HS - ||Phi(z + w)||_HS |`` for analytic symbols."""
    if not phi.analytic:
        raise InvalidArgument("symbol is not flagged analytic")
    z, w = _point(z, phi.n), _point(w, phi.n)
    return float(abs(hs_norm(xi_eval(phi, z, w, rule)) - hs_norm(phi(z + w))))


def xi_growth_margin(phi: OperatorSymbol, z, w, rule) -> float:
    """``C^2 exp(|w|^2 / 2) - ||xi(z, w)||_HS^2`` with ``C`` the sup HS bound.

    The square on ``C`` is what the Jensen argument actually yields; without
    it the inequality fails for symbols with ``C < 1``.
    """
    if phi.sup_hs_bound is None:
        raise InvalidArgument("symbol has no sup HS bound")
    w = _point(w, phi.n)
    C = phi.sup_hs_bound
    bound = C**2 * np.exp(0.5 * np.sum(np.abs(w) ** 2))
    return float(bound - hs_norm(xi_eval(phi, z, w, rule)) ** 2)


# -- cut-offs in the first variable ----------------------------------------------

@dataclass(frozen=True)
class RadialCutoff:
    """``chi_{|z| < radius}`` (``inside``) or ``chi_{|z| >= radius}`` in the first variable."""

    radius: float
    inside: bool = True

    def __call__(self, z, w):
        r2 = np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)
        mask = r2 < self.radius**2 if self.inside else r2 >= self.radius**2
        out = np.asarray(mask, dtype=float)
        shape = np.broadcast_shapes(out.shape, np.asarray(w).shape[:-1])
        return np.broadcast_to(out, shape)

    def z_rule(self, order, n=1):
        """Rule for the z-integral restricted to the cut-off region (n = 1)."""
        if n != 1:
            return None
        if self.inside:
            return quadrature.disk_rule(0.0, self.radius, order)
        return quadrature.exterior_rule(self.radius, order)


def weighted_kernel_identity(gamma, phi: OperatorSymbol, rule, z_rule=None, z_order=8):
    """Both sides of the HS identity for the gamma-weighted adjoint kernel.

    ``lhs = iint ||Theta_gamma(z, w)||_HS^2 dmu(z) dmu(w)`` straight from the
    kernel; ``rhs = int k_z(z) (int |gamma(z, w)|^2 ||xi(z, w)||_HS^2 dmu(w)) dmu(z)``.
    The w-integrals use ``rule``; the z-integral uses ``z_rule``, by default
    the cut-off's own rule of order ``z_order`` when ``gamma`` provides one.
    Each z-node costs two full xi evaluations, so that order is kept low.
    """
    if z_rule is None and hasattr(gamma, "z_rule"):
        z_rule = gamma.z_rule(z_order, phi.n)
    if z_rule is None:
        z_rule = rule
    W = rule.points
    norm_A = hs_norm(phi.matrix) ** 2 if phi.separable else None
    lhs = rhs = 0.0
    for z, wz in zip(z_rule.points, z_rule.weights):
        for shifted_w, weight_fn in ((W - z, True), (W, False)):
            scalar, values = _xi_parts(phi, z, shifted_w, rule)
            sq = np.abs(scalar) ** 2 * norm_A if scalar is not None else hs_norm(values) ** 2
            gam = np.abs(gamma(z[None, :], shifted_w)) ** 2
            if weight_fn:
                kz = np.abs(fock.kernel_eval(W, z)) ** 2
                lhs += wz * float(rule.weights @ (gam * kz * sq))
            else:
                kzz = np.exp(np.sum(np.abs(z) ** 2))
                rhs += wz * kzz * float(rule.weights @ (gam * sq))
    return float(lhs), float(rhs)


# -- profiles --------------------------------------------------------------------

def default_directions(n=1, seed=0):
    """``1, i, (1+i)/sqrt(2)`` along the first axis plus one seeded random unit vector."""
    rng = np.random.default_rng(seed)
    dirs = []
    for c in (1.0, 1j, (1 + 1j) / np.sqrt(2)):
        v = np.zeros(n, dtype=complex)
        v[0] = c
        dirs.append(v)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


def default_radii():
    return np.arange(0.0, 5.0 + 1e-12, 0.5)


def fit_tail_exponent(radii, values):
    """Exponent ``kappa`` of a ``exp(-kappa r^2)`` fit over the outer half of the ladder.

    Zero or negative fitted decay is reported as is; ``nan`` if fewer than
    two usable points remain.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 2:
        with np.errstate(divide="ignore"):
            logs = np.log(values)
        logv = np.where(np.all(np.isfinite(logs), axis=1), logs.mean(axis=1), -np.inf)
    else:
        with np.errstate(divide="ignore"):
            logv = np.log(values)
    keep = np.arange(radii.size) >= radii.size // 2
    keep &= np.isfinite(logv)
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(radii[keep] ** 2, logv[keep], 1)[0]
    return float(-slope)


@dataclass
class FunctionalProfile:
    radii: np.ndarray
    directions: np.ndarray
    values: np.ndarray
    tag: str
    symbol: dict
    order: int
    g: np.ndarray = None
    tail_exponent: float = float("nan")

    def to_json_dict(self):
        return {
            "functional": self.tag,
            "symbol": self.symbol,
            "quadrature_order": self.order,
            "radii": [float(r) for r in self.radii],
            "directions": [[[float(c.real), float(c.imag)] for c in v] for v in self.directions],
            "g": None if self.g is None else [[float(c.real), float(c.imag)] for c in self.g],
            "values": [[float(x) for x in row] for row in self.values],
            "tail_exponent": _json_float(self.tail_exponent),
        }


def _json_float(x):
    return None if not np.isfinite(x) else float(x)


def functional_profile(phi, tag, rule, radii=None, directions=None, g=None, seed=0, threads=1):
    """Sample one functional along radial rays ``r * direction``."""
    if tag not in TAGS:
        raise InvalidArgument(f"functional tag must be one of {TAGS}")
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0) or np.any(radii < 0):
        raise InvalidArgument("radii must be non-negative and increasing")
    directions = default_directions(phi.n, seed) if directions is None else np.asarray(directions)
    if tag == "necessary":
        if g is None:
            g = np.zeros(phi.d, dtype=complex)
            g[0] = 1.0
        g = np.asarray(g, dtype=complex)
        g = g / np.linalg.norm(g)
    cells = [(r, v) for r in radii for v in directions]

    def cell(item):
        r, v = item
        if tag == "stroethoff":
            return stroethoff_N(phi, r * v, rule)
        return necessary_M(phi, r * v, g, rule)

    values = np.array(ordered_map(cell, cells, threads)).reshape(radii.size, len(directions))
    return FunctionalProfile(radii, directions, values, tag, dict(phi.description),
                             getattr(rule, "order", 0), g, fit_tail_exponent(radii, values))


# -- Schur test for the tail kernel ----------------------------------------------

def default_grid(n=1, seed=0, radii=None):
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    dirs = default_directions(n, seed)
    return np.array([r * v for r in radii for v in dirs])


@dataclass
class SchurReport:
    r: float
    alpha_hat: float
    beta_hat: float
    tail_norm: float
    bound: float
    passes: bool
    tolerance: float
    alpha_printed: float
    beta_printed: float
    grid: np.ndarray = field(repr=False, default=None)
    alpha_ratios: np.ndarray = field(repr=False, default=None)
    beta_ratios: np.ndarray = field(repr=False, default=None)

    def to_json_dict(self):
        out = {k: v for k, v in asdict(self).items()
               if k not in ("grid", "alpha_ratios", "beta_ratios")}
        out["passes"] = bool(self.passes)
        out["grid"] = [[[float(c.real), float(c.imag)] for c in p] for p in self.grid]
        out["alpha_ratios"] = [float(x) for x in self.alpha_ratios]
        out["beta_ratios"] = [_json_float(x) for x in self.beta_ratios]
        return out


def _xi_norm_rows(phi, Z, W_of_z, rule):
    # H[i, q] = ||xi(z_i, W_of_z(z_i)[q])||_HS
    norm_A = hs_norm(phi.matrix) if phi.separable else None
    rows = []
    for z in Z:
        scalar, values = _xi_parts(phi, z, W_of_z(z), rule)
        rows.append(np.abs(scalar) * norm_A if scalar is not None else hs_norm(values))
    return np.array(rows)


def schur_alpha_ratio(phi, r, w, rule, order=None):
    """``int_{|z|>=r} |k_z(w)| ||xi(z, w - z)|| k_z(z)^{1/2} dmu(z) / k_w(w)^{1/2}``."""
    w = _point(w, phi.n)
    order = order or getattr(rule, "order", 32)
    zr = quadrature.exterior_rule(r, order, decay=0.5) if phi.n == 1 else None
    if zr is None:
        mask = np.sum(np.abs(rule.points) ** 2, axis=1) >= r**2
        zr = quadrature.PointRule(rule.points[mask], rule.weights[mask])
    if zr.size == 0:
        return 0.0
    H = _xi_norm_rows(phi, zr.points, lambda z: (w - z)[None, :], rule)[:, 0]
    zz = np.sum(np.abs(zr.points) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        logs = (np.log(zr.weights) + np.real(zr.points @ np.conj(w)) + 0.5 * zz
                - 0.5 * np.sum(np.abs(w) ** 2))
    return float(np.sum(np.exp(logs) * H))


def schur_beta_ratio(phi, z, rule, order=None):
    """``int |k_z(w)| ||xi(z, w - z)|| k_w(w)^{1/2} dmu(w) / k_z(z)^{1/2}``.

    The w-nodes sit on the Gaussian ``exp(-|w - z|^2 / 2)`` that the kernel
    factors combine into, so only ``||xi||`` is left to resolve.
    """
    z = _point(z, phi.n)
    order = order or getattr(rule, "order", 32)
    wr = quadrature.gaussian_rule(order, z, np.sqrt(2.0))
    H = _xi_norm_rows(phi, [z], lambda z0: wr.points - z0, rule)[0]
    ww = np.sum(np.abs(wr.points) ** 2, axis=1)
    logs = (np.log(wr.weights) + np.real(wr.points @ np.conj(z)) + 0.5 * ww
            - 0.5 * np.sum(np.abs(z) ** 2))
    return float(np.sum(np.exp(logs) * H))


def schur_tail_report(phi, r, spec, rule, grid=None, tol=0.01, threads=1) -> SchurReport:
    """Schur-test bound for the tail kernel ``Theta`` restricted to ``|z| >= r``.

    ``alpha_hat`` and ``beta_hat`` are grid suprema of the two defining
    ratios; ``tail_norm`` is the operator norm of the truncated tail
    integral operator.  The printed closed-form constants are computed for
    comparison only.
    """
    if phi.sup_hs_bound is None:
        raise InvalidArgument("symbol has no sup HS bound")
    if r < 0:
        raise InvalidArgument("cut-off radius must be non-negative")
    grid = default_grid(phi.n) if grid is None else np.asarray(grid, dtype=complex).reshape(-1, phi.n)
    if grid.shape[0] == 0:
        raise InvalidArgument("sample grid is empty")
    C, n = phi.sup_hs_bound, phi.n

    alphas = np.array(ordered_map(lambda w: schur_alpha_ratio(phi, r, w, rule), grid, threads))
    in_tail = np.sum(np.abs(grid) ** 2, axis=1) >= r**2
    betas = np.full(grid.shape[0], np.nan)
    tail_pts = grid[in_tail]
    betas[in_tail] = ordered_map(lambda z: schur_beta_ratio(phi, z, rule), tail_pts, threads)
    alpha_hat = float(alphas.max())
    # empty tail on the grid: supremum over nothing of non-negative ratios
    beta_hat = float(np.nanmax(betas)) if in_tail.any() else 0.0

    kernel = weighted_theta_kernel(RadialCutoff(r, inside=False), phi, rule)
    tail = assemble_integral_operator(kernel, spec, rule).matrix
    tail_norm = float(np.linalg.norm(tail, 2)) if tail.size else 0.0
    bound = alpha_hat * beta_hat
    passes = tail_norm**2 <= bound * (1.0 + tol) or tail_norm <= 1e-12

    sup_N = max((stroethoff_N(phi, z, rule) for z in tail_pts), default=0.0)
    alpha_printed = C * 2.0**n * (2 * np.pi) ** n
    beta_printed = (2 * (2 * np.pi) ** n) ** (2 / 3) * C ** (1 / 6) * sup_N ** (1 / 3)
    return SchurReport(float(r), alpha_hat, beta_hat, tail_norm, bound, bool(passes), tol,
                       float(alpha_printed), float(beta_printed), grid, alphas, betas)


# -- serialisation ---------------------------------------------------------------

def _grid_rows(radii, values):
    for i, r in enumerate(radii):
        for k, v in enumerate(values[i]):
            yield [repr(float(r)), k, repr(float(v))]


def write_profile(profile: FunctionalProfile, prefix):
    """``<prefix>.csv`` (radius, direction_index, value) and ``<prefix>.json``."""
    prefix = str(prefix)
    with open(prefix + ".csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["radius", "direction_index", "value"])
        out.writerows(_grid_rows(profile.radii, profile.values))
    Path(prefix + ".json").write_text(json.dumps(profile.to_json_dict(), sort_keys=True, indent=2) + "\n")


def write_schur_report(report: SchurReport, prefix, symbol=None, order=None):
    """CSV rows are the beta ratios per grid point (empty outside the tail)."""
    prefix = str(prefix)
    with open(prefix + ".csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["radius", "direction_index", "value"])
        for i, (p, b) in enumerate(zip(report.grid, report.beta_ratios)):
            out.writerow([repr(float(np.linalg.norm(p))), i, "" if np.isnan(b) else repr(float(b))])
    payload = report.to_json_dict()
    payload.update({"symbol": symbol, "quadrature_order": order})
    Path(prefix + ".json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
