"""Finite-dimensional compactness diagnostics, named experiments and the verify suite."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gammainc

from . import fock, functionals, quadrature, toeplitz
from .errors import InvalidArgument, NumericalFailure
from .parallel import ordered_map
from .symbols import hs_norm, make_symbol

TRACKED = (1, 5, 10, None)  # None stands for the last index N*d
EXAMPLES = ("star1", "star2", "taebaek")


def singular_values(op) -> np.ndarray:
    """Singular values of the dense truncated matrix, descending."""
    matrix = op.matrix if hasattr(op, "matrix") else np.asarray(op)
    try:
        return scipy.linalg.svdvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"singular value decomposition failed: {exc}") from exc


@dataclass
class SingularProfile:
    """Descending singular values per truncation degree at fixed fiber dimension.

    ``tracked`` maps each requested index ``k`` (1-based, ``None`` meaning
    the last) to its value along the ``D`` ladder; indices beyond the
    matrix size are ``nan``.
    """

    d: int
    D_ladder: list
    values: list
    tracked: dict
    verdict: str
    thresholds: dict = field(default_factory=dict)

    def rows(self):
        for D, vals in zip(self.D_ladder, self.values):
            for k, s in enumerate(vals, start=1):
                yield D, self.d, k, float(s)

    def to_json_dict(self):
        return {
            "d": self.d,
            "D_ladder": list(self.D_ladder),
            "singular_values": [[float(s) for s in v] for v in self.values],
            "tracked": {str(k): [None if np.isnan(x) else float(x) for x in v]
                        for k, v in self.tracked.items()},
            "verdict": self.verdict,
            "thresholds": self.thresholds,
        }


def _tracked_key(k):
    return "last" if k is None else k


def classify(values, plateau=0.5, decay=1e-3, stable=1e-6, k_set=TRACKED):
    """Verdict from the singular values of the last two truncations.

    ``non-compact-consistent``: the smallest tracked value stays at or above
    ``plateau * sigma_1``.  ``compact-consistent``: every fixed tracked index
    moves by at most ``stable * sigma_1`` between the last two truncations and
    the last computed value falls below ``decay * sigma_1``.  Otherwise
    ``inconclusive``.
    """
    last = values[-1]
    s1 = last[0] if last.size else 0.0
    if s1 == 0.0:
        return "inconclusive"
    if last[-1] >= plateau * s1 and (len(values) < 2 or values[-2][-1] >= plateau * s1):
        return "non-compact-consistent"
    if len(values) < 2:
        return "inconclusive"
    prev = values[-2]
    fixed = [k for k in k_set if k is not None and k <= prev.size]
    if all(abs(last[k - 1] - prev[k - 1]) <= stable * s1 for k in fixed) and last[-1] < decay * s1:
        return "compact-consistent"
    return "inconclusive"


def compactness_profile(phi, D_ladder, order, k_set=TRACKED, plateau=0.5, decay=1e-3,
                        stable=1e-6, threads=1) -> SingularProfile:
    """Singular values of ``T_Phi`` truncations along a ladder of degrees."""
    D_ladder = [int(D) for D in D_ladder]
    if not D_ladder or any(b <= a for a, b in zip(D_ladder, D_ladder[1:])):
        raise InvalidArgument("D ladder must be non-empty and increasing")
    rule = quadrature.build_product_rule(phi.n, order)

    def one(D):
        spec = fock.TruncationSpec(phi.n, D, phi.d)
        return singular_values(toeplitz.assemble_toeplitz(phi, spec, rule))

    values = ordered_map(one, D_ladder, threads)
    tracked = {}
    for k in k_set:
        tracked[_tracked_key(k)] = [
            float(v[-1]) if k is None else (float(v[k - 1]) if k <= v.size else float("nan"))
            for v in values
        ]
    verdict = classify(values, plateau, decay, stable, k_set)
    thresholds = {"plateau": plateau, "decay": decay, "stable": stable}
    return SingularProfile(phi.d, D_ladder, values, tracked, verdict, thresholds)


def multiplicity(values, rtol=1e-9):
    """How many singular values coincide with the largest one."""
    values = np.asarray(values)
    if values.size == 0 or values[0] == 0:
        return 0
    return int(np.sum(np.abs(values - values[0]) <= rtol * values[0]))


# -- named experiments -----------------------------------------------------------

def example_symbol(tag, d, n=1):
    """Symbols of the three named experiments at fiber dimension ``d``.

    ``star1``: the constant identity.  ``star2``: the unit-ball indicator
    times the identity.  ``taebaek``: the unit-ball indicator times
    ``diag(1/sqrt(i))``, compact but not Hilbert-Schmidt as ``d`` grows.
    """
    if tag == "star1":
        params = {"family": "constant", "A": "identity"}
    elif tag == "star2":
        params = {"family": "ball_indicator", "A": "identity", "R": 1.0}
    elif tag == "taebaek":
        params = {"family": "ball_indicator", "A": "harmonic_diag", "R": 1.0}
    else:
        raise InvalidArgument(f"unknown example {tag!r}; expected one of {EXAMPLES}")
    return make_symbol(params, n, d)


def ball_toeplitz_eigenvalues(D, R=1.0):
    """Diagonal of the scalar ball-indicator Toeplitz matrix, ``P(m + 1, R^2)``."""
    return gammainc(np.arange(D + 1) + 1.0, R**2)


def random_unit(d, rng):
    g = rng.normal(size=d) + 1j * rng.normal(size=d)
    return g / np.linalg.norm(g)


def _decays(profile, rel=1e-4):
    first = profile.values[0]
    last = profile.values[-1]
    return bool(np.all(last <= rel * np.maximum(first, 1e-300)))


def _yes(flag):
    return "yes" if flag else "no"


def run_example(tag, d_ladder=(2, 8, 32), order=32, radii=None, D_ladder=(4, 8, 12),
                seed=0, threads=1, thresholds=None):
    """Run one named experiment across a fiber-dimension ladder.

    Returns a dict with, per ``d``, the two functional profiles (the
    necessary one for ``g = e_1`` and for a seeded random unit ``g``) and the
    singular profile, plus the qualitative verdicts.
    """
    if tag not in EXAMPLES:
        raise InvalidArgument(f"unknown example {tag!r}; expected one of {EXAMPLES}")
    d_ladder = [int(d) for d in d_ladder]
    if not d_ladder or any(b <= a for a, b in zip(d_ladder, d_ladder[1:])):
        raise InvalidArgument("d ladder must be non-empty and increasing")
    thresholds = dict(thresholds or {})
    rule = quadrature.build_product_rule(1, order)
    rng = np.random.default_rng(seed)
    per_d = []
    for d in d_ladder:
        phi = example_symbol(tag, d)
        e1 = np.zeros(d, dtype=complex)
        e1[0] = 1.0
        g_rand = random_unit(d, rng)
        N = functionals.functional_profile(phi, "stroethoff", rule, radii, seed=seed, threads=threads)
        M1 = functionals.functional_profile(phi, "necessary", rule, radii, g=e1, seed=seed,
                                            threads=threads)
        Mr = functionals.functional_profile(phi, "necessary", rule, radii, g=g_rand, seed=seed,
                                            threads=threads)
        sp = compactness_profile(phi, D_ladder, order, threads=threads, **thresholds)
        per_d.append({"d": d, "hs_norm_sq": float(hs_norm(phi.matrix) ** 2), "stroethoff": N,
                      "necessary_e1": M1, "necessary_random": Mr, "singular": sp,
                      "top_multiplicity": multiplicity(sp.values[-1])})

    N0 = [row["stroethoff"].values[0].mean() for row in per_d]
    grows = len(N0) > 1 and all(b > a * (1 + 1e-12) for a, b in zip(N0, N0[1:]))
    n_decays = all(_decays(row["stroethoff"]) for row in per_d)
    m_decays = all(_decays(row["necessary_e1"]) and _decays(row["necessary_random"]) for row in per_d)
    if n_decays and not grows:
        n_verdict = "yes"
    else:
        reasons = []
        if not n_decays:
            reasons.append("no decay in |z|")
        if grows:
            reasons.append("grows with d")
        n_verdict = "no (" + ", ".join(reasons) + ")"
    last = per_d[-1]["singular"].verdict
    verdicts = {"necessary_decay": _yes(m_decays), "stroethoff_decay": n_verdict,
                "compactness": last}
    if tag == "star2":
        mults = [row["top_multiplicity"] for row in per_d]
        verdicts["top_multiplicity_grows"] = _yes(all(b > a for a, b in zip(mults, mults[1:])))
    return {"tag": tag, "d_ladder": d_ladder, "D_ladder": list(D_ladder), "order": order,
            "seed": seed, "per_d": per_d, "verdicts": verdicts,
            "summary": ", ".join(f"{k}: {v}" for k, v in verdicts.items())}


def example_to_json(report):
    out = {k: v for k, v in report.items() if k != "per_d"}
    out["per_d"] = [
        {"d": row["d"], "hs_norm_sq": row["hs_norm_sq"], "top_multiplicity": row["top_multiplicity"],
         "stroethoff": row["stroethoff"].to_json_dict(),
         "necessary_e1": row["necessary_e1"].to_json_dict(),
         "necessary_random": row["necessary_random"].to_json_dict(),
         "singular": row["singular"].to_json_dict()}
        for row in report["per_d"]
    ]
    return out


# -- verification suite ----------------------------------------------------------

@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_json_dict(self):
        r = self.residual
        return {"name": self.name, "residual": r if np.isfinite(r) else repr(r),
                "tolerance": self.tolerance, "passed": bool(self.passed), "detail": self.detail}


def _upper(name, residual, tol, detail=""):
    return Check(name, float(residual), float(tol), bool(residual <= tol), detail)


def moment_check(order):
    """Worst Gaussian moment error in units of the rounding scale ``int |x^a y^b| dmu``."""
    from scipy.special import gamma

    rule = quadrature.build_product_rule(1, order)
    x, y = rule.points[:, 0].real, rule.points[:, 0].imag
    worst = 0.0
    for a in range(2 * order - 1):
        for b in range(2 * order - 1 - a):
            exact = _real_moment(a) * _real_moment(b)
            scale = gamma((a + 1) / 2) * gamma((b + 1) / 2) / np.pi
            got = rule.weights @ (x**a * y**b)
            worst = max(worst, abs(got - exact) / scale)
    return _upper(f"quadrature_moments_q{order}", worst, 1e-12, "relative to int |x^a y^b| dmu")


def _real_moment(a):
    # int x^a e^{-x^2} dx / sqrt(pi)
    from scipy.special import factorial2

    if a % 2:
        return 0.0
    return float(factorial2(a - 1, exact=True)) / 2.0 ** (a // 2) if a else 1.0


def gram_check(spec, rule):
    G = fock.gram_matrix(fock.TruncationSpec(spec.n, spec.D), rule)
    return _upper("gram_identity", np.max(np.abs(G - np.eye(G.shape[0]))), 1e-11)


def coherent_gram_check(rule, rng, count=4):
    """Reproducing property ``<k_lam, k_mu> = k(mu, lam)`` by quadrature."""
    worst = 0.0
    W = rule.points
    for _ in range(count):
        lam, mu = (rng.uniform(-0.7, 0.7, size=(2, rule.n)) + 1j * rng.uniform(-0.7, 0.7, size=(2, rule.n)))
        inner = rule.weights @ (fock.kernel_eval(W, lam) * np.conj(fock.kernel_eval(W, mu)))
        exact = fock.kernel_eval(mu, lam)
        worst = max(worst, abs(inner - exact) / abs(exact))
    return _upper("kernel_gram_identity", worst, 1e-10, "relative")


def translation_checks(phi, spec, rule, rng, count=5):
    """Worst translation-identity residual at seeded ``|lam|, |z| <= sqrt(2)``.

    The degree is raised to the largest the rule supports (at most 30) so
    that truncating the coherent vector costs nothing visible.
    """
    from math import ceil

    D = max(spec.D, min(30, rule.order - 1 - ceil((phi.degree or 0) / 2)))
    big = fock.TruncationSpec(spec.n, D, spec.d)
    worst = 0.0
    for _ in range(count):
        lam = rng.uniform(-1.0, 1.0, spec.n) + 1j * rng.uniform(-1.0, 1.0, spec.n)
        z = rng.uniform(-1.0, 1.0, spec.n) + 1j * rng.uniform(-1.0, 1.0, spec.n)
        g = random_unit(spec.d, rng)
        worst = max(worst, toeplitz.translation_identity_residual(phi, lam, g, z, big, rule))
    return _upper("translation_identity", worst, 1e-6, f"D={D}")


def _box_grid(n, size=9):
    xs = np.linspace(-fock.WORKING_BOX, fock.WORKING_BOX, size)
    return [complex(a, b) * np.ones(n) for a in xs for b in xs]


def verify(suite, config) -> dict:
    """Run the invariant suite on the configured symbol.

    ``suite`` is ``"quick"`` (quadrature, Gram, reproducing property and
    translation identity) or ``"full"`` (adds adjoint consistency, the xi
    bounds, the weighted-kernel identity and the Schur tail report).
    """
    if suite not in ("quick", "full"):
        raise InvalidArgument(f"unknown suite {suite!r}")
    rng = np.random.default_rng(config.seed)
    phi = config.make_symbol()
    order = config.order
    D = config.D_ladder[-1]
    spec = fock.TruncationSpec(phi.n, D, phi.d)
    rule = quadrature.build_product_rule(phi.n, order)
    checks = []
    if phi.n == 1:
        checks.append(moment_check(order))
    checks.append(gram_check(spec, rule))
    checks.append(coherent_gram_check(rule, rng))
    checks.append(translation_checks(phi, spec, rule, rng))

    if suite == "full":
        smooth = phi.concentration is None or phi.concentration[0] == "gaussian"
        small = fock.TruncationSpec(phi.n, min(D, 6), phi.d)
        checks.append(_upper("adjoint_consistency",
                             toeplitz.adjoint_consistency_residual(phi, small, rule),
                             1e-6 if smooth else 1e-4))
        zs = [np.zeros(phi.n), 0.5 * np.ones(phi.n), (1 - 1j) * np.ones(phi.n)]
        worst_i = -np.inf
        for z in zs:
            mass = functionals.symbol_hs_mass(phi, z, rule)
            for w in _box_grid(phi.n):
                rhs = np.exp(np.sum(np.abs(w) ** 2)) * mass
                res = functionals.xi_hs_bound_residual(phi, z, w, rule)
                worst_i = max(worst_i, -res / max(rhs, 1e-300))
        checks.append(_upper("xi_hs_bound", worst_i, 1e-9, "largest violation relative to RHS"))
        if phi.analytic:
            worst = max(functionals.analytic_identity_residual(phi, z, w, rule)
                        for z in zs for w in _box_grid(phi.n, 5))
            checks.append(_upper("analytic_identity", worst, 1e-8))
        if phi.sup_hs_bound is not None:
            C = phi.sup_hs_bound
            worst = -np.inf
            for z in zs:
                for w in _box_grid(phi.n):
                    m = functionals.xi_growth_margin(phi, z, w, rule)
                    scale = max(C**2 * np.exp(0.5 * np.sum(np.abs(w) ** 2)), 1e-300)
                    worst = max(worst, -m / scale)
            checks.append(_upper("xi_growth_margin", worst, 1e-9, "largest violation relative to bound"))
        if phi.n == 1:
            lhs, rhs = functionals.weighted_kernel_identity(functionals.RadialCutoff(1.0), phi, rule)
            checks.append(_upper("weighted_kernel_identity", abs(lhs - rhs) / max(rhs, 1e-30), 1e-4))
        if phi.sup_hs_bound is not None and phi.n == 1:
            rep = functionals.schur_tail_report(phi, 1.0, small, rule, threads=config.threads)
            excess = rep.tail_norm**2 - rep.bound * (1 + rep.tolerance)
            checks.append(Check("schur_tail", float(rep.tail_norm**2), float(rep.bound * (1 + rep.tolerance)),
                                bool(rep.passes), f"excess {excess!r}"))
    return {"suite": suite, "symbol": phi.description, "D": D, "order": order, "seed": config.seed,
            "checks": [c.to_json_dict() for c in checks],
            "passed": all(c.passed for c in checks)}
