"""Operator-valued symbols C^n -> d x d complex matrices.

Every built-in family has the separable form ``Phi(z) = phi(z) A`` with a
scalar profile ``phi`` and a fixed matrix ``A``; assembly routines use that
structure when it is present.  Non-separable symbols (direct sums, or
anything built from a raw evaluator) go through the generic matrix path.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from .errors import InvalidArgument

FAMILIES = ("constant", "scalar_matrix", "monomial", "gaussian_radial", "ball_indicator")


def hs_norm(M):
    """Hilbert-Schmidt (Frobenius) norm; batches over leading axes."""
    M = np.asarray(M)
    out = np.sqrt(np.sum(np.abs(M) ** 2, axis=(-2, -1)))
    return out if out.ndim else float(out)


def named_matrix(name, d):
    if name == "identity":
        return np.eye(d, dtype=complex)
    if name == "harmonic_diag":
        return np.diag(1.0 / np.sqrt(np.arange(1, d + 1))).astype(complex)
    raise InvalidArgument(f"unknown matrix generator {name!r}")


def _parse_entry(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidArgument(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return complex(x.replace(" ", ""))
    return complex(x)


def parse_matrix(spec, d):
    """Matrix from a generator name or explicit row-major entries."""
    if spec is None:
        return named_matrix("identity", d)
    if isinstance(spec, str):
        return named_matrix(spec, d)
    A = np.array([[_parse_entry(x) for x in row] for row in spec], dtype=complex)
    if A.shape != (d, d):
        raise InvalidArgument(f"matrix has shape {A.shape}, expected {(d, d)}")
    return A


@dataclass(frozen=True)
class SymbolFamilyParams:
    """Family tag plus its parameters.

    ``profile`` selects the scalar factor of ``scalar_matrix``
    (``"gaussian"`` or ``"ball"``); ``p, q`` are the conjugate and analytic
    exponents of ``monomial``; ``t`` is the Gaussian rate, ``R`` the ball radius.
    """

    family: str
    A: object = "identity"
    p: int = 0
    q: int = 0
    t: float = 1.0
    R: float = 1.0
    profile: str = "gaussian"

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {"family", "A", "p", "q", "t", "R", "profile"}
        if unknown:
            raise InvalidArgument(f"unknown symbol parameters {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        A = self.A
        if isinstance(A, np.ndarray):
            A = [[[float(x.real), float(x.imag)] for x in row] for row in A]
        return {"family": self.family, "A": A, "p": self.p, "q": self.q,
                "t": self.t, "R": self.R, "profile": self.profile}


@dataclass(frozen=True, eq=False)
class OperatorSymbol:
    """A bounded-or-not Borel map ``C^n -> B(C^d)`` with metadata.

    Either ``profile``/``matrix`` (separable) or ``evaluator`` is set.
    ``shift`` accumulates translations, so ``Phi_shift(z) = Phi(z + shift)``
    and composing a translation with its inverse restores the symbol bit
    for bit.  ``concentration`` is a quadrature hint in unshifted
    coordinates: ``("ball", center, R)`` for symbols vanishing off a ball,
    ``("gaussian", center, t)`` for a factor ``exp(-t|z - center|^2)``.
    """

    n: int
    d: int
    profile: object = None
    matrix: np.ndarray = None
    evaluator: object = None
    shift: np.ndarray = None
    analytic: bool = False
    sup_hs_bound: float = None
    degree: int = None
    concentration: tuple = None
    real_profile: bool = False
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.shift is None:
            object.__setattr__(self, "shift", np.zeros(self.n, dtype=complex))
        if (self.profile is None) == (self.evaluator is None):
            raise InvalidArgument("a symbol needs exactly one of profile or evaluator")
        if self.matrix is not None and self.matrix.shape != (self.d, self.d):
            raise InvalidArgument(f"matrix must be {self.d}x{self.d}")

    @property
    def separable(self):
        return self.profile is not None

    @property
    def hs_valued_uniform(self):
        return self.sup_hs_bound is not None

    @property
    def hermitian(self):
        """True when every value ``Phi(z)`` is a Hermitian matrix."""
        return (self.separable and self.real_profile
                and np.array_equal(self.matrix, self.matrix.conj().T))

    def _points(self, z):
        z = np.asarray(z, dtype=complex)
        single = z.ndim <= 1
        z = z.reshape(-1, self.n)
        return z + self.shift, single

    def scalar(self, z):
        """Scalar profile ``phi(z + shift)`` of a separable symbol."""
        pts, single = self._points(z)
        out = np.asarray(self.profile(pts), dtype=complex)
        return complex(out[0]) if single else out

    def __call__(self, z):
        pts, single = self._points(z)
        if self.separable:
            out = np.asarray(self.profile(pts), dtype=complex)[:, None, None] * self.matrix
        else:
            out = np.asarray(self.evaluator(pts), dtype=complex)
        return out[0] if single else out

    def support(self):
        """``(center, radius)`` of a ball outside which the symbol vanishes."""
        if self.concentration and self.concentration[0] == "ball":
            _, center, radius = self.concentration
            return np.asarray(center) - self.shift, radius
        return None


def make_symbol(params, n: int, d: int) -> OperatorSymbol:
    """Build a symbol from a family description."""
    if isinstance(params, dict):
        params = SymbolFamilyParams.from_dict(params)
    if params.family not in FAMILIES:
        raise InvalidArgument(f"unknown family {params.family!r}; expected one of {FAMILIES}")
    A = parse_matrix(params.A, d) if not isinstance(params.A, np.ndarray) else params.A
    if A.shape != (d, d):
        raise InvalidArgument(f"matrix has shape {A.shape}, expected {(d, d)}")
    A = np.array(A, dtype=complex)
    A.setflags(write=False)
    norm_A = hs_norm(A)
    origin = np.zeros(n, dtype=complex)
    desc = {"n": n, "d": d, **params.to_dict()}
    common = dict(n=n, d=d, matrix=A, description=desc)

    family = params.family
    if family == "scalar_matrix":
        if params.profile not in ("gaussian", "ball"):
            raise InvalidArgument(f"unknown scalar profile {params.profile!r}")
        family = "gaussian_radial" if params.profile == "gaussian" else "ball_indicator"

    if family == "constant":
        return OperatorSymbol(profile=_one, analytic=True, sup_hs_bound=norm_A,
                              degree=0, real_profile=True, **common)
    if family == "gaussian_radial":
        t = float(params.t)
        if not t > -1.0:
            raise InvalidArgument(f"gaussian rate must exceed -1, got {t}")
        return OperatorSymbol(profile=_Gaussian(t), sup_hs_bound=norm_A if t >= 0 else None,
                              concentration=("gaussian", origin, t), real_profile=True,
                              analytic=(t == 0.0), degree=0 if t == 0.0 else None, **common)
    if family == "ball_indicator":
        R = float(params.R)
        if not R > 0:
            raise InvalidArgument(f"ball radius must be positive, got {R}")
        return OperatorSymbol(profile=_Ball(R), sup_hs_bound=norm_A,
                              concentration=("ball", origin, R), real_profile=True, **common)
    # monomial
    if n != 1:
        raise InvalidArgument("monomial symbols are defined for n = 1")
    p, q = int(params.p), int(params.q)
    if p < 0 or q < 0:
        raise InvalidArgument("monomial exponents must be non-negative")
    return OperatorSymbol(profile=_Monomial(p, q), analytic=(p == 0), degree=p + q,
                          sup_hs_bound=norm_A if p + q == 0 else None,
                          real_profile=(p == q), **common)


def _one(z):
    return np.ones(z.shape[0], dtype=complex)


class _Gaussian:
    def __init__(self, t):
        self.t = t

    def __call__(self, z):
        return np.exp(-self.t * np.sum(np.abs(z) ** 2, axis=1)).astype(complex)


class _Ball:
    def __init__(self, R):
        self.R = R

    def __call__(self, z):
        return (np.sum(np.abs(z) ** 2, axis=1) <= self.R**2).astype(complex)


class _Monomial:
    def __init__(self, p, q):
        self.p, self.q = p, q

    def __call__(self, z):
        z = z[:, 0]
        return np.conj(z) ** self.p * z**self.q


def translate_symbol(phi: OperatorSymbol, lam) -> OperatorSymbol:
    """``z -> Phi(z + lam)``; flags and bounds are preserved."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if lam.shape != (phi.n,):
        raise InvalidArgument(f"translation must lie in C^{phi.n}")
    return replace(phi, shift=phi.shift + lam)


def scale_symbol(phi: OperatorSymbol, c) -> OperatorSymbol:
    c = complex(c)
    bound = None if phi.sup_hs_bound is None else abs(c) * phi.sup_hs_bound
    if phi.separable:
        A = phi.matrix * c
        A.setflags(write=False)
        return replace(phi, matrix=A, sup_hs_bound=bound)
    inner = phi.evaluator
    return replace(phi, evaluator=lambda z: c * inner(z), sup_hs_bound=bound)


def direct_sum(phi1: OperatorSymbol, phi2: OperatorSymbol) -> OperatorSymbol:
    """Block-diagonal symbol ``Phi1 (+) Phi2`` on fiber ``d1 + d2``."""
    if phi1.n != phi2.n:
        raise InvalidArgument("direct summands must share n")
    d1, d = phi1.d, phi1.d + phi2.d

    def evaluator(z):
        out = np.zeros((z.shape[0], d, d), dtype=complex)
        out[:, :d1, :d1] = phi1(z)
        out[:, d1:, d1:] = phi2(z)
        return out

    b1, b2 = phi1.sup_hs_bound, phi2.sup_hs_bound
    hint = None
    if phi1.concentration and phi2.concentration:
        k1, c1, p1 = phi1.concentration
        k2, c2, p2 = phi2.concentration
        same_place = np.array_equal(np.asarray(c1) - phi1.shift, np.asarray(c2) - phi2.shift)
        if k1 == k2 and p1 == p2 and same_place:
            hint = (k1, np.asarray(c1) - phi1.shift, p1)
    degrees = (phi1.degree, phi2.degree)
    return OperatorSymbol(
        n=phi1.n, d=d, evaluator=evaluator,
        analytic=phi1.analytic and phi2.analytic,
        sup_hs_bound=None if b1 is None or b2 is None else float(np.hypot(b1, b2)),
        degree=None if None in degrees else max(degrees),
        concentration=hint,
        description={"direct_sum": [phi1.description, phi2.description]},
    )


def symbol_from_function(fn, n, d, **flags) -> OperatorSymbol:
    """Wrap a vectorised ``(P, n) -> (P, d, d)`` callable as a symbol."""
    return OperatorSymbol(n=n, d=d, evaluator=fn, **flags)


def sample_ball(n, radius, samples):
    """Deterministic low-discrepancy points in the ball, origin first."""
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    pts = [np.zeros(n, dtype=complex)]
    if samples == 1:
        return np.array(pts)
    halton = qmc.Halton(d=2 * n, scramble=False)
    if n == 1:
        u = halton.random(samples)[1:]
        z = radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
        return np.concatenate([np.array(pts), z[:, None]])
    while len(pts) < samples:
        u = 2.0 * halton.random(4 * samples) - 1.0
        u = u[np.sum(u * u, axis=1) <= 1.0]
        for row in u:
            if len(pts) == samples:
                break
            pts.append(radius * (row[0::2] + 1j * row[1::2]))
    return np.array(pts)


def estimate_sup_hs(phi: OperatorSymbol, radius, samples) -> float:
    """Largest HS norm over a deterministic sample of ``ball(radius)``.

    A lower bound on the essential supremum.
    """
    return float(np.max(hs_norm(phi(sample_ball(phi.n, radius, samples)))))
