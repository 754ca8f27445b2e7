"""Free deconvolutions and the explicit freely quasi-infinitely divisible laws.

Covers the Cauchy-minus-MP family ``rho_acl``, the Cauchy-minus-semicircle
family ``gamma_as``, the signed Levy density obtained by removing a free
Meixner law from a Cauchy law, the R-series pair behind the failure of a
free Cramer theorem, and triplets built from several MP laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import BranchError, DuplicateNode, ValidityError
from .families import Cauchy, DistributionModel, FreeConv, ImplicitPhi, MP
from .kernels import CauchyLevyTail, FMQuasiLevy
from .measures import (FreeTriplet, SignedMeasure, hahn_jordan, total_variation,
                       triplet_to_pair)
from .transforms import Const, Pole, RationalMP, sqrt_cut

T0_DEFAULT = 0.05


def _check_branch(f, z):
    bad = np.asarray(f).imag <= 0
    if np.any(bad & (np.asarray(z).imag > 0)):
        raise BranchError("closed-form F left the upper half-plane; branch mismatch")
    return f


@dataclass(frozen=True)
class DeconvolutionSpec:
    """``minuend`` deconvolved by ``subtrahend``: ``phi = phi_min - phi_sub``."""

    minuend: DistributionModel
    subtrahend: DistributionModel
    phi: object = None

    def __post_init__(self):
        if self.phi is None:
            object.__setattr__(self, "phi", self.minuend.phi() - self.subtrahend.phi())

    def reconstruct(self):
        """``phi_sub + phi`` as an expression (equals ``phi_min`` numerically)."""
        return self.subtrahend.phi() + self.phi


def deconvolve(minuend, subtrahend):
    return DeconvolutionSpec(minuend, subtrahend)


# ---------------------------------------------------------------------------
# Cauchy minus Marchenko-Pastur
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoACL(DistributionModel):
    """Law with ``phi(z) = -a i - lam c z / (z - c)``."""

    a: float
    c: float
    lam: float
    name = "rho_acl"

    def f_transform(self, z):
        z = np.asarray(z, dtype=complex)
        a, c, lam = self.a, self.c, self.lam
        u = z + c * (lam + 1) + 1j * a
        q = u * u - 4 * c * (z + 1j * a)
        return _check_branch(0.5 * (u + sqrt_cut(q)), z)

    def cauchy(self, z):
        return 1.0 / self.f_transform(z)

    def phi(self):
        return Const(-1j * self.a) - RationalMP(self.c, self.lam)

    def density(self, x):
        # boundary value of the closed form; sqrt_cut is continuous there
        x = np.asarray(x, dtype=float)
        a, c, lam = self.a, self.c, self.lam
        u = x + c * (lam + 1) + 1j * a
        q = u * u - 4 * c * (x + 1j * a)
        f = 0.5 * (u + sqrt_cut(q))
        return -(1.0 / f).imag / math.pi

    def triplet(self):
        gamma = -self.lam * self.c if abs(self.c) <= 1 else 0.0
        nu = SignedMeasure(((self.c, -self.lam),), ((self.a, CauchyLevyTail()),))
        return FreeTriplet(0.0, nu, gamma)

    @property
    def pick_exact(self):
        return ("mp", self.a, self.c, self.lam)

    def spec(self):
        return DeconvolutionSpec(Cauchy(self.a), MP(self.c, self.lam), self.phi())

    def non_fid_witness(self, y):
        """``Im phi(c + iy) = -a + c^2 lam / y``; positive for small ``y``."""
        z = complex(self.c, y)
        return complex(self.phi().value(z)).imag


def rho_acl(a, c, lam):
    """Cauchy(a) deconvolved by MP(c, lam); needs ``lam <= (a / 2c)^2``."""
    if not (a > 0 and lam > 0 and c != 0):
        raise ValidityError("rho_acl needs a > 0, lambda > 0 and c != 0")
    bound = (a / (2 * c)) ** 2
    if lam > bound:
        raise ValidityError(f"lambda <= (a/2c)^2 violated: lambda = {lam} > {bound}")
    return RhoACL(a, c, lam)


# ---------------------------------------------------------------------------
# Cauchy minus semicircle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaAS(DistributionModel):
    """Law with ``phi(z) = -a i - sigma2 / z``."""

    a: float
    sigma2: float
    name = "gamma_as"

    def f_transform(self, z):
        z = np.asarray(z, dtype=complex)
        u = z + 1j * self.a
        return _check_branch(0.5 * (u + sqrt_cut(u * u + 4 * self.sigma2)), z)

    def cauchy(self, z):
        return 1.0 / self.f_transform(z)

    def phi(self):
        return Const(-1j * self.a) - Pole(self.sigma2)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        u = x + 1j * self.a
        f = 0.5 * (u + sqrt_cut(u * u + 4 * self.sigma2))
        return -(1.0 / f).imag / math.pi

    def triplet(self):
        return FreeTriplet(-self.sigma2, SignedMeasure.kernel(CauchyLevyTail(), self.a), 0.0)

    @property
    def pick_exact(self):
        return ("gamma", self.a, self.sigma2)

    def spec(self):
        from .families import Semicircle
        return DeconvolutionSpec(Cauchy(self.a), Semicircle(0.0, self.sigma2), self.phi())


def gamma_as(a, sigma2):
    """Cauchy(a) deconvolved by the semicircle S(0, sigma2); needs ``2 sigma <= a``."""
    if not (a > 0 and sigma2 > 0):
        raise ValidityError("gamma_as needs a > 0 and sigma2 > 0")
    if 4 * sigma2 > a * a:
        raise ValidityError(f"2 sigma <= a violated: 2 sigma = {2 * math.sqrt(sigma2)} > a = {a}")
    return GammaAS(a, sigma2)


# ---------------------------------------------------------------------------
# Cauchy minus free Meixner
# ---------------------------------------------------------------------------

def fm_quasi_levy_density(b, x):
    """Signed Levy density of ``C_{2 sqrt 2}`` deconvolved by ``FM_{0,b}``."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ValueError("the density is not defined at 0")
    out = FMQuasiLevy(b).pdf(x)
    return float(out) if out.ndim == 0 else out


def fm_quasi_levy_measure(b):
    return SignedMeasure.kernel(FMQuasiLevy(b))


def fm_negative_mass(b, cutoff):
    """``nu_b^-({cutoff <= |x|})``; grows like ``1/cutoff`` when ``b < 1/8``."""
    _, neg = hahn_jordan(fm_quasi_levy_measure(b))
    if neg.is_zero:
        return 0.0
    r = 2 * math.sqrt(b)
    return total_variation(neg, (-r, -cutoff)) + total_variation(neg, (cutoff, r))


# ---------------------------------------------------------------------------
# R-series pair summing to the semicircle of variance 2
# ---------------------------------------------------------------------------

def r_series(t, sign, order=20):
    """Coefficients ``[c_0, ..., c_order]`` of ``R_t^{+/-}``.

    ``R_t^{+} = z^2/(1 - t z^2)`` and ``R_t^{-} = z^2 - t z^4 / (1 - t z^2)``;
    rational ``t`` gives exact coefficients.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    zero = t * 0
    coeffs = [zero] * (order + 1)
    if order >= 2:
        coeffs[2] = zero + 1
    k = 1
    while 2 * k + 2 <= order:
        coeffs[2 * k + 2] = sign * t ** k
        k += 1
    return coeffs


def mp_r_series(c, lam, order=20):
    """R-series of ``MP(c, lam)``: ``lam c z/(1 - c z) = sum lam c^n z^n``."""
    zero = c * 0 * lam
    return [zero] + [lam * c ** n for n in range(1, order + 1)]


@dataclass(frozen=True)
class RtFamily:
    t: object
    sign: int
    series: list = field(compare=False)
    model: object = None
    note: str = ""


def r_t_family(t, sign, order=20, *, t0=T0_DEFAULT):
    """Series and model for ``R_t^{+}`` (FID) or ``R_t^{-}`` (not FID).

    ``mu_+(t) = MP(sqrt t, 1/(2t)) [+] MP(-sqrt t, 1/(2t))``.  ``mu_-(t)`` is
    the semicircle of variance 2 deconvolved by ``mu_+(t)``; it is only
    modelled for ``t <= t0``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    series = r_series(t, sign, order)
    s = math.sqrt(float(t))
    lam = 1.0 / (2 * float(t))
    if sign == 1:
        return RtFamily(t, 1, series, FreeConv((MP(s, lam), MP(-s, lam))))
    if float(t) > t0:
        return RtFamily(t, -1, series, None, f"t = {float(t)} exceeds t0 = {t0}; no model built")
    phi = Pole(2.0) - RationalMP(s, lam) - RationalMP(-s, lam)
    return RtFamily(t, -1, series, ImplicitPhi(phi, f"mu_minus({float(t)})"))


# ---------------------------------------------------------------------------
# triplets from MP laws
# ---------------------------------------------------------------------------

def _drift(atoms):
    # R = sum w u z/(1 - u z) needs gamma = sum of w u over atoms in [-1, 1]
    return sum((w * u for u, w in atoms if abs(u) <= 1), 0)


def smp_triplet(u, x):
    """Triplet of ``R(z) = x^3 u^2 z^2 + (1 - x)^3 u z / (1 - u z)``."""
    if u == 0:
        raise ValueError("u must be nonzero")
    w = (1 - x) ** 3
    atoms = ((u, w),) if w != 0 else ()
    return FreeTriplet(u * u * x ** 3, SignedMeasure(atoms), _drift(atoms))


def _exact(*vals):
    return all(isinstance(v, Rational) for v in vals)


def two_mp_weights(u, v, x):
    """``a(x) = (u-x)^3/(u^2 (u-v))`` and ``b(x) = (v-x)^3/(v^2 (v-u))``."""
    if not u < v or u == 0 or v == 0:
        raise ValueError("two_mp_weights needs u < v, both nonzero")
    if _exact(u, v, x):
        u, v, x = Fraction(u), Fraction(v), Fraction(x)
    return (u - x) ** 3 / (u * u * (u - v)), (v - x) ** 3 / (v * v * (v - u))


def two_mp_triplet(u, v, x):
    a, b = two_mp_weights(u, v, x)
    atoms = tuple((p, w) for p, w in ((u, a), (v, b)) if w != 0)
    return FreeTriplet(0, SignedMeasure(atoms), _drift(atoms))


def multi_mp_weights(us):
    """``t_k = u_k^{n-1} / prod_{i != k} (u_k - u_i)``; exact for rational input."""
    us = list(us)
    if len(us) < 2:
        raise ValueError("need at least two nodes")
    if len(set(us)) != len(us):
        raise DuplicateNode("nodes must be pairwise distinct")
    if any(u == 0 for u in us):
        raise ValueError("nodes must be nonzero")
    if _exact(*us):
        us = [Fraction(u) for u in us]
    n = len(us)
    out = []
    for k, uk in enumerate(us):
        den = 1
        for i, ui in enumerate(us):
            if i != k:
                den = den * (uk - ui)
        out.append(uk ** (n - 1) / den)
    return out


def multi_mp_triplet(us):
    ts = multi_mp_weights(us)
    atoms = tuple(zip(us, ts))
    return FreeTriplet(0, SignedMeasure(atoms), _drift(atoms))


@dataclass
class TripletClass:
    gaussian_negative: bool
    classical_excluded: bool
    plain_fid: bool

    def to_json(self):
        return {"gaussian_negative": self.gaussian_negative,
                "classical_excluded": self.classical_excluded,
                "plain_fid": self.plain_fid}


def classify_triplet(t):
    """Flags telling whether a free triplet can also be a classical one.

    ``gaussian_negative``: ``a < 0``.  ``classical_excluded``: the negative part
    of ``nu`` is nonzero while the positive part is zero or a single atom.
    ``plain_fid``: ``a >= 0`` and ``nu >= 0``.
    """
    pos, neg = hahn_jordan(t.nu)
    one_point = len(pos.atoms) == 1 and not pos.terms
    excl = (not neg.is_zero) and (pos.is_zero or one_point)
    return TripletClass(bool(t.a < 0), bool(excl), bool(t.a >= 0 and neg.is_zero))


def pair_of(model):
    return triplet_to_pair(model.triplet())
