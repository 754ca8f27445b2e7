"""Pairs ``(c, nu)`` whose triplet ``(0, c/(pi x^2) dx - nu, 0)`` is classical
and/or free, and the extended Bercovici-Pata map built on them.

Membership is certified only through sufficient criteria; everything else
is reported as ``"unknown"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize

from .errors import NotCertified, ValidityError
from .families import ImplicitPhi
from .kernels import CauchyLevyTail
from .measures import FreeTriplet, SignedMeasure, moment
from .transforms import (Const, DensityGrid, RationalMP, TripletR, r_from_triplet,
                         stieltjes_density)

# relative slack for threshold comparisons that hold with equality on
# the critical two-point family (c = 4 lam sqrt(p) = sqrt(8 m2))
REL_SLACK = 1e-12


@dataclass(frozen=True)
class PhiPair:
    c: float
    nu: SignedMeasure = field(default_factory=SignedMeasure)

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.nu.symmetric:
            raise ValueError("nu must be symmetric")

    @classmethod
    def two_point(cls, c, p, lam):
        """``nu = p (delta_{-lam} + delta_lam)``."""
        return cls(c, SignedMeasure(((-lam, p), (lam, p))))

    @classmethod
    def critical(cls, p, lam):
        """The instance ``c = 4 lam sqrt(p)``."""
        return cls.two_point(4 * lam * math.sqrt(p), p, lam)

    def __add__(self, other):
        return PhiPair(self.c + other.c, self.nu + other.nu)

    def free_triplet(self):
        return FreeTriplet(0.0, SignedMeasure.kernel(CauchyLevyTail(), self.c) - self.nu, 0.0)

    def two_point_params(self):
        """``(p, lam)`` if ``nu`` is a single symmetric pair of atoms, else None."""
        pos = [(float(x), float(w)) for x, w in self.nu.atoms if x > 0]
        if self.nu.terms or len(pos) != 1:
            return None
        return pos[0][1], pos[0][0]


def _half(nu, g):
    """``int_0^inf g(x) nu(dx)`` for symmetric ``nu``."""
    tot = 0.0
    for x, w in nu.atoms:
        if x > 0:
            tot = tot + float(w) * g(float(x))
    for c, k in nu.terms:
        tot = tot + float(c) * k.quad(g, 0.0, None)
    return tot


@dataclass
class Verdict:
    status: str
    witness: object = None

    def __post_init__(self):
        if self.status not in ("yes", "no", "unknown"):
            raise ValueError(self.status)

    def to_json(self):
        return {"status": self.status, "witness": self.witness}


@dataclass
class MembershipReport:
    in_phi: Verdict
    in_phi_plus: Verdict
    in_phi_star: Verdict
    in_phi_boxplus: Verdict

    def to_json(self):
        return {k: getattr(self, k).to_json()
                for k in ("in_phi", "in_phi_plus", "in_phi_star", "in_phi_boxplus")}


def h_threshold(p):
    """Threshold ``h(p)`` with ``c >= lam h(p)`` sufficient for classical realisability."""
    if not p > 0:
        raise ValueError("p must be positive")
    if p <= 0.25:
        return math.sqrt(2 * p * (4 * p + 1))
    return 2 * p + math.sqrt(p)


def polya_A(pair, z):
    """``A(z) = 2 int_0^inf x^2 cos(zx) nu + (-c + 2 int_0^inf x sin(zx) nu)^2``."""
    z = np.asarray(z, dtype=float)
    tp = pair.two_point_params()
    if tp is not None or pair.nu.is_zero:
        p, lam = tp if tp is not None else (0.0, 0.0)
        return 2 * p * lam ** 2 * np.cos(lam * z) + (-pair.c + 2 * p * lam * np.sin(lam * z)) ** 2

    def one(t):
        a = _half(pair.nu, lambda x: x * x * math.cos(t * x))
        b = _half(pair.nu, lambda x: x * math.sin(t * x))
        return 2 * a + (-pair.c + 2 * b) ** 2

    return np.vectorize(one, otypes=[float])(z)


def mu_star_cf(pair, z):
    """``exp(-c|z| + 2 int_0^inf (1 - cos zx) nu(dx))``."""
    z = np.asarray(z, dtype=float)
    expo = -pair.c * np.abs(z)
    for x, w in pair.nu.atoms:
        if x > 0:
            expo = expo + 2 * float(w) * (1 - np.cos(z * float(x)))
    if pair.nu.terms:
        extra = np.vectorize(lambda t: 2 * _half(SignedMeasure((), pair.nu.terms),
                                                 lambda x: 1 - math.cos(t * x)),
                             otypes=[float])(z)
        expo = expo + extra
    return np.exp(expo)


def mu_box_r(pair, z):
    """``-c i z - 2 int_0^inf x^2 z^2 / (1 - x^2 z^2) nu(dx)`` on ``Im z < 0``."""
    return r_from_triplet(pair.free_triplet(), z)


def mu_box_phi(pair):
    """Voiculescu transform of ``mu^boxplus(c, nu)`` as an expression tree."""
    if pair.nu.terms:
        return TripletR(pair.free_triplet())
    expr = Const(-1j * pair.c)
    for x, w in pair.nu.atoms:
        if x > 0:
            expr = expr - RationalMP(float(x), float(w)) - RationalMP(-float(x), float(w))
    return expr


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _check_phi(nu):
    if not nu.is_nonnegative():
        return Verdict("no", "nu is not nonnegative")
    for _, k in nu.terms:
        if k.contains_origin() and k.singularity >= 2:
            return Verdict("no", f"int |x| nu diverges at 0 ({k.kind})")
        if k.decay <= 3:
            return Verdict("no", f"int x^2 nu diverges at infinity ({k.kind})")
    return Verdict("yes", "integrability of x^2 v |x|")


def _check_plus(pair):
    if pair.nu.atoms:
        x, _ = pair.nu.atoms[-1]
        return Verdict("no", f"atom at {float(x)}")
    if pair.nu.is_zero:
        return Verdict("yes", "nu = 0")
    xs = np.concatenate([np.geomspace(1e-6, 1e4, 4001), -np.geomspace(1e-6, 1e4, 4001)])
    gap = pair.c / (math.pi * xs * xs) - pair.nu.density(xs)
    i = int(np.argmin(gap))
    if gap[i] < 0:
        return Verdict("no", f"c/(pi x^2) - nu < 0 at x = {xs[i]}")
    return Verdict("yes", "c/(pi x^2) - nu >= 0 on a sampled grid")


def _periodic_min_A(pair, p, lam):
    """Minimum of ``A`` over one period ``2 pi/lam``: grid search plus local refinement."""
    period = 2 * math.pi / lam
    zs = np.linspace(0.0, period, 20001)
    vals = polya_A(pair, zs)
    i = int(np.argmin(vals))
    lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, zs.size - 1)]
    res = optimize.minimize_scalar(lambda t: float(polya_A(pair, t)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-14})
    return min(float(vals[i]), float(res.fun)), float(res.x)


def _check_star(pair, plus):
    if plus.status == "yes":
        return Verdict("yes", "c/(pi x^2) - nu is a Levy measure")
    if pair.nu.is_zero:
        return Verdict("yes", "pure Cauchy")
    tp = pair.two_point_params()
    if tp is None:
        return Verdict("unknown", "no sufficient criterion applies")
    p, lam = tp
    thr = lam * h_threshold(p)
    if pair.c >= thr * (1 - REL_SLACK):
        return Verdict("yes", f"c = {pair.c} >= lam h(p) = {thr}")
    amin, zmin = _periodic_min_A(pair, p, lam)
    if amin > 0:
        return Verdict("yes", f"A(z) > 0 over a full period (min {amin:.3g})")
    return Verdict("unknown", f"c < lam h(p) = {thr}; A({zmin:.6g}) = {amin:.3g} < 0")


def _check_boxplus(pair, plus):
    if plus.status == "yes":
        return Verdict("yes", "c/(pi x^2) - nu is a Levy measure")
    m2 = float(moment(pair.nu, 2))
    thr = math.sqrt(8 * m2)
    if pair.c >= thr * (1 - REL_SLACK):
        return Verdict("yes", f"c = {pair.c} >= sqrt(8 m2) = {thr}")
    return Verdict("unknown", f"c < sqrt(8 m2) = {thr}")


def classify(pair):
    """Membership of ``pair`` in the four classes.

    ``"yes"`` is returned only when a sufficient criterion is met; the
    witness names it.  Failing a sufficient criterion gives ``"unknown"``.
    """
    phi = _check_phi(pair.nu)
    if phi.status != "yes":
        no = Verdict("no", "not in the base class")
        return MembershipReport(phi, no, no, no)
    plus = _check_plus(pair)
    return MembershipReport(phi, plus, _check_star(pair, plus), _check_boxplus(pair, plus))


def add_pairs(p1, p2):
    """Sum of two certified pairs, certified by closure under addition."""
    out = p1 + p2
    rep = classify(out)
    r1, r2 = classify(p1), classify(p2)
    for attr in ("in_phi_star", "in_phi_boxplus"):
        if getattr(rep, attr).status != "yes" and getattr(r1, attr).status == "yes" \
                and getattr(r2, attr).status == "yes":
            setattr(rep, attr, Verdict("yes", "closure: sum of certified pairs"))
    return out, rep


def _require(pair, attr, report=None):
    rep = report or classify(pair)
    v = getattr(rep, attr)
    if v.status != "yes":
        raise NotCertified(f"{attr} not established: {v.witness}")
    return rep


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def _star_cutoff(pair, eps=1e-14):
    total = _half(pair.nu, lambda x: 1.0)
    return (4 * total + math.log(1 / eps)) / pair.c


def mu_star_density(pair, xs, *, report=None):
    """Density of ``mu^*(c, nu)`` by Fourier cosine inversion.

    The Cauchy factor ``exp(-c|z|)`` is inverted in closed form and the
    remainder ``phi(z) - exp(-cz)`` with QUADPACK's oscillatory rule
    (weight ``cos``) on ``[0, Z]``, where ``Z`` makes the envelope
    ``exp(-cZ + 4 nu((0, inf)))`` negligible.

    Raises
    ------
    NotCertified
        If classical realisability of the pair is not established.
    """
    _require(pair, "in_phi_star", report)
    xs = np.asarray(xs, dtype=float)
    Z = _star_cutoff(pair)

    def rem(z):
        return float(mu_star_cf(pair, z)) - math.exp(-pair.c * z)

    fs, errs = np.empty_like(xs), np.empty_like(xs)
    for i, x in enumerate(xs):
        if pair.nu.is_zero:
            v, e = 0.0, 0.0
        else:
            v, e = sp_integrate.quad(rem, 0.0, Z, weight="cos", wvar=float(x), limit=400,
                                     epsabs=1e-13)
        fs[i] = pair.c / (math.pi * (x * x + pair.c ** 2)) + v / math.pi
        errs[i] = abs(e) / math.pi
    zs = np.linspace(0.0, Z, 4001)
    d2 = np.diff(mu_star_cf(pair, zs), 2)
    meta = {"side": "star", "cutoff": Z, "convex_on_grid": bool(np.all(d2 >= -1e-15))}
    return DensityGrid(xs, fs, (), errs, meta)


def mu_box_density(pair, xs, y_levels=(1e-4, 5e-5, 2.5e-5), *, report=None):
    """Density of ``mu^boxplus(c, nu)`` by inverting ``K`` and Stieltjes inversion.

    Raises
    ------
    NotCertified
        If free realisability of the pair is not established.
    """
    _require(pair, "in_phi_boxplus", report)
    model = ImplicitPhi(mu_box_phi(pair), "mu_box")
    g = stieltjes_density(model, xs, y_levels)
    return DensityGrid(g.xs, g.fs, g.y_levels, g.est_error, {"side": "box"})


def grid_mass(grid, c):
    """Trapezoid mass of a density grid plus the ``c/(pi x^2)`` tail beyond its ends."""
    xs, fs = grid.xs, grid.fs
    body = float(np.trapezoid(fs, xs)) if hasattr(np, "trapezoid") else float(np.trapz(fs, xs))
    return body + c / (math.pi * abs(xs[0])) + c / (math.pi * abs(xs[-1]))


# ---------------------------------------------------------------------------
# extended Bercovici-Pata map
# ---------------------------------------------------------------------------

def classical_exponent(t, z):
    """``log`` of the classical characteristic function with triplet ``t``.

    ``-a z^2/2 + i gamma z + int (e^{izx} - 1 - izx 1_{[-1,1]}) nu(dx)``.
    """
    z = np.asarray(z, dtype=float)
    out = -0.5 * float(t.a) * z * z + 1j * float(t.gamma) * z
    for x, w in t.nu.atoms:
        x, w = float(x), float(w)
        comp = x if abs(x) <= 1 else 0.0
        out = out + w * (np.exp(1j * z * x) - 1 - 1j * z * comp)
    for c, k in t.nu.terms:
        if isinstance(k, CauchyLevyTail):
            out = out - float(c) * np.abs(z)
            continue

        def one(s, k=k):
            return k.quad_complex(lambda x: np.exp(1j * s * x) - 1 - 1j * s * x * (abs(x) <= 1))

        out = out + float(c) * np.vectorize(one, otypes=[complex])(z)
    return out


def _sum_triplets(t1, t2):
    return FreeTriplet(t1.a + t2.a, t1.nu + t2.nu, t1.gamma + t2.gamma)


@dataclass(frozen=True)
class ClassicalSide:
    """``mu * mu^*(c, nu)`` given by its characteristic function."""

    triplet: FreeTriplet
    pair: PhiPair

    def log_cf(self, z):
        return classical_exponent(self.triplet, z) + np.log(mu_star_cf(self.pair, z))

    def cf(self, z):
        return np.exp(self.log_cf(z))

    def compose(self, other):
        return ClassicalSide(_sum_triplets(self.triplet, other.triplet), self.pair + other.pair)


@dataclass(frozen=True)
class FreeSide:
    """``Lambda(mu) boxplus mu^boxplus(c, nu)`` given by its R-transform."""

    triplet: FreeTriplet
    pair: PhiPair

    def r(self, z):
        return r_from_triplet(self.triplet, z) + mu_box_r(self.pair, z)

    def phi(self):
        return TripletR(self.triplet) + mu_box_phi(self.pair)

    def compose(self, other):
        return FreeSide(_sum_triplets(self.triplet, other.triplet), self.pair + other.pair)


def extended_bp(mu_triplet, pair, *, report=None):
    """Images of ``mu * mu^*(c, nu)`` on both sides of the extended bijection.

    Parameters
    ----------
    mu_triplet : FreeTriplet
        Triplet of an ordinary infinitely divisible law (``a >= 0``, ``nu >= 0``).
    pair : PhiPair
        Must be certified both classically and freely.

    Returns
    -------
    (ClassicalSide, FreeSide)
    """
    if mu_triplet.a < 0 or not mu_triplet.nu.is_nonnegative():
        raise ValidityError("extended_bp needs an infinitely divisible triplet")
    rep = report or classify(pair)
    _require(pair, "in_phi_star", rep)
    _require(pair, "in_phi_boxplus", rep)
    return ClassicalSide(mu_triplet, pair), FreeSide(mu_triplet, pair)
