"""Signed measures, quasi-Levy measures, free characteristic pairs and triplets.

A :class:`SignedMeasure` is a finite list of atoms plus a finite list of
density terms ``coef * kernel``.  Values are canonicalised on construction
(sorted atoms, merged duplicates, zero weights dropped) so that equality of
two measures is a structural comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real

import numpy as np

from . import _quad
from .errors import (DivergentMoment, NonIntegrable, NonIntegrableCorrection,
                     SingularWindow)
from .kernels import (DensityKernel, PositivePart, kernel_from_json, probe_points,
                      sign_changes, total_pdf, weighted)

INF = math.inf


def _is_zero(v):
    return v == 0


def _canon_atoms(atoms):
    merged = {}
    for x, w in atoms:
        merged[x] = merged.get(x, 0) + w
    return tuple(sorted(((x, w) for x, w in merged.items() if not _is_zero(w)), key=lambda t: float(t[0])))


def _canon_terms(terms):
    merged = {}
    order = []
    for c, k in terms:
        if not isinstance(k, DensityKernel):
            raise TypeError("density terms must carry a DensityKernel")
        if k not in merged:
            order.append(k)
            merged[k] = 0
        merged[k] = merged[k] + c
    out = [(merged[k], k) for k in order if not _is_zero(merged[k])]
    out.sort(key=lambda t: repr(t[1]))
    return tuple(out)


@dataclass(frozen=True)
class SignedMeasure:
    """Atoms ``(position, weight)`` plus density terms ``(coefficient, kernel)``.

    ``meta`` carries bookkeeping such as truncation bounds and does not
    take part in equality.
    """

    atoms: tuple = ()
    terms: tuple = ()
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canon_atoms(self.atoms))
        object.__setattr__(self, "terms", _canon_terms(self.terms))

    # -- construction helpers --------------------------------------------
    @classmethod
    def dirac(cls, x, w=1):
        return cls(atoms=((x, w),))

    @classmethod
    def kernel(cls, kernel, coef=1.0):
        return cls(terms=((coef, kernel),))

    def __add__(self, other):
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return SignedMeasure(self.atoms + other.atoms, self.terms + other.terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return self + (-other)

    def scale(self, s):
        return SignedMeasure(tuple((x, s * w) for x, w in self.atoms),
                             tuple((s * c, k) for c, k in self.terms), dict(self.meta))

    def __mul__(self, s):
        if not isinstance(s, Real):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    # -- queries ---------------------------------------------------------
    @property
    def is_zero(self):
        return not self.atoms and not self.terms

    def atom_weight(self, x):
        for pos, w in self.atoms:
            if pos == x:
                return w
        return 0

    def density(self, x):
        if not self.terms:
            return np.zeros_like(np.asarray(x, dtype=float))
        return total_pdf(self.terms, x)

    @property
    def singularity(self):
        return max((k.singularity for _, k in self.terms if k.contains_origin()), default=0.0)

    @property
    def decay(self):
        return min((k.decay for _, k in self.terms), default=INF)

    @property
    def symmetric(self):
        amap = dict(self.atoms)
        atoms_ok = all(amap.get(-x, None) == w for x, w in self.atoms)
        return atoms_ok and all(k.symmetric for _, k in self.terms)

    def finite(self):
        return all(k.finite_mass() for _, k in self.terms)

    def mass(self):
        """``nu(R)``; requires finite total variation."""
        tot = sum((w for _, w in self.atoms), 0)
        for c, k in self.terms:
            tot = tot + c * k.mass
        return tot

    def is_nonnegative(self):
        pos, neg = hahn_jordan(self)
        return neg.is_zero


# ---------------------------------------------------------------------------
# Hahn-Jordan split and total variation
# ---------------------------------------------------------------------------

def _density_sign(terms):
    """+1, -1 or 0 (mixed) for the pointwise sign of the total density."""
    if all(c > 0 and k.nonnegative for c, k in terms):
        return 1
    if all(c < 0 and k.nonnegative for c, k in terms):
        return -1
    xs = probe_points(terms)
    vals = total_pdf(terms, xs)
    vals = vals[np.isfinite(vals)]
    # median scale: probes next to a 1/x^2 singularity would swamp a max
    scale = float(np.median(np.abs(vals))) if vals.size else 0.0
    tiny = 1e-14 * scale
    if np.all(vals >= -tiny):
        return 1
    if np.all(vals <= tiny):
        return -1
    return 0


def hahn_jordan(nu):
    """Split ``nu`` into nonnegative parts ``(nu_plus, nu_minus)``.

    Atoms are split by the sign of their weights.  Density terms are split
    by the sign of the pointwise total density; when the sign changes the
    parts are returned as :class:`~freeqid.kernels.PositivePart` kernels.

    Examples
    --------
    >>> nu = SignedMeasure.dirac(1.0) - SignedMeasure.dirac(2.0)
    >>> [m.atoms for m in hahn_jordan(nu)]
    [((1.0, 1),), ((2.0, 1),)]
    """
    pa = tuple((x, w) for x, w in nu.atoms if w > 0)
    na = tuple((x, -w) for x, w in nu.atoms if w < 0)
    pt, nt = (), ()
    if nu.terms:
        s = _density_sign(nu.terms)
        if s == 1:
            pt = nu.terms
        elif s == -1:
            nt = tuple((-c, k) for c, k in nu.terms)
        else:
            pt = ((1.0, PositivePart(nu.terms, 1)),)
            nt = ((1.0, PositivePart(nu.terms, -1)),)
    return SignedMeasure(pa, pt), SignedMeasure(na, nt)


def total_variation(nu, window=(-INF, INF), *, epsabs=_quad.ABS_TOL):
    """``|nu|(window)`` for a closed window ``[lo, hi]``.

    Raises
    ------
    SingularWindow
        If the window contains the origin and some density term has a
        non-integrable singularity there.
    """
    lo, hi = window
    tv = sum((abs(w) for x, w in nu.atoms if lo <= x <= hi), 0)
    if not nu.terms:
        return tv
    tv = float(tv)
    if lo <= 0.0 <= hi and nu.singularity >= 1:
        raise SingularWindow("window touches the non-integrable singularity at 0")
    brk = set(sign_changes(nu.terms))
    sing = set()
    for _, k in nu.terms:
        brk.update(k.breaks)
        sing.update(k.edges)
        if k.singularity > 0:
            sing.add(0.0)
    val, _ = _quad.integrate(lambda x: abs(float(total_pdf(nu.terms, x))), lo, hi,
                             singular=sing, breaks=brk, epsabs=epsabs)
    return tv + val


def moment(m, n):
    """``int x**n m(dx)``; exact on atoms (rationals stay rational).

    Raises
    ------
    DivergentMoment
        When a density term's behaviour at 0 or at infinity makes
        ``int |x|**n |m|(dx)`` infinite.
    """
    n = int(n)
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    tot = sum((w * x ** n for x, w in m.atoms), 0)
    for c, k in m.terms:
        if k.contains_origin() and n - k.singularity <= -1:
            raise DivergentMoment(f"order {n} diverges at 0 for {k.kind}")
        lo, hi = k.support
        if not (math.isfinite(lo) and math.isfinite(hi)) and n - k.decay >= -1:
            raise DivergentMoment(f"order {n} diverges at infinity for {k.kind}")
        tot = tot + c * k.quad(lambda x: x ** n)
    return tot


# ---------------------------------------------------------------------------
# Quasi-Levy measures, pairs, triplets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuasiLevyMeasure:
    """A signed measure verified to be of quasi-Levy type.

    ``integral`` stores ``int (1 ^ x^2) |nu|(dx)``.
    """

    underlying: SignedMeasure
    integral: float = float("nan")

    @classmethod
    def check(cls, nu, tol=1e-8):
        return cls(nu, quasi_levy_integral(nu, tol))


def quasi_levy_integral(nu, tol=1e-8):
    """``int (1 ^ x^2) |nu|(dx)``, raising :class:`NonIntegrable` if infinite."""
    if any(x == 0 for x, _ in nu.atoms):
        raise NonIntegrable("quasi-Levy measure has an atom at 0")
    for _, k in nu.terms:
        if k.contains_origin() and k.singularity >= 3:
            raise NonIntegrable(f"{k.kind} density is too singular at 0 (order {k.singularity})")
        lo, hi = k.support
        if not (math.isfinite(lo) and math.isfinite(hi)) and k.decay <= 1:
            raise NonIntegrable(f"{k.kind} density has a non-integrable tail")
    val = sum(min(1.0, float(x) ** 2) * abs(float(w)) for x, w in nu.atoms)
    if nu.terms:
        brk = set(sign_changes(nu.terms)) | {-1.0, 1.0}
        sing = set()
        for _, k in nu.terms:
            brk.update(k.breaks)
            sing.update(k.edges)
            if k.singularity > 0:
                sing.add(0.0)

        def f(x):
            return min(1.0, x * x) * abs(float(total_pdf(nu.terms, x)))

        v, err = _quad.integrate(f, -INF, INF, singular=sing, breaks=brk, epsabs=tol * 1e-2)
        if not math.isfinite(v) or err > max(tol, tol * abs(v)) * 1e3:
            raise NonIntegrable("quasi-Levy integral did not converge")
        val += v
    return val


@dataclass(frozen=True)
class FreeCharPair:
    """``(b, tau)`` with ``phi(z) = b + int (1 + x z) / (z - x) tau(dx)``."""

    b: float
    tau: SignedMeasure

    def __post_init__(self):
        if not self.tau.finite():
            raise ValueError("free characteristic pair needs a finite signed measure tau")


@dataclass(frozen=True)
class FreeTriplet:
    """``(a, nu, gamma)``; the Gaussian part ``a`` may be negative."""

    a: float
    nu: SignedMeasure
    gamma: float

    def __post_init__(self):
        if any(x == 0 for x, _ in self.nu.atoms):
            raise NonIntegrable("quasi-Levy measure has an atom at 0")

    def levy(self, tol=1e-8):
        return QuasiLevyMeasure.check(self.nu, tol)


def pair_to_triplet(p):
    """Convert ``(b, tau)`` to ``(a, nu, gamma)``.

    ``a = tau({0})``, ``nu = (1 + x^2)/x^2 tau`` off the origin and
    ``gamma = b + int x (1_{[-1,1]} - 1/(1+x^2)) nu(dx)``.
    """
    tau = p.tau
    a = tau.atom_weight(0)
    atoms = tuple((x, w * (1 + x * x) / (x * x)) for x, w in tau.atoms if x != 0)
    terms = tuple((c, weighted(k, -2, 1)) for c, k in tau.terms)
    gamma = p.b
    for x, w in tau.atoms:
        if x == 0:
            continue
        gamma = gamma + (x * w if abs(x) <= 1 else -w / x)
    try:
        for c, k in tau.terms:
            gamma = gamma + c * k.odd_drift()
    except NonIntegrable as exc:
        raise NonIntegrableCorrection(str(exc)) from exc
    return FreeTriplet(a, SignedMeasure(atoms, terms), gamma)


def triplet_to_pair(t):
    """Inverse of :func:`pair_to_triplet`."""
    nu = t.nu
    atoms = [(x, w * x * x / (1 + x * x)) for x, w in nu.atoms]
    if t.a != 0:
        atoms.append((0, t.a))
    terms = tuple((c, weighted(k, 2, -1)) for c, k in nu.terms)
    corr = 0
    for x, w in nu.atoms:
        corr = corr + (w * x ** 3 / (1 + x * x) if abs(x) <= 1 else -w * x / (1 + x * x))
    try:
        for c, k in nu.terms:
            corr = corr + c * k.levy_drift()
    except NonIntegrable as exc:
        raise NonIntegrableCorrection(str(exc)) from exc
    return FreeCharPair(t.gamma - corr, SignedMeasure(tuple(atoms), terms))


# ---------------------------------------------------------------------------
# comparison and JSON
# ---------------------------------------------------------------------------

def measures_close(m1, m2, tol=1e-10):
    """Structural closeness: same kernels and atom positions, weights within tol."""
    if len(m1.atoms) != len(m2.atoms) or len(m1.terms) != len(m2.terms):
        return False
    for (x1, w1), (x2, w2) in zip(m1.atoms, m2.atoms):
        if abs(float(x1) - float(x2)) > tol or abs(float(w1) - float(w2)) > tol:
            return False
    d2 = {k: c for c, k in m2.terms}
    for c, k in m1.terms:
        if k not in d2 or abs(float(c) - float(d2[k])) > tol:
            return False
    return True


def measure_to_json(m):
    out = {"atoms": [[float(x), float(w)] for x, w in m.atoms],
           "densities": [[float(c), k.to_json()] for c, k in m.terms]}
    if m.meta:
        out["meta"] = {k: (float(v) if isinstance(v, Real) else v) for k, v in m.meta.items()}
    return out


def measure_from_json(obj):
    atoms = tuple((float(x), float(w)) for x, w in obj.get("atoms", []))
    terms = tuple((float(c), kernel_from_json(k)) for c, k in obj.get("densities", []))
    return SignedMeasure(atoms, terms, dict(obj.get("meta", {})))


def pair_to_json(p):
    return {"type": "pair", "b": float(p.b), "tau": measure_to_json(p.tau)}


def triplet_to_json(t):
    return {"type": "triplet", "a": float(t.a), "nu": measure_to_json(t.nu), "gamma": float(t.gamma)}


def from_json(obj):
    kind = obj.get("type")
    if kind == "pair":
        return FreeCharPair(float(obj["b"]), measure_from_json(obj["tau"]))
    if kind == "triplet":
        return FreeTriplet(float(obj["a"]), measure_from_json(obj["nu"]), float(obj["gamma"]))
    return measure_from_json(obj)
