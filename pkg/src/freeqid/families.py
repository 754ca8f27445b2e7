"""Closed-form laws with their transforms, pairs and triplets.

Every model is a frozen dataclass exposing ``cauchy(z)`` (vectorised on
the upper half-plane), ``phi()`` (a :class:`~freeqid.transforms.PhiExpression`),
``density(x)``, ``atoms()``, ``pair()`` and ``triplet()`` where these exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import NoClosedForm, Unsupported
from .kernels import (CauchyLevyTail, PoissonKernel, SemicircleArc, free_meixner_atoms,
                      free_meixner_cauchy, semicircle_cauchy, weighted)
from .measures import FreeCharPair, FreeTriplet, SignedMeasure, triplet_to_pair, pair_to_triplet
from .transforms import (Const, Pole, PairIntegral, RationalMP, dilate_phi, invert_k,
                         stieltjes_density)


class DistributionModel:
    """Common interface; subclasses override what they know in closed form."""

    name = "model"

    def cauchy(self, z):
        return 1.0 / self.f_transform(z)

    def f_transform(self, z):
        return 1.0 / self.cauchy(z)

    def phi(self):
        raise NoClosedForm(f"{self.name} has no Voiculescu transform in closed form")

    def atoms(self):
        return []

    def density(self, x):
        """Density of the absolutely continuous part (Stieltjes inversion by default)."""
        x = np.asarray(x, dtype=float)
        return stieltjes_density(self, np.atleast_1d(x)).fs.reshape(x.shape)

    def triplet(self):
        return pair_to_triplet(self.pair())

    def pair(self):
        return triplet_to_pair(self.triplet())

    pick_exact = None


def _zero_outside(x, lo, hi, vals):
    return np.where((x > lo) & (x < hi), vals, 0.0)


@dataclass(frozen=True)
class Cauchy(DistributionModel):
    a: float = 1.0
    name = "cauchy"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("Cauchy scale must be positive")

    def cauchy(self, z):
        return 1.0 / (np.asarray(z, dtype=complex) + 1j * self.a)

    def phi(self):
        return Const(-1j * self.a)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.a / (math.pi * (x * x + self.a * self.a))

    def triplet(self):
        return FreeTriplet(0.0, SignedMeasure.kernel(CauchyLevyTail(), self.a), 0.0)

    def pair(self):
        return FreeCharPair(0.0, SignedMeasure.kernel(PoissonKernel(1.0), self.a))


@dataclass(frozen=True)
class Semicircle(DistributionModel):
    m: float = 0.0
    s2: float = 1.0
    name = "semicircle"

    def __post_init__(self):
        if not self.s2 > 0:
            raise ValueError("semicircle variance must be positive")

    def cauchy(self, z):
        return semicircle_cauchy(z, self.m, self.s2)

    def phi(self):
        if self.m == 0:
            return Pole(self.s2)
        return Const(complex(self.m)) + Pole(self.s2)

    def density(self, x):
        return SemicircleArc(self.m, self.s2).pdf(x)

    def triplet(self):
        return FreeTriplet(self.s2, SignedMeasure(), self.m)

    def pair(self):
        return FreeCharPair(self.m, SignedMeasure.dirac(0.0, self.s2))


@dataclass(frozen=True)
class MP(DistributionModel):
    """Marchenko-Pastur law of rate ``lam`` dilated by ``c``: ``phi = lam c z/(z - c)``."""

    c: float = 1.0
    lam: float = 1.0
    name = "mp"

    def __post_init__(self):
        if self.c == 0 or not self.lam > 0:
            raise ValueError("MP needs c != 0 and lam > 0")

    @property
    def edges(self):
        r1 = self.c * (1 - math.sqrt(self.lam)) ** 2
        r2 = self.c * (1 + math.sqrt(self.lam)) ** 2
        return tuple(sorted((r1, r2)))

    def f_transform(self, z):
        z = np.asarray(z, dtype=complex)
        r1, r2 = self.edges
        root = np.sqrt(z - r1) * np.sqrt(z - r2)
        return 0.5 * (z + self.c * (1 - self.lam) + root)

    def cauchy(self, z):
        return 1.0 / self.f_transform(z)

    def phi(self):
        return RationalMP(self.c, self.lam)

    def atoms(self):
        return [(0.0, 1.0 - self.lam)] if self.lam < 1 else []

    def density(self, x):
        # MP(lam) density sqrt((b - t)(t - a)) / (2 pi t), dilated by c
        x = np.asarray(x, dtype=float)
        t = x / self.c
        lo, hi = (1 - math.sqrt(self.lam)) ** 2, (1 + math.sqrt(self.lam)) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.sqrt(np.maximum((hi - t) * (t - lo), 0.0)) / (2 * math.pi * t)
        return _zero_outside(t, lo, hi, v) / abs(self.c)

    def triplet(self):
        gamma = self.lam * self.c if abs(self.c) <= 1 else 0.0
        return FreeTriplet(0.0, SignedMeasure.dirac(self.c, self.lam), gamma)


@dataclass(frozen=True)
class FreeMeixner(DistributionModel):
    a: float = 0.0
    b: float = 0.0
    name = "free_meixner"

    def __post_init__(self):
        if not self.b >= -1:
            raise ValueError("free Meixner needs b >= -1")

    @property
    def support(self):
        r = 2 * math.sqrt(1 + self.b)
        return (self.a - r, self.a + r)

    def cauchy(self, z):
        return free_meixner_cauchy(z, self.a, self.b)

    def phi(self):
        return PairIntegral(self.pair())

    def atoms(self):
        return fm_atoms(self.a, self.b)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.b == -1:
            return np.zeros_like(x)
        lo, hi = self.support
        v = np.maximum(4 * (1 + self.b) - (x - self.a) ** 2, 0.0)
        den = 2 * math.pi * (self.b * x * x + self.a * x + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sqrt(v) / den
        return _zero_outside(x, lo, hi, out)

    def pair(self):
        # phi equals the Cauchy transform of the semicircle with mean a, variance b
        if self.b < 0:
            raise NoClosedForm("free Meixner laws with b < 0 are not FQID")
        if self.b == 0:
            w = 1.0 / (1 + self.a * self.a)
            return FreeCharPair(-self.a * w, SignedMeasure.dirac(self.a, w))
        k = weighted(SemicircleArc(self.a, self.b), 0, -1)
        return FreeCharPair(-k._moments_pair[1], SignedMeasure.kernel(k))


def fm_atoms(a, b):
    """Atoms of the free Meixner law FM_{a,b}.

    ``b = -1`` gives the two-point law; for ``b >= 0`` atoms are located by
    residues of the Cauchy transform (experimental).  ``-1 < b < 0`` is not
    enumerated.
    """
    if b == -1:
        s = math.sqrt(4 + a * a)
        return [((a - s) / 2, 0.5 * (1 + a / s)), ((a + s) / 2, 0.5 * (1 - a / s))]
    if -1 < b < 0:
        raise Unsupported("atoms of FM_{a,b} for -1 < b < 0 are not enumerated")
    return free_meixner_atoms(a, b)


@dataclass(frozen=True)
class PointMass(DistributionModel):
    x: float = 0.0
    name = "point"

    def cauchy(self, z):
        return 1.0 / (np.asarray(z, dtype=complex) - self.x)

    def phi(self):
        return Const(complex(self.x))

    def atoms(self):
        return [(self.x, 1.0)]

    def density(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def triplet(self):
        return FreeTriplet(0.0, SignedMeasure(), self.x)

    def pair(self):
        return FreeCharPair(self.x, SignedMeasure())


@dataclass(frozen=True)
class TwoPoint(DistributionModel):
    """``p delta_{x1} + (1 - p) delta_{x2}``; not FQID for 0 < p < 1."""

    p: float = 0.5
    x1: float = 0.0
    x2: float = 1.0
    name = "two_point"

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        return self.p / (z - self.x1) + (1 - self.p) / (z - self.x2)

    def atoms(self):
        return [(self.x1, self.p), (self.x2, 1 - self.p)]

    def density(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def triplet(self):
        raise NoClosedForm("two-point laws are not FQID")

    def pair(self):
        raise NoClosedForm("two-point laws are not FQID")


@dataclass(frozen=True)
class Dilation(DistributionModel):
    c: float
    model: DistributionModel
    name = "dilation"

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("dilation factor must be nonzero")

    def cauchy(self, z):
        w = np.asarray(z, dtype=complex) / self.c
        if self.c > 0:
            return self.model.cauchy(w) / self.c
        return np.conj(self.model.cauchy(np.conj(w))) / self.c

    def phi(self):
        return dilate_phi(self.c, self.model.phi())

    def atoms(self):
        return [(self.c * x, w) for x, w in self.model.atoms()]

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.model.density(x / self.c) / abs(self.c)

    def triplet(self):
        t = self.model.triplet()
        c = self.c
        atoms = tuple((c * x, w) for x, w in t.nu.atoms)
        terms = []
        for coef, k in t.nu.terms:
            if isinstance(k, CauchyLevyTail):
                terms.append((coef * abs(c), k))
            else:
                raise NoClosedForm("dilation of this Levy density is not tabulated")
        # R_D(z) = R(cz): the compensator window moves from [-1, 1] to [-|c|, |c|]
        gamma = c * t.gamma
        for y, w in atoms:
            gamma = gamma + w * y * ((abs(y) <= 1) - (abs(y) <= abs(c)))
        return FreeTriplet(c * c * t.a, SignedMeasure(atoms, tuple(terms)), gamma)


@dataclass(frozen=True)
class ImplicitPhi(DistributionModel):
    """Law defined only through its Voiculescu transform."""

    expr: object
    label: str = "implicit"
    name = "implicit"

    def f_transform(self, z):
        return invert_k(self.expr, z)

    def cauchy(self, z):
        return 1.0 / invert_k(self.expr, z)

    def phi(self):
        return self.expr


@dataclass(frozen=True)
class FreeConv(DistributionModel):
    """Free additive convolution of a tuple of models."""

    models: tuple
    name = "free_conv"

    def phi(self):
        return reduce(lambda u, v: u + v, (m.phi() for m in self.models))

    def f_transform(self, z):
        return invert_k(self.phi(), z)

    def cauchy(self, z):
        return 1.0 / invert_k(self.phi(), z)

    def triplet(self):
        ts = [m.triplet() for m in self.models]
        nu = reduce(lambda u, v: u + v, (t.nu for t in ts))
        return FreeTriplet(sum(t.a for t in ts), nu, sum(t.gamma for t in ts))

    def pair(self):
        ps = [m.pair() for m in self.models]
        tau = reduce(lambda u, v: u + v, (p.tau for p in ps))
        return FreeCharPair(sum(p.b for p in ps), tau)


def phi_of(model):
    """Voiculescu transform of a model as an expression tree."""
    return model.phi()


def density_of(model, x):
    """Density of the absolutely continuous part of ``model`` at ``x``."""
    return model.density(x)
