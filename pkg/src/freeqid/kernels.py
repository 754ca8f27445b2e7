"""Closed-form density kernels used as building blocks of signed measures.

A kernel is a frozen dataclass with a vectorised ``pdf`` and enough
metadata (support, breakpoints, behaviour at the origin and at infinity)
for the quadrature layer to integrate it safely.  Kernels that admit
closed-form Cauchy transforms or Levy-Khintchine kernel integrals
override the quadrature fallbacks.

Only the origin can be a singular point: every kernel in the library
that blows up does so at ``x = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np

from . import _quad
from .errors import NonIntegrable, Unsupported

INF = math.inf


def _csqrt(z):
    return np.sqrt(np.asarray(z, dtype=complex))


def semicircle_cauchy(z, m, s2):
    """Cauchy transform of the semicircle law with mean ``m``, variance ``s2``.

    The square root is taken as a product of two principal roots so the
    result is analytic off the support segment.  ``s2 == 0`` degenerates
    to the point mass at ``m``.
    """
    z = np.asarray(z, dtype=complex)
    if s2 == 0:
        return 1.0 / (z - m)
    sig = math.sqrt(s2)
    w = z - m
    root = _csqrt(w - 2 * sig) * _csqrt(w + 2 * sig)
    return (w - root) / (2 * s2)


def semicircle_cauchy_deriv(z, m, s2):
    z = np.asarray(z, dtype=complex)
    if s2 == 0:
        return -1.0 / (z - m) ** 2
    sig = math.sqrt(s2)
    w = z - m
    root = _csqrt(w - 2 * sig) * _csqrt(w + 2 * sig)
    return (1.0 - w / root) / (2 * s2)


def free_meixner_cauchy(z, a, b):
    """Cauchy transform of FM_{a,b}: ``1 / (z - H(z))`` with H semicircle(a, 1+b)."""
    z = np.asarray(z, dtype=complex)
    h = semicircle_cauchy(z, a, 1.0 + b)
    return 1.0 / (z - h)


def free_meixner_cauchy_deriv(z, a, b):
    z = np.asarray(z, dtype=complex)
    h = semicircle_cauchy(z, a, 1.0 + b)
    dh = semicircle_cauchy_deriv(z, a, 1.0 + b)
    return -(1.0 - dh) / (z - h) ** 2


def free_meixner_atoms(a, b):
    """Atoms of FM_{a,b} located as real poles of its Cauchy transform.

    Candidates are the real roots of ``b x**2 + a x + 1``; a candidate is an
    atom when it is a fixed point of H on the principal branch, and its
    weight is the residue ``1 / (1 - H'(r))``.
    """
    if b < -1:
        raise ValueError("free Meixner requires b >= -1")
    if b == 0:
        cands = [] if a == 0 else [-1.0 / a]
    else:
        disc = a * a - 4 * b
        if disc < 0:
            cands = []
        else:
            sq = math.sqrt(disc)
            cands = sorted({(-a - sq) / (2 * b), (-a + sq) / (2 * b)})
    lo = a - 2 * math.sqrt(1 + b)
    hi = a + 2 * math.sqrt(1 + b)
    out = []
    for r in cands:
        # an edge point carries no mass: the residue vanishes there
        if lo <= r <= hi:
            continue
        h = semicircle_cauchy(complex(r, 0.0), a, 1.0 + b)
        if abs(h - r) > 1e-9 * (1 + abs(r)):
            continue
        dh = semicircle_cauchy_deriv(complex(r, 0.0), a, 1.0 + b)
        out.append((r, float(np.real(1.0 / (1.0 - dh)))))
    return out


class DensityKernel:
    """Base class.  Subclasses are frozen dataclasses."""

    kind: ClassVar[str] = ""

    # -- metadata ---------------------------------------------------------
    @property
    def support(self):
        return (-INF, INF)

    @property
    def breaks(self):
        """Interior points where the pdf is not smooth."""
        return ()

    @property
    def edges(self):
        """Finite support endpoints with square-root type behaviour."""
        return ()

    @property
    def singularity(self):
        """Order ``s`` of a ``|x|**-s`` blow-up at the origin (0 if bounded)."""
        return 0.0

    @property
    def decay(self):
        """Tail exponent ``d`` with pdf ~ ``|x|**-d`` (``inf`` if compact)."""
        lo, hi = self.support
        return INF if math.isfinite(lo) and math.isfinite(hi) else 0.0

    @property
    def symmetric(self):
        return False

    @property
    def nonnegative(self):
        return True

    # -- evaluation -------------------------------------------------------
    def pdf(self, x):
        raise NotImplementedError

    def contains_origin(self):
        lo, hi = self.support
        return lo <= 0.0 <= hi

    def quad(self, g, lo=None, hi=None, *, epsabs=_quad.ABS_TOL):
        """``int g(x) pdf(x) dx`` over the support intersected with ``[lo, hi]``."""
        slo, shi = self.support
        lo = slo if lo is None else max(lo, slo)
        hi = shi if hi is None else min(hi, shi)
        if hi <= lo:
            return 0.0
        sing = list(self.edges)
        if self.singularity > 0 and lo <= 0.0 <= hi:
            sing.append(0.0)
        brk = list(self.breaks) + [0.0]

        def f(x):
            return float(g(x) * self.pdf(x))

        return _quad.integrate(f, lo, hi, singular=sing, breaks=brk, epsabs=epsabs)[0]

    def quad_complex(self, g, lo=None, hi=None):
        re = self.quad(lambda x: g(x).real, lo, hi)
        im = self.quad(lambda x: g(x).imag, lo, hi)
        return complex(re, im)

    def finite_mass(self):
        s_ok = not (self.contains_origin() and self.singularity >= 1)
        return s_ok and self.decay > 1

    @cached_property
    def mass(self):
        if not self.finite_mass():
            raise NonIntegrable(f"{self.kind} kernel has infinite mass")
        return self.quad(lambda x: 1.0)

    # -- transforms -------------------------------------------------------
    def cauchy(self, z):
        """``int pdf(x) / (z - x) dx``."""
        if not self.finite_mass():
            raise NonIntegrable(f"{self.kind} kernel has infinite mass")
        return _vectorize(lambda w: self.quad_complex(lambda x: 1.0 / (w - x)), z)

    def cauchy_deriv(self, z):
        if not self.finite_mass():
            raise NonIntegrable(f"{self.kind} kernel has infinite mass")
        return _vectorize(lambda w: self.quad_complex(lambda x: -1.0 / (w - x) ** 2), z)

    def pair_phi(self, z):
        """``int (1 + x z) / (z - x) pdf(x) dx`` (finite kernels only)."""
        z = np.asarray(z, dtype=complex)
        return (1 + z * z) * self.cauchy(z) - z * self.mass

    def pair_phi_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return 2 * z * self.cauchy(z) + (1 + z * z) * self.cauchy_deriv(z) - self.mass

    def r_kernel(self, z):
        """``int (1/(1 - x z) - 1 - x z 1_{[-1,1]}(x)) pdf(x) dx``."""
        def one(w):
            def g(x):
                return 1.0 / (1.0 - x * w) - 1.0 - (x * w if abs(x) <= 1 else 0.0)
            return self.quad_complex(g)
        return _vectorize(one, z)

    def r_kernel_deriv(self, z):
        def one(w):
            def g(x):
                return x / (1.0 - x * w) ** 2 - (x if abs(x) <= 1 else 0.0)
            return self.quad_complex(g)
        return _vectorize(one, z)

    def odd_drift(self):
        """``int_{[-1,1]} x pdf - int_{|x|>1} pdf / x`` (pair-to-triplet drift)."""
        if self.symmetric:
            return 0.0
        inner = self.quad(lambda x: x, -1.0, 1.0)
        outer = self.quad(lambda x: 1.0 / x, -INF, -1.0) + self.quad(lambda x: 1.0 / x, 1.0, INF)
        return inner - outer

    def levy_drift(self):
        """``int x (1_{[-1,1]} - 1/(1+x^2)) pdf`` (triplet-to-pair drift)."""
        if self.symmetric:
            return 0.0
        inner = self.quad(lambda x: x ** 3 / (1 + x * x), -1.0, 1.0)
        outer = self.quad(lambda x: -x / (1 + x * x), -INF, -1.0) + self.quad(lambda x: -x / (1 + x * x), 1.0, INF)
        return inner + outer

    def to_json(self):
        raise NotImplementedError


def _vectorize(fn, z):
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        return complex(fn(complex(arr)))
    out = np.empty(arr.shape, dtype=complex)
    for idx, w in np.ndenumerate(arr):
        out[idx] = fn(complex(w))
    return out


@dataclass(frozen=True)
class Flat(DensityKernel):
    """The constant ``1/pi`` on the line; only useful inside :class:`Weighted`."""

    kind: ClassVar[str] = "flat"

    def pdf(self, x):
        return np.full_like(np.asarray(x, dtype=float), 1.0 / math.pi)

    @property
    def symmetric(self):
        return True

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class CauchyLevyTail(DensityKernel):
    """``x -> 1/(pi x^2)``, the free Levy density of the standard Cauchy law."""

    kind: ClassVar[str] = "cauchy_levy_tail"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (math.pi * x * x)

    @property
    def singularity(self):
        return 2.0

    @property
    def decay(self):
        return 2.0

    @property
    def symmetric(self):
        return True

    def r_kernel(self, z):
        # equals -i z on the lower half-plane; Schwarz reflection above
        z = np.asarray(z, dtype=complex)
        return np.where(z.imag <= 0, -1j * z, 1j * z)

    def r_kernel_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return np.where(z.imag <= 0, -1j, 1j) + 0 * z

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class PoissonKernel(DensityKernel):
    """Cauchy density with scale ``scale``: ``scale / (pi (scale^2 + x^2))``."""

    scale: float = 1.0
    kind: ClassVar[str] = "poisson"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("PoissonKernel scale must be positive")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        s = self.scale
        return s / (math.pi * (s * s + x * x))

    @property
    def decay(self):
        return 2.0

    @property
    def symmetric(self):
        return True

    @property
    def mass(self):
        return 1.0

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        sgn = np.where(z.imag >= 0, 1.0, -1.0)
        return 1.0 / (z + 1j * self.scale * sgn)

    def cauchy_deriv(self, z):
        return -self.cauchy(z) ** 2

    def pair_phi(self, z):
        z = np.asarray(z, dtype=complex)
        s = self.scale * np.where(z.imag >= 0, 1.0, -1.0)
        return (1 - 1j * s * z) / (z + 1j * s)

    def pair_phi_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        s = self.scale * np.where(z.imag >= 0, 1.0, -1.0)
        return (s * s - 1) / (z + 1j * s) ** 2

    def to_json(self):
        return {"kind": self.kind, "scale": self.scale}


@dataclass(frozen=True)
class SemicircleArc(DensityKernel):
    """Semicircle density with mean ``m`` and variance ``s2``."""

    m: float = 0.0
    s2: float = 1.0
    kind: ClassVar[str] = "semicircle"

    def __post_init__(self):
        if not self.s2 > 0:
            raise ValueError("SemicircleArc variance must be positive")

    @property
    def support(self):
        r = 2 * math.sqrt(self.s2)
        return (self.m - r, self.m + r)

    @property
    def edges(self):
        return self.support

    @property
    def symmetric(self):
        return self.m == 0

    @property
    def mass(self):
        return 1.0

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        v = 4 * self.s2 - (x - self.m) ** 2
        return np.sqrt(np.maximum(v, 0.0)) / (2 * math.pi * self.s2)

    def cauchy(self, z):
        return semicircle_cauchy(z, self.m, self.s2)

    def cauchy_deriv(self, z):
        return semicircle_cauchy_deriv(z, self.m, self.s2)

    def to_json(self):
        return {"kind": self.kind, "m": self.m, "s2": self.s2}


@dataclass(frozen=True)
class FreeMeixnerArc(DensityKernel):
    """Absolutely continuous part of the free Meixner law FM_{a,b} (b > -1)."""

    a: float = 0.0
    b: float = 0.0
    kind: ClassVar[str] = "free_meixner"

    def __post_init__(self):
        if not self.b > -1:
            raise ValueError("FreeMeixnerArc requires b > -1")

    @property
    def support(self):
        r = 2 * math.sqrt(1 + self.b)
        return (self.a - r, self.a + r)

    @property
    def edges(self):
        return self.support

    @property
    def symmetric(self):
        return self.a == 0

    @cached_property
    def atoms(self):
        if self.b < 0:
            raise Unsupported("free Meixner atoms for -1 < b < 0 are not enumerated")
        return tuple(free_meixner_atoms(self.a, self.b))

    @property
    def mass(self):
        return 1.0 - sum(w for _, w in self.atoms)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.a, self.b
        v = np.maximum(4 * (1 + b) - (x - a) ** 2, 0.0)
        den = 2 * math.pi * (b * x * x + a * x + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(v > 0, np.sqrt(v) / den, 0.0)
        return out

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        g = free_meixner_cauchy(z, self.a, self.b)
        for r, w in self.atoms:
            g = g - w / (z - r)
        return g

    def cauchy_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        g = free_meixner_cauchy_deriv(z, self.a, self.b)
        for r, w in self.atoms:
            g = g + w / (z - r) ** 2
        return g

    def to_json(self):
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class FMQuasiLevy(DensityKernel):
    """Signed free quasi-Levy density of the Cauchy deconvolution of FM_{0,b}.

    ``(2 sqrt 2 - sqrt(4b - x^2) / (2b)) / (pi x^2)`` on ``|x| <= 2 sqrt b``
    and ``2 sqrt 2 / (pi x^2)`` outside.
    """

    b: float = 1.0
    kind: ClassVar[str] = "fm_quasi_levy"

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("FMQuasiLevy requires b > 0")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        b = self.b
        inner = np.sqrt(np.maximum(4 * b - x * x, 0.0)) / (2 * b)
        with np.errstate(divide="ignore"):
            return (2 * math.sqrt(2) - inner) / (math.pi * x * x)

    @property
    def breaks(self):
        r = 2 * math.sqrt(self.b)
        return (-r, r)

    @property
    def singularity(self):
        return 0.0 if math.isclose(self.b, 0.125, rel_tol=0, abs_tol=1e-15) else 2.0

    @property
    def decay(self):
        return 2.0

    @property
    def symmetric(self):
        return True

    @property
    def nonnegative(self):
        return self.b >= 0.125

    def r_kernel(self, z):
        # 2 sqrt2 * CauchyLevyTail - semicircle(0, b) / x^2
        z = np.asarray(z, dtype=complex)
        tail = CauchyLevyTail().r_kernel(z)
        semi = Weighted(SemicircleArc(0.0, self.b), -2, 0).r_kernel(z)
        return 2 * math.sqrt(2) * tail - semi

    def r_kernel_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        tail = CauchyLevyTail().r_kernel_deriv(z)
        semi = Weighted(SemicircleArc(0.0, self.b), -2, 0).r_kernel_deriv(z)
        return 2 * math.sqrt(2) * tail - semi

    def to_json(self):
        return {"kind": self.kind, "b": self.b}


@dataclass(frozen=True)
class PowerLaw(DensityKernel):
    """``|x|**-exponent`` restricted to ``[lo, hi]``."""

    exponent: float = 1.0
    lo: float = -1.0
    hi: float = 1.0
    kind: ClassVar[str] = "power_law"

    @property
    def support(self):
        return (self.lo, self.hi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            v = np.abs(x) ** (-self.exponent)
        return np.where((x >= self.lo) & (x <= self.hi), v, 0.0)

    @property
    def singularity(self):
        return max(self.exponent, 0.0) if self.contains_origin() else 0.0

    @property
    def decay(self):
        if math.isfinite(self.lo) and math.isfinite(self.hi):
            return INF
        return self.exponent

    @property
    def symmetric(self):
        return self.lo == -self.hi

    def to_json(self):
        return {"kind": self.kind, "exponent": self.exponent, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class NumericGrid(DensityKernel):
    """Piecewise-linear density on sampled points (zero outside)."""

    xs: tuple = ()
    fs: tuple = ()
    kind: ClassVar[str] = "numeric_grid"

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "fs", tuple(float(v) for v in self.fs))
        if len(self.xs) != len(self.fs) or len(self.xs) < 2:
            raise ValueError("NumericGrid needs matching xs/fs of length >= 2")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("NumericGrid xs must be strictly increasing")

    @property
    def support(self):
        return (self.xs[0], self.xs[-1])

    @property
    def nonnegative(self):
        return min(self.fs) >= 0

    def pdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.fs, left=0.0, right=0.0)

    def quad(self, g, lo=None, hi=None, *, epsabs=_quad.ABS_TOL):
        slo, shi = self.support
        lo = slo if lo is None else max(lo, slo)
        hi = shi if hi is None else min(hi, shi)
        if hi <= lo:
            return 0.0
        brk = [x for x in self.xs if lo < x < hi] + [0.0]
        # QUADPACK caps the number of breakpoints; split into chunks
        chunks = [lo] + brk[::max(1, len(brk) // 40)] + [hi]
        chunks = sorted(set(chunks))
        total = 0.0
        for a, b in zip(chunks[:-1], chunks[1:]):
            total += _quad.integrate(lambda x: float(g(x) * self.pdf(x)), a, b,
                                     breaks=[x for x in brk if a < x < b][:90], epsabs=epsabs)[0]
        return total

    def to_json(self):
        return {"kind": self.kind, "xs": list(self.xs), "fs": list(self.fs)}


@dataclass(frozen=True)
class Weighted(DensityKernel):
    """``base(x) * x**p * (1 + x**2)**q`` for integer ``p`` and ``q``.

    Build through :func:`weighted`, which folds nested weights and maps the
    two monomial forms of the flat kernel back to :class:`CauchyLevyTail`
    and ``PoissonKernel(1)``.
    """

    base: DensityKernel = None
    p: int = 0
    q: int = 0
    kind: ClassVar[str] = "weighted"

    @property
    def support(self):
        return self.base.support

    @property
    def breaks(self):
        return self.base.breaks

    @property
    def edges(self):
        return self.base.edges

    @property
    def singularity(self):
        if not self.base.contains_origin():
            return 0.0
        return max(self.base.singularity - self.p, 0.0)

    @property
    def decay(self):
        return self.base.decay - self.p - 2 * self.q

    @property
    def symmetric(self):
        return self.base.symmetric and self.p % 2 == 0

    @property
    def nonnegative(self):
        return self.base.nonnegative and self.p % 2 == 0

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = x ** float(self.p) * (1 + x * x) ** float(self.q)
        return self.base.pdf(x) * w

    @cached_property
    def _moments_pair(self):
        # E0 = int base / (1+x^2), E1 = int x base / (1+x^2)
        e0 = self.base.quad(lambda x: 1.0 / (1 + x * x))
        e1 = 0.0 if self.base.symmetric else self.base.quad(lambda x: x / (1 + x * x))
        return e0, e1

    @cached_property
    def mass(self):
        if self.p == 0 and self.q == -1:
            return self._moments_pair[0]
        return DensityKernel.mass.func(self)

    def _reciprocal_form(self):
        return self.p == 0 and self.q == -1 and type(self.base).cauchy is not DensityKernel.cauchy

    def cauchy(self, z):
        if not self._reciprocal_form():
            return DensityKernel.cauchy(self, z)
        z = np.asarray(z, dtype=complex)
        e0, e1 = self._moments_pair
        den = 1 + z * z
        near = np.abs(den) < 1e-3
        out = (self.base.cauchy(z) + e1 + z * e0) / np.where(near, 1.0, den)
        if np.any(near):
            out = np.where(near, DensityKernel.cauchy(self, z), out)
        return out

    def pair_phi(self, z):
        if not self._reciprocal_form():
            return DensityKernel.pair_phi(self, z)
        _, e1 = self._moments_pair
        return self.base.cauchy(z) + e1

    def pair_phi_deriv(self, z):
        if not self._reciprocal_form():
            return DensityKernel.pair_phi_deriv(self, z)
        return self.base.cauchy_deriv(z)

    def _inverse_square_form(self):
        return self.p == -2 and self.q == 0 and type(self.base).cauchy is not DensityKernel.cauchy

    @cached_property
    def _outer_first(self):
        if self.base.symmetric:
            return 0.0
        return (self.base.quad(lambda x: 1.0 / x, -INF, -1.0)
                + self.base.quad(lambda x: 1.0 / x, 1.0, INF))

    def r_kernel(self, z):
        # for nu = rho / x^2:  z G_rho(1/z) + z int_{|x|>1} rho / x
        if not self._inverse_square_form():
            return DensityKernel.r_kernel(self, z)
        z = np.asarray(z, dtype=complex)
        return z * self.base.cauchy(1.0 / z) + z * self._outer_first

    def r_kernel_deriv(self, z):
        if not self._inverse_square_form():
            return DensityKernel.r_kernel_deriv(self, z)
        z = np.asarray(z, dtype=complex)
        w = 1.0 / z
        return self.base.cauchy(w) - self.base.cauchy_deriv(w) * w + self._outer_first

    def to_json(self):
        return {"kind": self.kind, "base": self.base.to_json(), "p": self.p, "q": self.q}


def _monomial(kernel):
    if isinstance(kernel, Weighted):
        base, p, q = _monomial(kernel.base)
        return base, p + kernel.p, q + kernel.q
    if isinstance(kernel, CauchyLevyTail):
        return Flat(), -2, 0
    if isinstance(kernel, PoissonKernel) and kernel.scale == 1.0:
        return Flat(), 0, -1
    return kernel, 0, 0


def weighted(kernel, p=0, q=0):
    """Multiply a kernel by ``x**p (1+x^2)**q`` and return the canonical form."""
    base, p0, q0 = _monomial(kernel)
    p, q = p0 + int(p), q0 + int(q)
    if isinstance(base, Flat):
        if (p, q) == (-2, 0):
            return CauchyLevyTail()
        if (p, q) == (0, -1):
            return PoissonKernel(1.0)
    if (p, q) == (0, 0):
        return base
    return Weighted(base, p, q)


@dataclass(frozen=True)
class PositivePart(DensityKernel):
    """``max(sign * sum(coef * kernel.pdf), 0)`` for a tuple of terms."""

    terms: tuple = ()
    sign: int = 1
    kind: ClassVar[str] = "positive_part"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        tot = np.zeros_like(x, dtype=float)
        for c, k in self.terms:
            tot = tot + float(c) * k.pdf(x)
        return np.maximum(self.sign * tot, 0.0)

    @property
    def support(self):
        lo = min(k.support[0] for _, k in self.terms)
        hi = max(k.support[1] for _, k in self.terms)
        return (lo, hi)

    @cached_property
    def breaks(self):
        pts = set()
        for _, k in self.terms:
            pts.update(k.breaks)
            pts.update(k.edges)
        pts.update(sign_changes(self.terms))
        return tuple(sorted(pts))

    @property
    def singularity(self):
        return max((k.singularity for _, k in self.terms), default=0.0)

    @property
    def decay(self):
        return min((k.decay for _, k in self.terms), default=INF)

    @property
    def symmetric(self):
        return all(k.symmetric for _, k in self.terms)

    def to_json(self):
        return {"kind": self.kind, "sign": self.sign,
                "terms": [[float(c), k.to_json()] for c, k in self.terms]}


def probe_points(terms):
    """Sample abscissae covering supports, breakpoints and the origin."""
    lo = min(k.support[0] for _, k in terms)
    hi = max(k.support[1] for _, k in terms)
    pts = set()
    mags = np.logspace(-8, 4, 241)
    pts.update(mags.tolist())
    pts.update((-mags).tolist())
    for _, k in terms:
        klo, khi = k.support
        if math.isfinite(klo) and math.isfinite(khi):
            pts.update(np.linspace(klo, khi, 401)[1:-1].tolist())
        for b in tuple(k.breaks) + tuple(k.edges):
            for d in (1e-9, 1e-6, 1e-3):
                pts.add(b - d)
                pts.add(b + d)
    xs = np.array(sorted(p for p in pts if lo <= p <= hi and p != 0.0))
    return xs


def total_pdf(terms, x):
    x = np.asarray(x, dtype=float)
    tot = np.zeros_like(x, dtype=float)
    for c, k in terms:
        tot = tot + float(c) * k.pdf(x)
    return tot


def sign_changes(terms):
    """Roots of the total density located by bracketing on probe points."""
    from scipy.optimize import brentq

    xs = probe_points(terms)
    if xs.size < 2:
        return ()
    vals = total_pdf(terms, xs)
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0:
            roots.append(float(a))
        elif fa * fb < 0 and not (a < 0 < b):
            roots.append(brentq(lambda t: float(total_pdf(terms, t)), a, b, xtol=1e-14))
    return tuple(roots)


_REGISTRY = {
    cls.kind: cls
    for cls in (Flat, CauchyLevyTail, PoissonKernel, SemicircleArc, FreeMeixnerArc,
                FMQuasiLevy, PowerLaw, NumericGrid, Weighted, PositivePart)
}


def kernel_from_json(obj):
    kind = obj["kind"]
    cls = _REGISTRY.get(kind)
    if cls is None:
        raise ValueError(f"unknown kernel kind {kind!r}")
    params = {k: v for k, v in obj.items() if k != "kind"}
    if cls is Weighted:
        return weighted(kernel_from_json(params["base"]), params.get("p", 0), params.get("q", 0))
    if cls is PositivePart:
        terms = tuple((float(c), kernel_from_json(k)) for c, k in params["terms"])
        return PositivePart(terms, int(params.get("sign", 1)))
    if cls is NumericGrid:
        return NumericGrid(tuple(params["xs"]), tuple(params["fs"]))
    return cls(**params)
