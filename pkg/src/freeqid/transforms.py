"""Analytic transforms: Cauchy/F/Voiculescu/R, inversion of K, Stieltjes inversion.

Voiculescu transforms are represented as small expression trees
(:class:`PhiExpression` nodes) that can be evaluated together with their
complex derivative.  ``invert_k`` solves ``w + phi(w) = z`` by damped Newton
with continuation in ``Im z``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LeftHalfPlaneEscape, NoConvergence, PoleError
from .measures import FreeCharPair, FreeTriplet

TWO_PI = 2 * math.pi


def sqrt_cut(z):
    """Square root with the branch cut on the nonnegative real axis.

    For ``z = r e^{i theta}`` with ``theta`` in ``[0, 2 pi)`` the result is
    ``sqrt(r) e^{i theta / 2}``, so it always lies in the closed upper
    half-plane.
    """
    z = np.asarray(z, dtype=complex)
    theta = np.mod(np.angle(z), TWO_PI)
    return np.sqrt(np.abs(z)) * np.exp(0.5j * theta)


def _asc(z):
    return np.asarray(z, dtype=complex)


def _ret(orig, val):
    return complex(val) if np.ndim(orig) == 0 else val


# ---------------------------------------------------------------------------
# expression tree
# ---------------------------------------------------------------------------

class PhiExpression:
    """Base class for Voiculescu-transform expression nodes."""

    def value(self, z):
        raise NotImplementedError

    def deriv(self, z):
        raise NotImplementedError

    def poles(self):
        return ()

    def __call__(self, z):
        return phi_eval(self, z)

    def __add__(self, other):
        if not isinstance(other, PhiExpression):
            return NotImplemented
        left = self.terms if isinstance(self, Sum) else (self,)
        right = other.terms if isinstance(other, Sum) else (other,)
        return Sum(left + right)

    def __neg__(self):
        return Negate(self)

    def __sub__(self, other):
        return self + Negate(other)

    def __rmul__(self, s):
        return Scale(float(s), self)


@dataclass(frozen=True)
class Const(PhiExpression):
    c: complex

    def value(self, z):
        return self.c + 0 * _asc(z)

    def deriv(self, z):
        return 0 * _asc(z)


@dataclass(frozen=True)
class RationalMP(PhiExpression):
    """``lam c z / (z - c)``: Voiculescu transform of the dilated MP law."""

    c: float
    lam: float

    def value(self, z):
        z = _asc(z)
        return self.lam * self.c * z / (z - self.c)

    def deriv(self, z):
        z = _asc(z)
        return -self.lam * self.c ** 2 / (z - self.c) ** 2

    def poles(self):
        return (self.c,)


@dataclass(frozen=True)
class Pole(PhiExpression):
    """``s2 / z``."""

    s2: float

    def value(self, z):
        return self.s2 / _asc(z)

    def deriv(self, z):
        return -self.s2 / _asc(z) ** 2

    def poles(self):
        return (0.0,)


@dataclass(frozen=True)
class PairIntegral(PhiExpression):
    """``b + int (1 + x z) / (z - x) tau(dx)`` for a free characteristic pair."""

    pair: FreeCharPair

    def value(self, z):
        z = _asc(z)
        out = self.pair.b + 0 * z
        for x, w in self.pair.tau.atoms:
            x, w = float(x), float(w)
            out = out + w * (1 + x * z) / (z - x)
        for c, k in self.pair.tau.terms:
            out = out + float(c) * k.pair_phi(z)
        return out

    def deriv(self, z):
        z = _asc(z)
        out = 0 * z
        for x, w in self.pair.tau.atoms:
            x, w = float(x), float(w)
            out = out - w * (1 + x * x) / (z - x) ** 2
        for c, k in self.pair.tau.terms:
            out = out + float(c) * k.pair_phi_deriv(z)
        return out

    def poles(self):
        return tuple(float(x) for x, _ in self.pair.tau.atoms)


@dataclass(frozen=True)
class TripletR(PhiExpression):
    """``phi(z) = z R(1/z)`` with R built from a free characteristic triplet."""

    triplet: FreeTriplet

    def value(self, z):
        z = _asc(z)
        return z * _r_triplet(self.triplet, 1.0 / z)

    def deriv(self, z):
        z = _asc(z)
        w = 1.0 / z
        return _r_triplet(self.triplet, w) - _r_triplet_deriv(self.triplet, w) * w

    def poles(self):
        p = [0.0] if self.triplet.a != 0 else []
        return tuple(p + [float(x) for x, _ in self.triplet.nu.atoms])


@dataclass(frozen=True)
class Sum(PhiExpression):
    terms: tuple

    def value(self, z):
        out = 0 * _asc(z)
        for t in self.terms:
            out = out + t.value(z)
        return out

    def deriv(self, z):
        out = 0 * _asc(z)
        for t in self.terms:
            out = out + t.deriv(z)
        return out

    def poles(self):
        return tuple(p for t in self.terms for p in t.poles())


@dataclass(frozen=True)
class Scale(PhiExpression):
    factor: float
    expr: PhiExpression

    def value(self, z):
        return self.factor * self.expr.value(z)

    def deriv(self, z):
        return self.factor * self.expr.deriv(z)

    def poles(self):
        return self.expr.poles()


@dataclass(frozen=True)
class Negate(PhiExpression):
    expr: PhiExpression

    def value(self, z):
        return -self.expr.value(z)

    def deriv(self, z):
        return -self.expr.deriv(z)

    def poles(self):
        return self.expr.poles()


@dataclass(frozen=True)
class Dilate(PhiExpression):
    """``c phi(z / c)``, the transform of the law dilated by ``c``.

    For ``c < 0`` the inner transform is continued to the lower half-plane
    by Schwarz reflection.
    """

    c: float
    expr: PhiExpression

    def value(self, z):
        w = _asc(z) / self.c
        if self.c > 0:
            return self.c * self.expr.value(w)
        return self.c * np.conj(self.expr.value(np.conj(w)))

    def deriv(self, z):
        w = _asc(z) / self.c
        if self.c > 0:
            return self.expr.deriv(w)
        return np.conj(self.expr.deriv(np.conj(w)))

    def poles(self):
        return tuple(self.c * p for p in self.expr.poles())


def dilate_phi(c, expr):
    """Expression for ``c phi(z / c)``, simplified on the closed-form nodes."""
    if c == 0:
        raise ValueError("dilation factor must be nonzero")
    if c == 1:
        return expr
    if isinstance(expr, Const):
        v = complex(expr.c)
        return Const(c * (v if c > 0 else v.conjugate()))
    if isinstance(expr, RationalMP):
        return RationalMP(c * expr.c, expr.lam)
    if isinstance(expr, Pole):
        return Pole(c * c * expr.s2)
    if isinstance(expr, Sum):
        return Sum(tuple(dilate_phi(c, t) for t in expr.terms))
    if isinstance(expr, Negate):
        return Negate(dilate_phi(c, expr.expr))
    if isinstance(expr, Scale):
        return Scale(expr.factor, dilate_phi(c, expr.expr))
    if isinstance(expr, Dilate):
        return dilate_phi(c * expr.c, expr.expr)
    return Dilate(c, expr)


ZERO = Const(0j)


def phi_eval(phi, z):
    """Evaluate an expression tree; raises :class:`PoleError` on a declared pole."""
    arr = _asc(z)
    for p in phi.poles():
        if np.any(np.abs(arr - p) <= 1e-14 * (1 + abs(p))):
            raise PoleError(f"phi evaluated at its pole {p}")
    return _ret(z, phi.value(arr))


def phi_deriv(phi, z):
    return _ret(z, phi.deriv(_asc(z)))


def _r_triplet(t, z):
    z = _asc(z)
    out = t.a * z * z + t.gamma * z
    for x, w in t.nu.atoms:
        x, w = float(x), float(w)
        comp = x * z if abs(x) <= 1 else 0.0
        out = out + w * (1.0 / (1.0 - x * z) - 1.0 - comp)
    for c, k in t.nu.terms:
        out = out + float(c) * k.r_kernel(z)
    return out


def _r_triplet_deriv(t, z):
    z = _asc(z)
    out = 2 * t.a * z + t.gamma
    for x, w in t.nu.atoms:
        x, w = float(x), float(w)
        comp = x if abs(x) <= 1 else 0.0
        out = out + w * (x / (1.0 - x * z) ** 2 - comp)
    for c, k in t.nu.terms:
        out = out + float(c) * k.r_kernel_deriv(z)
    return out


def r_from_triplet(t, z):
    """``R(z) = a z^2 + gamma z + int (1/(1-xz) - 1 - xz 1_{[-1,1]}) nu(dx)``.

    Defined for ``Im z < 0``; signed ``nu`` is integrated term by term.
    """
    arr = _asc(z)
    if np.any(arr.imag >= 0):
        raise DomainError("R-transform of a triplet is evaluated on the lower half-plane")
    for x, _ in t.nu.atoms:
        if np.any(np.abs(1 - float(x) * arr) < 1e-14):
            raise PoleError(f"R evaluated at 1/{x}")
    return _ret(z, _r_triplet(t, arr))


def r_from_phi(phi, z):
    """``R(z) = z phi(1/z)``."""
    arr = _asc(z)
    return _ret(z, arr * phi_eval(phi, 1.0 / arr))


# ---------------------------------------------------------------------------
# model-level transforms
# ---------------------------------------------------------------------------

def _upper(z):
    arr = _asc(z)
    if np.any(arr.imag <= 0):
        raise DomainError("transform requires Im z > 0")
    return arr


def cauchy_transform(model, z):
    """``G(z) = int 1/(z - x) mu(dx)`` on the upper half-plane."""
    arr = _upper(z)
    return _ret(z, model.cauchy(arr))


def f_transform(model, z):
    """``F = 1/G``."""
    arr = _upper(z)
    f = getattr(model, "f_transform", None)
    return _ret(z, f(arr) if f is not None else 1.0 / model.cauchy(arr))


# ---------------------------------------------------------------------------
# inversion of K(w) = w + phi(w)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeSpec:
    """Truncated cone ``{Im z > beta, |Re z| < alpha Im z}``."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("cone parameters must be positive")

    def contains(self, z):
        z = _asc(z)
        return (z.imag > self.beta) & (np.abs(z.real) < self.alpha * z.imag)

    def log_grid(self, n=100, ymax=1e4, seed=0):
        """``n`` points with log-spaced heights and spread real parts."""
        ys = np.geomspace(self.beta * 1.01, ymax, n)
        frac = np.linspace(-0.95, 0.95, n)
        rng = np.random.default_rng(seed)
        rng.shuffle(frac)
        return frac * self.alpha * ys + 1j * ys


def _newton(phi, z, w, tol, max_iter):
    """Damped Newton for ``w + phi(w) = z`` (vectorised)."""
    res = w + phi.value(w) - z
    err = np.abs(res)
    lim = tol * (1 + np.abs(z))
    active = ~(err <= lim)
    it = 0
    while np.any(active) and it < max_iter:
        it += 1
        idx = np.nonzero(active)[0]
        wa, ra, ea = w[idx], res[idx], err[idx]
        dk = 1.0 + phi.deriv(wa)
        step = ra / dk
        t = np.ones(idx.size)
        done = np.zeros(idx.size, dtype=bool)
        upper = np.zeros(idx.size, dtype=bool)
        new_w, new_r, new_e = wa.copy(), ra.copy(), ea.copy()
        for _ in range(60):
            pend = ~done
            if not np.any(pend):
                break
            cand = wa[pend] - t[pend] * step[pend]
            ok_half = cand.imag > 0
            upper[np.nonzero(pend)[0][ok_half]] = True
            cr = np.full(cand.shape, np.nan + 0j)
            if np.any(ok_half):
                cr[ok_half] = cand[ok_half] + phi.value(cand[ok_half]) - z[idx][pend][ok_half]
            ce = np.abs(cr)
            good = ok_half & (ce < ea[pend])
            sel = np.nonzero(pend)[0][good]
            new_w[sel], new_r[sel], new_e[sel] = cand[good], cr[good], ce[good]
            done[sel] = True
            t[~done] *= 0.5
        if not np.all(done):
            bad = idx[~done]
            exc = NoConvergence if np.all(upper[~done]) else LeftHalfPlaneEscape
            raise exc(f"damped Newton stalled at z = {z[bad[0]]}", iterates=w[bad])
        w[idx], res[idx], err[idx] = new_w, new_r, new_e
        active[idx] = ~(new_e <= lim[idx])
    if np.any(active):
        bad = np.nonzero(active)[0]
        raise NoConvergence(f"Newton did not converge within {max_iter} iterations at z = {z[bad[0]]}",
                            iterates=w[bad])
    # one polishing step where it helps
    cand = w - (w + phi.value(w) - z) / (1.0 + phi.deriv(w))
    cr = np.abs(cand + phi.value(np.where(cand.imag > 0, cand, w)) - z)
    better = (cand.imag > 0) & (cr < err)
    w[better] = cand[better]
    return w


def invert_k(phi, z, cone=None, *, tol=1e-10, max_iter=200, ratio=2.0):
    """Solve ``K(w) = w + phi(w) = z`` for ``w`` in the upper half-plane.

    Newton is started high up the vertical line through ``z`` (where
    ``w = z - phi(z)`` is an excellent guess) and warm-started level by
    level while ``Im z`` is lowered geometrically to its target value.
    This tracks the branch of ``F = K^{-1}`` that behaves like the
    identity at infinity.

    Parameters
    ----------
    phi : PhiExpression
    z : complex or array of complex, ``Im z > 0``
    cone : ConeSpec, optional
        Accepted for interface compatibility; inversion is attempted on the
        whole upper half-plane and checked by the residual.
    tol : float
        Residual tolerance ``|K(w) - z| <= tol (1 + |z|)``.

    Raises
    ------
    NoConvergence, LeftHalfPlaneEscape
    """
    arr = np.atleast_1d(_asc(z)).ravel()
    if np.any(arr.imag <= 0):
        raise DomainError("invert_k requires Im z > 0")
    top = np.maximum(arr.imag, 100.0 * (1.0 + np.abs(arr)))
    start = arr.real + 1j * top
    w = start - phi.value(start)
    w = np.where(w.imag > 0, w, start)
    w = _newton(phi, start, w.astype(complex), tol, max_iter)
    nlev = int(np.ceil(np.max(np.log(top / arr.imag)) / math.log(ratio))) if np.any(top > arr.imag) else 0
    for k in range(1, nlev + 1):
        y = np.maximum(top * ratio ** (-k), arr.imag)
        zk = arr.real + 1j * y
        w = _newton(phi, zk, w, tol, max_iter)
    out = w.reshape(np.shape(z)) if np.ndim(z) else w[0]
    return _ret(z, out)


# ---------------------------------------------------------------------------
# Stieltjes inversion
# ---------------------------------------------------------------------------

DEFAULT_Y_LEVELS = (1e-3, 5e-4, 2.5e-4)


@dataclass(frozen=True)
class DensityGrid:
    """Sampled density with inversion metadata."""

    xs: np.ndarray
    fs: np.ndarray
    y_levels: tuple = DEFAULT_Y_LEVELS
    est_error: np.ndarray = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        fs = np.asarray(self.fs, dtype=float)
        err = np.zeros_like(fs) if self.est_error is None else np.asarray(self.est_error, dtype=float)
        if xs.shape != fs.shape or err.shape != fs.shape:
            raise ValueError("DensityGrid arrays must share one shape")
        if not np.all(np.isfinite(fs)):
            raise ValueError("DensityGrid values must be finite")
        if np.any(err < 0):
            raise ValueError("error estimates must be nonnegative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "fs", fs)
        object.__setattr__(self, "est_error", err)

    @property
    def negativity_violations(self):
        """Indices where the density is negative beyond its error bound."""
        return np.nonzero(self.fs < -self.est_error - 1e-12)[0]

    @property
    def ok(self):
        return self.negativity_violations.size == 0

    def to_csv(self, digits=12):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "f", "est_error"])
        for x, f, e in zip(self.xs, self.fs, self.est_error):
            wr.writerow([f"{x:.{digits}g}", f"{f:.{digits}g}", f"{e:.{digits}g}"])
        return buf.getvalue()

    def to_json(self):
        return {"x": [float(v) for v in self.xs], "f": [float(v) for v in self.fs],
                "est_error": [float(v) for v in self.est_error],
                "y_levels": [float(v) for v in self.y_levels]}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, default=float)


def richardson(hs, vals):
    """Extrapolate samples ``vals[j]`` taken at ``hs[j]`` to ``h = 0``.

    Neville's scheme on the interpolating polynomial in ``h``.  Returns the
    extrapolated value and the difference to the one-order-lower estimate
    (built from the smallest ``len(hs) - 1`` step sizes).
    """
    hs = np.asarray(hs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    n = hs.size
    p = [vals[j].copy() for j in range(n)]
    lower = None
    for m in range(1, n):
        for j in range(n - m):
            p[j] = (hs[j + m] * p[j] - hs[j] * p[j + 1]) / (hs[j + m] - hs[j])
        if m == n - 2:
            lower = p[1].copy()
    best = p[0]
    if lower is None:
        lower = vals[-1]
    return best, np.abs(best - lower)


def stieltjes_density(model, xs, y_levels=DEFAULT_Y_LEVELS, *, basis="y"):
    """Density by Stieltjes inversion ``f(x) = -Im G(x + i0) / pi``.

    ``-Im G(x + iy)/pi`` is sampled at every ``y`` in ``y_levels`` and
    extrapolated to ``y = 0`` with Richardson's scheme.  ``basis="sqrt"``
    extrapolates in ``sqrt(y)`` instead, which suits points where the
    density has a square-root cusp.

    Returns
    -------
    DensityGrid
    """
    xs = np.asarray(xs, dtype=float)
    ys = tuple(float(y) for y in y_levels)
    if any(y <= 0 for y in ys):
        raise ValueError("y_levels must be positive")
    if basis not in ("y", "sqrt"):
        raise ValueError("basis must be 'y' or 'sqrt'")
    samples = []
    for y in ys:
        g = np.asarray(model.cauchy(xs + 1j * y))
        samples.append(-g.imag / math.pi)
    hs = np.sqrt(ys) if basis == "sqrt" else np.asarray(ys)
    if len(ys) == 1:
        fs, err = samples[0], np.zeros_like(xs)
    else:
        fs, err = richardson(hs, samples)
    return DensityGrid(xs, np.asarray(fs, dtype=float), ys, np.asarray(err, dtype=float))


# ---------------------------------------------------------------------------
# Pick-property check
# ---------------------------------------------------------------------------

@dataclass
class PickReport:
    passed: bool
    witnesses: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_json(self):
        return {"passed": self.passed,
                "witnesses": [{"z": [w["z"].real, w["z"].imag], "reason": w["reason"]} for w in self.witnesses],
                "checks": self.checks}


def _critical_points(phi, box=20.0, n=9):
    """Zeros of ``K'`` in the upper half-plane found by Newton from a grid."""
    def kp(w):
        return 1.0 + phi.deriv(w)

    xs = np.concatenate([-np.geomspace(1e-2, box, n), [0.0], np.geomspace(1e-2, box, n)])
    ys = np.geomspace(1e-3, box, n)
    w = (xs[:, None] + 1j * ys[None, :]).ravel()
    for p in phi.poles():
        w = w[np.abs(w - p) > 1e-6]
    with np.errstate(all="ignore"):
        for _ in range(80):
            h = 1e-6 * (1 + np.abs(w))
            d2 = (kp(w + h) - kp(w - h)) / (2 * h)
            step = kp(w) / d2
            step = np.where(np.isfinite(step), step, 0)
            w = w - step
        val = np.abs(kp(w))
    ok = np.isfinite(val) & (val < 1e-9) & (w.imag > 1e-9)
    found = []
    for c in w[ok]:
        if all(abs(c - f) > 1e-6 * (1 + abs(c)) for f in found):
            found.append(complex(c))
    return found


def pick_check(phi, sample_spec=None, *, exact=None, tol=1e-9):
    """Check that ``K^{-1}`` behaves like the F-transform of a probability law.

    Three independent tests are run:

    * sampling: ``F = invert_k(phi, z)`` on a log-spaced grid must satisfy
      ``Im F >= Im z > 0`` and ``|F(iy)/(iy) - 1| <= 0.01`` at ``y = 1e4``;
    * branch scan: a critical point ``w_c`` of K in the upper half-plane
      whose value ``z_c = K(w_c)`` is in the upper half-plane and is reached
      by the principal inverse is a branch point of F there, hence a failure;
    * exact criterion for the two quadratic families when ``exact`` is
      ``("mp", a, c, lam)`` or ``("gamma", a, sigma2)``.

    Returns
    -------
    PickReport
    """
    spec = dict(sample_spec or {})
    xs = np.asarray(spec.get("xs", [-10, -1, -0.1, 0.0, 0.1, 1, 10]), dtype=float)
    ys = np.asarray(spec.get("ys", np.geomspace(1e-2, 1e3, 8)), dtype=float)
    report = PickReport(True)

    zs = (xs[:, None] + 1j * ys[None, :]).ravel()
    bad_sample = 0
    for z in zs:
        try:
            f = invert_k(phi, z)
        except NoConvergence as exc:
            report.witnesses.append({"z": complex(z), "reason": f"inversion failed: {exc}"})
            bad_sample += 1
            continue
        if not (f.imag > 0 and f.imag >= z.imag - tol * (1 + abs(z))):
            report.witnesses.append({"z": complex(z), "reason": f"Im F = {f.imag:.3g} below Im z"})
            bad_sample += 1
    report.checks["sampled_points"] = int(zs.size)
    report.checks["sample_failures"] = bad_sample

    y = 1e4
    try:
        ratio = invert_k(phi, 1j * y) / (1j * y)
        asym = abs(ratio - 1)
    except NoConvergence:
        asym = math.inf
    report.checks["asymptotic_deviation"] = float(asym)
    if not asym <= 0.01:
        report.witnesses.append({"z": 1j * y, "reason": f"|F(iy)/iy - 1| = {asym:.3g}"})

    branch = []
    for wc in _critical_points(phi):
        zc = complex(wc + phi.value(np.array([wc]))[0])
        if zc.imag <= tol * (1 + abs(zc)):
            continue
        try:
            wp = invert_k(phi, zc)
            principal = abs(wp - wc) <= 1e-3 * (1 + abs(wc))
        except NoConvergence:
            principal = True
        if principal:
            branch.append(zc)
            report.witnesses.append({"z": zc, "reason": f"branch point of K^-1 at K({wc:.6g})"})
    report.checks["branch_points"] = [[z.real, z.imag] for z in branch]

    if exact is not None:
        ok, wit = _exact_criterion(exact)
        report.checks["exact"] = ok
        if not ok:
            report.witnesses.append(wit)

    report.passed = not report.witnesses
    return report


def _exact_criterion(exact):
    kind = exact[0]
    if kind == "mp":
        _, a, c, lam = exact
        # on Re z = c(1 - lam): q = 4 c^2 lam - (y + a)^2, positive for small y iff 2|c| sqrt(lam) > a
        if 4 * c * c * lam <= a * a:
            return True, None
        ystar = 0.5 * (2 * abs(c) * math.sqrt(lam) - a)
        z = complex(c * (1 - lam), ystar)
        q = 4 * c * c * lam - (ystar + a) ** 2
        return False, {"z": z, "reason": f"q = {q:.6g} > 0 on Re z = c(1 - lambda): lambda > (a/2c)^2"}
    if kind == "gamma":
        _, a, s2 = exact
        sig = math.sqrt(s2)
        if 2 * sig <= a:
            return True, None
        ystar = 0.5 * (2 * sig - a)
        q = 4 * s2 - (ystar + a) ** 2
        return False, {"z": complex(0, ystar), "reason": f"q(iy) = {q:.6g} > 0: 2 sigma > a"}
    raise ValueError(f"unknown exact criterion {kind!r}")
