"""Adaptive quadrature helpers on top of QUADPACK (Gauss-Kronrod).

All integrals over pieces of the real line go through :func:`integrate`,
which splits at declared breakpoints and applies the substitution
``x = lo + r s**2`` on pieces whose left endpoint carries an integrable
power-law singularity.
"""

import math

import numpy as np
from scipy import integrate as _si

from .errors import NonIntegrable

ABS_TOL = 1e-10
REL_TOL = 1e-10
LIMIT = 500


def _quad_real(f, lo, hi, epsabs, epsrel, points=None):
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=LIMIT, full_output=1)
    if points is not None and np.isfinite(lo) and np.isfinite(hi):
        pts = [p for p in points if lo < p < hi]
        if pts:
            kw["points"] = pts
    out = _si.quad(f, lo, hi, **kw)
    val, err = out[0], out[1]
    if not np.isfinite(val):
        raise NonIntegrable(f"quadrature diverged on [{lo}, {hi}]")
    return val, err


def _piece(f, lo, hi, singular_lo, singular_hi, epsabs, epsrel):
    """Integrate one piece; singular endpoints are finite."""
    if singular_lo and singular_hi:
        mid = 0.5 * (lo + hi)
        a = _piece(f, lo, mid, True, False, epsabs, epsrel)
        b = _piece(f, mid, hi, False, True, epsabs, epsrel)
        return a[0] + b[0], a[1] + b[1]
    if singular_lo and np.isfinite(hi):
        r = hi - lo
        return _quad_real(lambda s: f(lo + r * s * s) * 2.0 * r * s, 0.0, 1.0, epsabs, epsrel)
    if singular_hi and np.isfinite(lo):
        r = hi - lo
        return _quad_real(lambda s: f(hi - r * s * s) * 2.0 * r * s, 0.0, 1.0, epsabs, epsrel)
    if singular_lo:
        # [lo, inf): substitute near lo, plain tail beyond lo + 1
        a = _piece(f, lo, lo + 1.0, True, False, epsabs, epsrel)
        b = _quad_real(f, lo + 1.0, hi, epsabs, epsrel)
        return a[0] + b[0], a[1] + b[1]
    if singular_hi:
        a = _quad_real(f, lo, hi - 1.0, epsabs, epsrel)
        b = _piece(f, hi - 1.0, hi, False, True, epsabs, epsrel)
        return a[0] + b[0], a[1] + b[1]
    return _quad_real(f, lo, hi, epsabs, epsrel)


def integrate(f, lo, hi, *, singular=(), breaks=(), epsabs=ABS_TOL, epsrel=REL_TOL):
    """Integrate a real scalar function over ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Scalar real integrand.
    lo, hi : float
        Limits, possibly infinite.
    singular : iterable of float
        Points with an integrable algebraic singularity; the interval is
        split there and each adjacent piece is integrated after the
        ``s**2`` substitution.
    breaks : iterable of float
        Extra breakpoints (kinks, support edges).

    Returns
    -------
    (value, abserr)
    """
    if hi < lo:
        v, e = integrate(f, hi, lo, singular=singular, breaks=breaks, epsabs=epsabs, epsrel=epsrel)
        return -v, e
    if hi == lo:
        return 0.0, 0.0
    sing = {float(s) for s in singular if lo <= s <= hi}
    cuts = sorted(sing | {float(b) for b in breaks if lo < b < hi})
    edges = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a == b:
            continue
        v, e = _piece(f, a, b, a in sing, b in sing, epsabs, epsrel)
        total += v
        err += e
    return total, err


def integrate_complex(f, lo, hi, **kw):
    """Integrate a complex-valued scalar function (real and imaginary parts)."""
    re, e1 = integrate(lambda x: f(x).real, lo, hi, **kw)
    im, e2 = integrate(lambda x: f(x).imag, lo, hi, **kw)
    return complex(re, im), math.hypot(e1, e2)
