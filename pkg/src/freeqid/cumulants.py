"""Moment/cumulant conversions, cumulants of a free pair, Hankel determinants.

All recursions use plain arithmetic on whatever number type they receive,
so ``Fraction`` input gives exact results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .errors import HalfPoint, ValidityError
from .measures import SignedMeasure, moment

KINDS = ("moments", "free_cumulants", "classical_cumulants")


@dataclass(frozen=True)
class Sequence:
    """Moments are indexed from 0 (``values[0] = s_0``); cumulants from 1."""

    values: tuple
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) < 1:
            raise ValueError("sequence must not be empty")

    def __getitem__(self, n):
        return self.values[n] if self.kind == "moments" else self.values[n - 1]

    @property
    def order(self):
        return len(self.values) - 1 if self.kind == "moments" else len(self.values)


def _vals(seq, kind):
    if isinstance(seq, Sequence):
        if seq.kind != kind:
            raise ValueError(f"expected {kind}, got {seq.kind}")
        return list(seq.values)
    return list(seq)


def _poly_mul(p, q, n):
    out = [0] * (n + 1)
    for i, a in enumerate(p[: n + 1]):
        if a == 0:
            continue
        for j, b in enumerate(q[: n + 1 - i]):
            out[i + j] = out[i + j] + a * b
    return out


def _power_coeffs(m, N):
    """``pows[s][j] = [z^j] M(z)^s`` for ``M = sum m_i z^i``, s, j <= N."""
    one = m[0] * 0 + 1
    pows = [[one] + [0 * one] * N]
    for _ in range(N):
        pows.append(_poly_mul(pows[-1], m, N))
    return pows


def free_cumulants_to_moments(kappa):
    """Moments ``s_0..s_N`` from free cumulants ``k_1..k_N``.

    ``s_n = sum_{s=1}^{n} k_s [z^{n-s}] M(z)^s`` with ``M = sum s_i z^i``,
    which is the first-block decomposition of non-crossing partitions.
    """
    k = _vals(kappa, "free_cumulants")
    N = len(k)
    one = (k[0] * 0 + 1) if k else 1
    m = [one] + [0 * one] * N
    for n in range(1, N + 1):
        # only s_0..s_{n-1} enter [z^{n-s}] M^s for s >= 1
        pows = _power_coeffs(m[:n] + [0 * one] * (N + 1 - n), n)
        tot = 0 * one
        for s in range(1, n + 1):
            tot = tot + k[s - 1] * pows[s][n - s]
        m[n] = tot
    return Sequence(tuple(m), "moments")


def moments_to_free_cumulants(moments):
    s = _vals(moments, "moments")
    N = len(s) - 1
    one = s[0] * 0 + 1
    pows = _power_coeffs(s, N)
    k = []
    for n in range(1, N + 1):
        tot = s[n]
        for j in range(1, n):
            tot = tot - k[j - 1] * pows[j][n - j]
        k.append(tot * one)
    return Sequence(tuple(k), "free_cumulants")


def moments_to_classical_cumulants(moments):
    """``k_n = s_n - sum_{k<n} C(n-1, k-1) k_k s_{n-k}`` (log of the EGF)."""
    s = _vals(moments, "moments")
    if s[0] != 1:
        raise ValueError("moment sequence must start with s_0 = 1")
    k = []
    for n in range(1, len(s)):
        tot = s[n]
        for j in range(1, n):
            tot = tot - comb(n - 1, j - 1) * k[j - 1] * s[n - j]
        k.append(tot)
    return Sequence(tuple(k), "classical_cumulants")


def classical_cumulants_to_moments(kappa):
    k = _vals(kappa, "classical_cumulants")
    one = (k[0] * 0 + 1) if k else 1
    s = [one]
    for n in range(1, len(k) + 1):
        tot = 0 * one
        for j in range(1, n + 1):
            tot = tot + comb(n - 1, j - 1) * k[j - 1] * s[n - j]
        s.append(tot)
    return Sequence(tuple(s), "moments")


def cumulants_from_pair(p, N, *, probability=False):
    """Free cumulants of the law with pair ``(b, tau)``.

    ``k_1 = b + m_1(tau)``, ``k_2 = tau(R) + m_2(tau)`` and
    ``k_n = m_{n-2}(tau) + m_n(tau)`` for ``n >= 3``.

    Parameters
    ----------
    probability : bool
        When the pair is claimed to come from a probability law, ``k_2``
        is a variance and must be nonnegative.

    Raises
    ------
    DivergentMoment
        If ``tau`` lacks moments up to order ``N``.
    """
    tau = p.tau
    ms = [moment(tau, n) for n in range(N + 1)]
    ks = [p.b + ms[1]]
    if N >= 2:
        ks.append(ms[0] + ms[2])
    for n in range(3, N + 1):
        ks.append(ms[n - 2] + ms[n])
    ks = ks[:N]
    if probability and N >= 2 and ks[1] < 0:
        raise ValidityError(f"second free cumulant {float(ks[1])} is negative")
    return Sequence(tuple(ks), "free_cumulants")


@dataclass
class GrowthReport:
    rate: float
    bound: float
    unbounded: bool
    detail: dict = field(default_factory=dict)

    @property
    def value(self):
        return math.inf if self.unbounded else self.rate


def _fit_rate(ns, logs):
    A = np.column_stack([ns, np.log(ns), np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    return float(np.exp(coef[0]))


def exp_growth_check(seq, *, threshold=1.25):
    """Finite-N proxy for ``limsup |s_n|^{1/n}``.

    The rate comes from a least-squares fit of
    ``log|s_n| = n log c + alpha log n + beta`` over the upper half of the
    available nonzero terms.  The sequence is flagged unbounded when the
    rate fitted on ``[N/2, N]`` exceeds the one fitted on ``[N/4, N/2]`` by
    more than ``threshold``.  ``bound`` is ``max_n |s_n|^{1/n}``.
    """
    vals = list(seq.values) if isinstance(seq, Sequence) else list(seq)
    start = 0 if isinstance(seq, Sequence) and seq.kind != "moments" else 1
    offs = 1 if isinstance(seq, Sequence) and seq.kind != "moments" else 0
    ns, logs = [], []
    for i in range(start, len(vals)):
        v = float(abs(vals[i]))
        n = i + offs
        if v > 0 and n >= 1:
            ns.append(n)
            logs.append(math.log(v))
    if not ns:
        return GrowthReport(0.0, 0.0, False)
    ns, logs = np.array(ns, dtype=float), np.array(logs)
    bound = float(np.max(np.exp(logs / ns)))
    N = ns[-1]
    hi = ns >= N / 2
    if hi.sum() < 4:
        return GrowthReport(bound, bound, False, {"note": "too few terms for a fit"})
    rate = _fit_rate(ns[hi], logs[hi])
    lo = (ns >= N / 4) & (ns <= N / 2)
    unbounded = False
    prev = None
    if lo.sum() >= 4:
        prev = _fit_rate(ns[lo], logs[lo])
        unbounded = rate > threshold * prev
    return GrowthReport(rate, bound, unbounded, {"previous_rate": prev})


def hankel_det(s, k):
    """Determinant of ``(s_{i+j})_{i,j=0..k}`` by Gaussian elimination.

    Rational input is eliminated exactly; floats use partial pivoting.
    """
    vals = _vals(s, "moments")
    if len(vals) < 2 * k + 1:
        raise ValueError(f"need moments up to order {2 * k}")
    n = k + 1
    a = [[vals[i + j] for j in range(n)] for i in range(n)]
    exact = all(isinstance(v, (int, Fraction)) for row in a for v in row)
    if exact:
        a = [[Fraction(v) for v in row] for row in a]
    det = Fraction(1) if exact else 1.0
    for c in range(n):
        if exact:
            piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        else:
            piv = max(range(c, n), key=lambda r: abs(a[r][c]))
            if a[piv][c] == 0:
                piv = None
        if piv is None:
            return det * 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f != 0:
                for j in range(c, n):
                    a[r][j] = a[r][j] - f * a[c][j]
    return det


# ---------------------------------------------------------------------------
# Bernoulli law as a classical QID law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalTriplet:
    """Classical triplet with compensator ``i z x 1_{[-1,1]}(x)``."""

    gaussian: float
    nu: SignedMeasure
    drift: float

    def cf(self, z):
        z = np.asarray(z, dtype=float)
        expo = -0.5 * self.gaussian * z * z + 1j * self.drift * z
        for x, w in self.nu.atoms:
            x, w = float(x), float(w)
            comp = x if abs(x) <= 1 else 0.0
            expo = expo + w * (np.exp(1j * z * x) - 1 - 1j * z * comp)
        return np.exp(expo)


def bernoulli_qid_triplet(a, truncation=None, tol=1e-12):
    """Classical quasi-Levy triplet of ``(1 - a) delta_0 + a delta_1``.

    ``nu_a = -sum (1/m) r^m delta_{sm}`` with ``r = a/(a-1)``, ``s = 1`` for
    ``a < 1/2`` and ``r = (a-1)/a``, ``s = -1`` for ``a > 1/2``.  The
    series is cut where the geometric tail bound ``|r|^{M+1}/((M+1)(1-|r|))``
    falls below ``tol`` relative to the kept mass, or at ``truncation``.
    """
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    if a == 0.5 or a == Fraction(1, 2):
        raise HalfPoint("a = 1/2 has no quasi-infinitely divisible triplet")
    if a < 0.5:
        r, sgn = a / (a - 1), 1
    else:
        r, sgn = (a - 1) / a, -1
    ar = abs(float(r))

    def tail(M):
        return ar ** (M + 1) / ((M + 1) * (1 - ar))

    if truncation is None:
        M, kept = 1, ar
        while tail(M) > tol * kept:
            M += 1
            kept += ar ** M / M
    else:
        M = int(truncation)
    atoms = tuple((sgn * m, -(r ** m) / m) for m in range(1, M + 1))
    nu = SignedMeasure(atoms, (), {"truncation": M, "tail_bound": tail(M)})
    # drift reproduces the characteristic function with the [-1, 1] compensator
    drift = -r if sgn == 1 else 1 - (1 - a) / a
    return ClassicalTriplet(0, nu, drift)
