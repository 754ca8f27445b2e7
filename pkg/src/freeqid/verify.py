"""Self-check suites used by ``freeqid verify``.

Each suite returns a list of :class:`Check` records; a suite passes when
every check does.  The suites are quick versions of the test-suite
invariants so that an installed copy can be checked without pytest.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bpx, cumulants, deconvolve, families, transforms


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    tol: object = None

    def to_json(self):
        return {"name": self.name, "passed": bool(self.passed), "value": self.value, "tol": self.tol}


def _threads():
    try:
        return max(1, int(os.environ.get("FREEDECONV_THREADS", "1")))
    except ValueError:
        return 1


def library_phis():
    return {
        "cauchy": families.Cauchy(1.0).phi(),
        "semicircle": families.Semicircle(0.0, 1.0).phi(),
        "mp": families.MP(1.0, 0.25).phi(),
        "free_meixner": families.FreeMeixner(0.5, 0.5).phi(),
        "rho_acl": deconvolve.rho_acl(1.0, 1.0, 0.25).phi(),
        "gamma_as": deconvolve.gamma_as(1.0, 0.25).phi(),
        "mu_plus": deconvolve.r_t_family(0.05, 1).model.phi(),
    }


def suite_transforms(tol=1e-10):
    out = []
    rng = np.random.default_rng(0)
    zs = rng.uniform(-5, 5, 100) + 1j * np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 100))
    for name, phi in library_phis().items():
        w = transforms.invert_k(phi, zs)
        res = float(np.max(np.abs(w + phi.value(w) - zs) / (1 + np.abs(zs))))
        out.append(Check(f"invert_k round trip: {name}", res <= tol, res, tol))
    good = transforms.pick_check(deconvolve.RhoACL(1.0, 1.0, 0.25).phi())
    bad = transforms.pick_check(deconvolve.RhoACL(1.0, 1.0, 1.0).phi())
    out.append(Check("pick_check passes inside the bound", good.passed))
    out.append(Check("pick_check fails with witness outside the bound",
                     (not bad.passed) and bool(bad.witnesses)))
    return out


def suite_deconv(tol=1e-10):
    out = []
    w = deconvolve.multi_mp_weights([1, 2, 3, 4])
    want = [Fraction(-1, 6), Fraction(4), Fraction(-27, 2), Fraction(32, 3)]
    out.append(Check("multi-MP weights for nodes 1..4", w == want and sum(w) == 1,
                     [str(v) for v in w]))
    t = Fraction(1, 7)
    s = [p + m for p, m in zip(deconvolve.r_series(t, 1), deconvolve.r_series(t, -1))]
    out.append(Check("R_t^+ + R_t^- = 2 z^2 to order 20", s == [0, 0, 2] + [0] * 18))
    rho = deconvolve.rho_acl(1.0, 1.0, 0.25)
    d = float(rho.density(0.75))
    out.append(Check("rho density at 3/4 equals 2/(5 pi)", abs(d - 2 / (5 * math.pi)) <= tol, d, tol))
    g = deconvolve.gamma_as(1.0, 0.25)
    f0 = float(g.density(0.0))
    out.append(Check("gamma density at 0 equals 2/pi", abs(f0 - 2 / math.pi) <= 1e-12, f0, 1e-12))
    return out


def suite_cumulants(tol=1e-12):
    out = []
    worst = Fraction(0)
    sign_ok = True
    for k in range(1, 100):
        a = Fraction(k, 100)
        r = cumulants.moments_to_classical_cumulants([Fraction(1)] + [a] * 4)
        s = cumulants.free_cumulants_to_moments(r.values)
        det = cumulants.hankel_det(s, 2)
        worst = max(worst, abs(det - a ** 3 * (a - 1) ** 3))
        sign_ok = sign_ok and det < 0
    out.append(Check("Hankel det = a^3 (a-1)^3 for a = k/100", worst == 0 and sign_ok, str(worst), 0))
    kap = [Fraction(1, 3), Fraction(2, 5), Fraction(-1, 7), Fraction(3, 2), Fraction(1, 9)]
    m = cumulants.free_cumulants_to_moments(kap)
    out.append(Check("free cumulants round trip",
                     list(cumulants.moments_to_free_cumulants(m).values) == kap))
    m = cumulants.classical_cumulants_to_moments(kap)
    out.append(Check("classical cumulants round trip",
                     list(cumulants.moments_to_classical_cumulants(m).values) == kap))
    return out


def _critical_point(args):
    p, lam = args
    pair = bpx.PhiPair.critical(p, lam)
    rep = bpx.classify(pair)
    zs = np.linspace(1e-6, 100, 200001)
    amin = float(np.min(bpx.polya_A(pair, zs)))
    ok = (rep.in_phi_star.status == "yes" and rep.in_phi_boxplus.status == "yes"
          and rep.in_phi_plus.status == "no" and amin >= 0)
    return ok, amin


def critical_grid():
    ps = [Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(9, 4)]
    lams = [0.5, 1.0, 2.0, 3.0, 0.25]
    return [(float(p), lam) for p in ps for lam in lams]


def _fd_residual(pair):
    """Relative error of ``phi'' = A phi`` by an extrapolated central difference."""
    zs = np.linspace(0.1, 10, 200)
    h = 0.01 / max(pair.c, pair.two_point_params()[1])

    def d2(k):
        f = bpx.mu_star_cf
        return (f(pair, zs + k) - 2 * f(pair, zs) + f(pair, zs - k)) / (k * k)

    fd = (4 * d2(h / 2) - d2(h)) / 3
    an = bpx.polya_A(pair, zs) * bpx.mu_star_cf(pair, zs)
    return float(np.max(np.abs(fd - an) / np.abs(an)))


def suite_bpx(tol=1e-6):
    out = []
    grid = critical_grid()
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        res = list(ex.map(_critical_point, grid))
    out.append(Check(f"critical two-point sweep ({len(grid)} points) in Phi* and Phi^box, not Phi^+",
                     all(r[0] for r in res), min(r[1] for r in res)))
    out.append(Check("h continuous at 1/4", abs(bpx.h_threshold(0.25) - 1.0) <= 1e-15))
    rel = max(_fd_residual(bpx.PhiPair.critical(p, lam)) for p, lam in grid)
    out.append(Check("phi'' = A phi by finite differences on the sweep", rel <= tol, rel, tol))
    return out


SUITES = {
    "transforms": suite_transforms,
    "deconv": suite_deconv,
    "cumulants": suite_cumulants,
    "bpx": suite_bpx,
}


def run(name, tol=None):
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(name)
    checks = []
    for n in names:
        for c in (SUITES[n](tol) if tol is not None else SUITES[n]()):
            c.name = f"{n}: {c.name}"
            checks.append(c)
    return checks
