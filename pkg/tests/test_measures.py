import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from freeqid.errors import DivergentMoment, NonIntegrable, SingularWindow
from freeqid.families import MP, Cauchy, FreeMeixner, Semicircle, PointMass
from freeqid.deconvolve import gamma_as, rho_acl, fm_quasi_levy_measure, smp_triplet, two_mp_triplet
from freeqid.kernels import CauchyLevyTail, PoissonKernel, PowerLaw, SemicircleArc
from freeqid.measures import (FreeCharPair, FreeTriplet, QuasiLevyMeasure, SignedMeasure,
                              from_json, hahn_jordan, measures_close, moment, pair_to_json,
                              pair_to_triplet, total_variation, triplet_to_json, triplet_to_pair)


def test_canonical_form_merges_and_sorts():
    m = SignedMeasure(((2.0, 1.0), (1.0, 3.0), (2.0, -1.0), (0.5, 0.0)))
    assert m.atoms == ((1.0, 3.0),)
    assert SignedMeasure.dirac(1.0, 2.0) + SignedMeasure.dirac(1.0, -2.0) == SignedMeasure()


def test_hahn_jordan_disjoint_atoms():
    pos, neg = hahn_jordan(SignedMeasure.dirac(1.0) - SignedMeasure.dirac(2.0))
    assert pos == SignedMeasure.dirac(1.0)
    assert neg == SignedMeasure.dirac(2.0)


def test_hahn_jordan_cauchy_tail_minus_atoms():
    c, p, lam = 4.0, 1.0, 1.0
    nu = SignedMeasure.kernel(CauchyLevyTail(), c) - SignedMeasure(((-lam, p), (lam, p)))
    pos, neg = hahn_jordan(nu)
    assert neg == SignedMeasure(((-lam, p), (lam, p)))
    assert pos == SignedMeasure.kernel(CauchyLevyTail(), c)


def test_hahn_jordan_fm_levy_negative_inside():
    # b = 1/16: the signed density is negative near 0, positive beyond 2 sqrt(b) = 1/2
    pos, neg = hahn_jordan(fm_quasi_levy_measure(1 / 16))
    assert not neg.is_zero
    assert float(neg.density(0.1)) > 0
    assert float(neg.density(0.6)) == 0.0
    assert float(pos.density(0.6)) > 0
    xs = np.array([0.05, 0.1, 0.3, 0.45, 0.7, 2.0])
    assert np.allclose(pos.density(xs) - neg.density(xs), fm_quasi_levy_measure(1 / 16).density(xs))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.fractions(-5, 5, max_denominator=20)),
                max_size=8))
def test_hahn_jordan_reassembles(atoms):
    nu = SignedMeasure(tuple((Fraction(x), w) for x, w in atoms))
    pos, neg = hahn_jordan(nu)
    assert pos - neg == nu
    assert all(w > 0 for _, w in pos.atoms + neg.atoms)
    assert not {x for x, _ in pos.atoms} & {x for x, _ in neg.atoms}


def test_total_variation_atoms():
    assert total_variation(SignedMeasure.dirac(1.0) - SignedMeasure.dirac(2.0)) == 2


def test_total_variation_bernoulli_atoms():
    # a = 1/4: weights -(1/m)(-1/3)^m, so |nu| = sum (1/m)(1/3)^m
    a = Fraction(1, 4)
    r = a / (a - 1)
    nu = SignedMeasure(tuple((m, -(r ** m) / m) for m in range(1, 21)))
    want = sum(Fraction(1, m) * Fraction(1, 3) ** m for m in range(1, 21))
    assert total_variation(nu) == want


def test_total_variation_cauchy_tail_half_line():
    nu = SignedMeasure.kernel(CauchyLevyTail(), 1.0)
    assert np.isclose(total_variation(nu, (1.0, math.inf)), 1 / math.pi, atol=1e-10)
    with pytest.raises(SingularWindow):
        total_variation(nu, (-1.0, 1.0))


def test_moments():
    c = 1.7
    assert np.isclose(moment(SignedMeasure.dirac(c), 3), c ** 3)
    semi = SignedMeasure.kernel(SemicircleArc(0.0, 1.0))
    # Catalan numbers: m2 = 1, m4 = 2
    assert np.isclose(moment(semi, 2), 1.0, atol=1e-10)
    assert np.isclose(moment(semi, 4), 2.0, atol=1e-10)
    lam = Fraction(3, 7)
    assert moment(SignedMeasure.dirac(1, lam / 2), 2) == lam / 2
    with pytest.raises(DivergentMoment):
        moment(SignedMeasure.kernel(PoissonKernel(1.0)), 1)


def test_semicircle_moment_against_direct_quadrature():
    semi = SignedMeasure.kernel(SemicircleArc(0.5, 2.0))
    ref, _ = integrate.quad(lambda x: x ** 3 * math.sqrt(8 - (x - 0.5) ** 2) / (4 * math.pi),
                            0.5 - math.sqrt(8), 0.5 + math.sqrt(8))
    assert np.isclose(moment(semi, 3), ref, atol=1e-9)


def test_pair_to_triplet_semicircle():
    t = pair_to_triplet(FreeCharPair(0.3, SignedMeasure.dirac(0, 2.0)))
    assert (t.a, t.nu, t.gamma) == (2.0, SignedMeasure(), 0.3)


def test_pair_to_triplet_cauchy():
    a = 1.5
    t = pair_to_triplet(FreeCharPair(0.0, SignedMeasure.kernel(PoissonKernel(1.0), a)))
    assert t.a == 0
    assert t.nu == SignedMeasure.kernel(CauchyLevyTail(), a)
    assert abs(t.gamma) < 1e-12


def test_pair_to_triplet_mp_drift_convention():
    # R = lam z / (1 - z) forces gamma = lam under the [-1, 1] compensator
    lam = Fraction(2, 3)
    t = pair_to_triplet(FreeCharPair(lam / 2, SignedMeasure.dirac(1, lam / 2)))
    assert t.a == 0 and t.nu == SignedMeasure.dirac(1, lam) and t.gamma == lam


def test_triplet_to_pair_dilated_mp():
    lam, c = Fraction(1), Fraction(2)
    p = triplet_to_pair(FreeTriplet(0, SignedMeasure.dirac(c, lam), 0))
    assert p.b == lam * c / (1 + c * c)
    assert p.tau == SignedMeasure.dirac(c, lam * c * c / (1 + c * c))


def test_triplet_to_pair_gamma_family():
    a, s2 = 1.0, 0.25
    p = triplet_to_pair(FreeTriplet(-s2, SignedMeasure.kernel(CauchyLevyTail(), a), 0.0))
    assert abs(p.b) < 1e-12
    want = SignedMeasure.kernel(PoissonKernel(1.0), a) - SignedMeasure.dirac(0, s2)
    assert measures_close(p.tau, want, 1e-12)


def library_triplets():
    return [
        Semicircle(0.2, 1.3).triplet(),
        Cauchy(2.0).triplet(),
        MP(1.0, 0.25).triplet(),
        MP(-3.0, 2.0).triplet(),
        MP(0.5, 1.5).triplet(),
        PointMass(0.7).triplet(),
        rho_acl(1.0, 1.0, 0.25).triplet(),
        rho_acl(3.0, -2.0, 0.5).triplet(),
        gamma_as(1.0, 0.25).triplet(),
        smp_triplet(1, -1),
        smp_triplet(2, 2),
        two_mp_triplet(1, 2, 3),
        FreeTriplet(0.0, fm_quasi_levy_measure(0.5), 0.0),
    ]


@pytest.mark.parametrize("t", library_triplets())
def test_round_trip_triplet_pair_triplet(t):
    back = pair_to_triplet(triplet_to_pair(t))
    assert np.isclose(float(back.a), float(t.a), atol=1e-10)
    assert np.isclose(float(back.gamma), float(t.gamma), atol=1e-10)
    xs = np.array([-3.0, -0.7, 0.2, 0.9, 2.5])
    assert np.allclose(back.nu.density(xs), t.nu.density(xs), atol=1e-10)
    assert measures_close(SignedMeasure(back.nu.atoms), SignedMeasure(t.nu.atoms), 1e-10)


def test_round_trip_pair_free_meixner():
    p = FreeMeixner(0.5, 0.5).pair()
    back = triplet_to_pair(pair_to_triplet(p))
    assert np.isclose(back.b, p.b, atol=1e-10)
    xs = np.linspace(-2, 3, 9)
    assert np.allclose(back.tau.density(xs), p.tau.density(xs), atol=1e-10)


def test_quasi_levy_accepts_library_rejects_cubic():
    for t in library_triplets():
        QuasiLevyMeasure.check(t.nu)
    with pytest.raises(NonIntegrable):
        QuasiLevyMeasure.check(SignedMeasure.kernel(PowerLaw(3.0, -1.0, 1.0)))


def test_quasi_levy_integral_value():
    # int (1 ^ x^2) dx/(pi x^2) = 2/pi + 2/pi
    q = QuasiLevyMeasure.check(SignedMeasure.kernel(CauchyLevyTail(), 1.0))
    assert np.isclose(q.integral, 4 / math.pi, atol=1e-8)


def test_json_round_trip():
    t = rho_acl(1.0, 1.0, 0.25).triplet()
    assert from_json(triplet_to_json(t)) == t
    p = gamma_as(1.0, 0.25).pair()
    assert from_json(pair_to_json(p)) == p
