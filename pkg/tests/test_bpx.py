import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeqid.bpx import (REL_SLACK, PhiPair, add_pairs, classical_exponent, classify,
                         extended_bp, grid_mass, h_threshold, mu_box_density, mu_box_phi,
                         mu_box_r, mu_star_cf, mu_star_density, polya_A)
from freeqid.errors import NotCertified, ValidityError
from freeqid.families import Cauchy, Semicircle
from freeqid.kernels import PoissonKernel, SemicircleArc
from freeqid.measures import FreeTriplet, SignedMeasure
from freeqid.transforms import invert_k


def test_h_threshold_values():
    assert np.isclose(h_threshold(0.25), 1.0)
    assert np.isclose(h_threshold(1.0), 3.0)
    assert np.isclose(h_threshold(1 / 8), math.sqrt(0.25 * 1.5))
    with pytest.raises(ValueError):
        h_threshold(0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 5), st.floats(0.1, 3), st.floats(0, 1), st.floats(-1, 1))
def test_inequality_chain(p, lam, extra, s):
    # A(z) >= (4p+1) p lam^2 s^2 - 4 p lam c s - 2 p lam^2 + c^2 with s = sin(lam z),
    # and that quadratic is nonnegative on [-1, 1] once c >= lam h(p)
    c = lam * h_threshold(p) * (1 + extra)
    q = (4 * p + 1) * p * lam ** 2 * s * s - 4 * p * lam * c * s - 2 * p * lam ** 2 + c * c
    assert q >= -1e-9 * c * c
    z = math.asin(s) / lam
    pair = PhiPair.two_point(c, p, lam)
    assert float(polya_A(pair, z)) >= q - 1e-9 * c * c


def test_polya_a_is_second_log_derivative_ratio():
    pair = PhiPair.critical(1.0, 1.0)
    zs = np.linspace(0.2, 8, 50)
    h = 1e-4
    phi = mu_star_cf(pair, zs)
    fd = (mu_star_cf(pair, zs + h) - 2 * phi + mu_star_cf(pair, zs - h)) / h ** 2
    assert np.max(np.abs(fd - polya_A(pair, zs) * phi) / np.abs(polya_A(pair, zs) * phi)) <= 1e-6


def test_polya_a_generic_route_matches_two_point():
    # nu given as a density-free sum of four atoms forces the generic integral route
    nu = SignedMeasure(((-2.0, 0.1), (-1.0, 0.3), (1.0, 0.3), (2.0, 0.1)))
    pair = PhiPair(5.0, nu)
    z = np.array([0.3, 1.7, 4.0])
    want = (2 * (0.3 * np.cos(z) + 0.1 * 4 * np.cos(2 * z))
            + (-5.0 + 2 * (0.3 * np.sin(z) + 0.1 * 2 * np.sin(2 * z))) ** 2)
    assert np.allclose(polya_A(pair, z), want)


def test_mu_star_cf_value():
    pair = PhiPair.critical(1.0, 1.0)
    assert np.isclose(mu_star_cf(pair, math.pi), math.exp(-4 * math.pi + 4))
    assert mu_star_cf(pair, 0.0) == 1.0


def test_classify_critical_point():
    rep = classify(PhiPair.critical(1.0, 1.0))
    assert [rep.in_phi.status, rep.in_phi_plus.status, rep.in_phi_star.status,
            rep.in_phi_boxplus.status] == ["yes", "no", "yes", "yes"]
    assert set(rep.to_json()) == {"in_phi", "in_phi_plus", "in_phi_star", "in_phi_boxplus"}


def test_classify_boundary_equality():
    # p = 9/4 is the corner where c = 4 lam sqrt(p) equals lam h(p)
    p, lam = 2.25, 1.0
    assert math.isclose(4 * lam * math.sqrt(p), lam * h_threshold(p))
    assert classify(PhiPair.critical(p, lam)).in_phi_star.status == "yes"
    assert REL_SLACK <= 1e-12


def test_classify_unknown_star():
    rep = classify(PhiPair.two_point(8.0, 4.0, 1.0))
    assert rep.in_phi_star.status == "unknown" and "A(" in rep.in_phi_star.witness
    assert rep.in_phi_boxplus.status == "yes"


def test_classify_pure_cauchy_and_density_nu():
    rep = classify(PhiPair(1.0))
    assert rep.in_phi_plus.status == "yes" and rep.in_phi_star.status == "yes"
    small = SignedMeasure.kernel(SemicircleArc(0.0, 1.0), 0.1)
    assert classify(PhiPair(1.0, small)).in_phi_plus.status == "yes"
    big = SignedMeasure.kernel(SemicircleArc(0.0, 1.0), 50.0)
    rep = classify(PhiPair(1.0, big))
    assert rep.in_phi_plus.status == "no" and rep.in_phi_boxplus.status == "unknown"


def test_classify_infinite_second_moment():
    # Poisson-kernel nu has no second moment, so the pair is outside the base class
    rep = classify(PhiPair(1.0, SignedMeasure.kernel(PoissonKernel(1.0), 0.1)))
    assert rep.in_phi.status == "no"


def test_classify_negative_nu():
    rep = classify(PhiPair(1.0, -SignedMeasure(((-1.0, 1.0), (1.0, 1.0)))))
    assert rep.in_phi.status == "no" and rep.in_phi_star.status == "no"


def test_phi_pair_requires_symmetry():
    with pytest.raises(ValueError):
        PhiPair(1.0, SignedMeasure.dirac(1.0))


def test_add_pairs_closure():
    out, rep = add_pairs(PhiPair.critical(1.0, 1.0), PhiPair.critical(0.5, 2.0))
    assert rep.in_phi_star.status == "yes" and rep.in_phi_boxplus.status == "yes"
    assert out.c == 4.0 + 8 * math.sqrt(0.5)


def test_mu_box_r_matches_atomic_formula():
    c, p, lam = 4.0, 1.0, 1.0
    pair = PhiPair.two_point(c, p, lam)
    z = np.array([0.2 - 0.3j, -0.5 - 0.1j])
    want = -1j * c * z - 2 * p * lam ** 2 * z ** 2 / (1 - lam ** 2 * z ** 2)
    assert np.allclose(mu_box_r(pair, z), want, atol=1e-13)
    assert np.allclose(z * mu_box_phi(pair).value(1 / z), want, atol=1e-13)


def test_mu_star_density_against_mpmath():
    pair = PhiPair.critical(1.0, 1.0)
    c, p, lam = pair.c, 1.0, 1.0

    def oracle(x):
        f = lambda t: mpmath.exp(-c * t + 2 * p * (1 - mpmath.cos(lam * t))) * mpmath.cos(t * x)
        return float(mpmath.quad(f, mpmath.linspace(0, 40, 41)) / mpmath.pi)

    xs = np.array([0.0, 0.7, 3.0, 12.0])
    g = mu_star_density(pair, xs)
    want = np.array([oracle(x) for x in xs])
    assert np.max(np.abs(g.fs - want)) <= 1e-9
    assert g.meta["convex_on_grid"]


def test_mu_star_density_pure_cauchy():
    xs = np.linspace(-3, 3, 7)
    g = mu_star_density(PhiPair(2.0), xs)
    assert np.allclose(g.fs, Cauchy(2.0).density(xs), atol=1e-15)


def test_mu_star_density_uncertified():
    with pytest.raises(NotCertified):
        mu_star_density(PhiPair.two_point(8.0, 4.0, 1.0), [0.0])


def test_star_and_box_masses_and_symmetry():
    pair = PhiPair.critical(1.0, 1.0)
    xs = np.arange(-50, 50.0001, 0.05)
    star = mu_star_density(pair, xs)
    assert np.isclose(grid_mass(star, pair.c), 1.0, atol=1e-3)
    assert np.allclose(star.fs, star.fs[::-1], atol=1e-12)
    box = mu_box_density(pair, xs)
    assert np.isclose(grid_mass(box, pair.c), 1.0, atol=1e-3)
    assert np.allclose(box.fs, box.fs[::-1], atol=1e-10)


def test_mu_box_density_matches_direct_inversion():
    pair = PhiPair.critical(0.5, 2.0)
    x, y = 0.4, 1e-3
    w = invert_k(mu_box_phi(pair), complex(x, y))
    g = mu_box_density(pair, [x], (y,))
    assert np.isclose(g.fs[0], -(1 / w).imag / math.pi)


def test_classical_exponent_gaussian_and_cauchy():
    z = np.linspace(-3, 3, 13)
    t = Semicircle(0.5, 2.0).triplet()
    assert np.allclose(classical_exponent(t, z), 0.5j * z - z * z)
    assert np.allclose(classical_exponent(Cauchy(1.5).triplet(), z), -1.5 * np.abs(z), atol=1e-12)


@pytest.mark.parametrize("p,lam", [(1.0, 1.0), (0.25, 2.0)])
def test_extended_bp_against_closed_forms(p, lam):
    m, s2 = 0.3, 1.2
    pair = PhiPair.critical(p, lam)
    cl, fr = extended_bp(Semicircle(m, s2).triplet(), pair)
    z = np.linspace(-4, 4, 17)
    c = pair.c
    want = 1j * m * z - s2 * z * z / 2 - c * np.abs(z) + 2 * p * (1 - np.cos(lam * z))
    assert np.allclose(cl.log_cf(z), want, atol=1e-12)
    zl = np.array([0.1 - 0.3j, -0.2 - 0.05j])
    want_r = m * zl + s2 * zl ** 2 - 1j * c * zl - 2 * p * lam ** 2 * zl ** 2 / (1 - lam ** 2 * zl ** 2)
    assert np.allclose(fr.r(zl), want_r, atol=1e-12)


def test_extended_bp_rejects():
    with pytest.raises(ValidityError):
        extended_bp(FreeTriplet(-1.0, SignedMeasure(), 0.0), PhiPair.critical(1.0, 1.0))
    with pytest.raises(NotCertified):
        extended_bp(Semicircle(0, 1).triplet(), PhiPair.two_point(1.0, 4.0, 1.0))
