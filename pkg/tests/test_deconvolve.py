import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import gamma_quarter_density, rho_quarter_density

from freeqid.deconvolve import (GammaAS, RhoACL, classify_triplet, deconvolve, fm_negative_mass,
                                fm_quasi_levy_density, gamma_as, mp_r_series, multi_mp_triplet,
                                multi_mp_weights, r_series, r_t_family, rho_acl, smp_triplet,
                                two_mp_triplet, two_mp_weights)
from freeqid.errors import DuplicateNode, ValidityError
from freeqid.families import MP, Cauchy, FreeConv, Semicircle
from freeqid.transforms import invert_k, pick_check, r_from_phi, r_from_triplet


def test_rho_density_matches_closed_form():
    rho = rho_acl(1.0, 1.0, 0.25)
    xs = np.linspace(-5, 5, 401)
    want = np.array([rho_quarter_density(x) for x in xs])
    assert np.max(np.abs(rho.density(xs) - want)) <= 1e-13


def test_rho_density_at_three_quarters():
    assert np.isclose(rho_acl(1.0, 1.0, 0.25).density(0.75), 2 / (5 * math.pi), atol=1e-14)


def test_gamma_density_matches_closed_form():
    g = gamma_as(1.0, 0.25)
    xs = np.linspace(-5, 5, 401)
    want = np.array([gamma_quarter_density(x) for x in xs])
    assert np.max(np.abs(g.density(xs) - want)) <= 1e-13
    assert np.isclose(g.density(0.0), 2 / math.pi, atol=1e-15)


def test_rho_phi_equals_cauchy_minus_mp():
    spec = deconvolve(Cauchy(1.0), MP(1.0, 0.25))
    zs = np.array([0.3 + 0.5j, -2 + 1j, 4 + 0.01j])
    assert np.allclose(spec.phi.value(zs), rho_acl(1.0, 1.0, 0.25).phi().value(zs), atol=1e-14)
    assert np.allclose(spec.reconstruct().value(zs), Cauchy(1.0).phi().value(zs), atol=1e-14)


def test_rho_f_transform_inverts_k():
    rho = rho_acl(2.0, -1.0, 0.5)
    zs = np.array([0.1 + 0.2j, -3 + 0.05j, 5 + 4j])
    w = rho.f_transform(zs)
    assert np.allclose(w + rho.phi().value(w), zs, atol=1e-12)
    assert np.allclose(invert_k(rho.phi(), zs), w, atol=1e-10)


def test_validity_bounds():
    with pytest.raises(ValidityError, match="lambda"):
        rho_acl(1.0, 1.0, 1.0)
    with pytest.raises(ValidityError):
        gamma_as(1.0, 0.3)
    rho_acl(1.0, 1.0, 0.25)   # boundary is allowed
    gamma_as(1.0, 0.25)


def test_non_fid_witness_positive_near_atom():
    rho = rho_acl(1.0, 1.0, 0.25)
    y = 0.1
    assert np.isclose(rho.non_fid_witness(y), -1.0 + 0.25 / y)
    assert rho.non_fid_witness(y) > 0


@pytest.mark.parametrize("a,c,lam", [(1.0, 1.0, 0.25), (2.0, 0.5, 3.0), (1.0, -2.0, 0.05)])
def test_pick_passes_inside(a, c, lam):
    rep = pick_check(RhoACL(a, c, lam).phi(), exact=RhoACL(a, c, lam).pick_exact)
    assert rep.passed, rep.witnesses


@pytest.mark.parametrize("a,c,lam", [(1.0, 1.0, 1.0), (1.0, 2.0, 0.5)])
def test_pick_fails_outside(a, c, lam):
    rep = pick_check(RhoACL(a, c, lam).phi())
    assert not rep.passed and rep.witnesses


def test_pick_gamma_family():
    assert pick_check(GammaAS(1.0, 0.25).phi()).passed
    bad = pick_check(GammaAS(1.0, 1.0).phi())
    assert not bad.passed and bad.witnesses


def test_fm_levy_density_sign():
    xs = np.linspace(0.01, 0.49, 50)
    assert np.min(fm_quasi_levy_density(1 / 16, xs)) < 0
    assert np.all(fm_quasi_levy_density(0.5, np.linspace(0.01, 10, 1000)) > 0)
    with pytest.raises(ValueError):
        fm_quasi_levy_density(0.5, 0.0)


def test_fm_negative_mass_grows_like_inverse_cutoff():
    m1 = fm_negative_mass(1 / 16, 1e-3)
    m2 = fm_negative_mass(1 / 16, 1e-4)
    # near 0 the density is about -(4 - 2 sqrt 2)/(pi x^2) on both sides
    lead = 2 * (4 - 2 * math.sqrt(2)) / math.pi
    assert np.isclose(m2 - m1, lead * (1e4 - 1e3), rtol=1e-3)
    assert fm_negative_mass(0.5, 1e-3) == 0.0


def test_r_series_identities():
    t = Fraction(1, 3)
    p, m = r_series(t, 1), r_series(t, -1)
    assert [a + b for a, b in zip(p, m)] == [0, 0, 2] + [0] * 18
    assert m[4] == -t
    assert p[6] == t ** 2


def test_mu_plus_series_is_sum_of_mp_series():
    t = Fraction(1, 4)
    s = Fraction(1, 2)
    lam = 1 / (2 * t)
    tot = [a + b for a, b in zip(mp_r_series(s, lam, 10), mp_r_series(-s, lam, 10))]
    assert tot == r_series(t, 1, 10)


def test_mu_plus_model_r_transform_matches_series():
    t = 0.04
    fam = r_t_family(t, 1)
    zs = np.array([0.3 - 0.2j, -0.5 - 0.1j, 0.1 - 0.4j])
    want = zs ** 2 / (1 - t * zs ** 2)
    assert np.allclose(r_from_phi(fam.model.phi(), zs), want, atol=1e-12)
    assert np.allclose(r_from_triplet(fam.model.triplet(), zs), want, atol=1e-12)


def test_mu_minus_model_and_cutoff():
    t = 0.05
    fam = r_t_family(t, -1)
    zs = np.array([0.3 - 0.2j, 0.1 - 0.4j])
    want = zs ** 2 - t * zs ** 4 / (1 - t * zs ** 2)
    assert np.allclose(r_from_phi(fam.model.phi(), zs), want, atol=1e-12)
    assert r_t_family(0.5, -1).model is None


def test_two_mp_weights_examples():
    assert two_mp_weights(1, 2, 3) == (8, Fraction(-1, 4))
    a, b = two_mp_weights(Fraction(1), Fraction(3), Fraction(0))
    assert a + b == 1
    a, b = two_mp_weights(1, 2, 1.5)
    assert a > 0 and b > 0
    t = two_mp_triplet(1, 2, 3)
    assert dict(t.nu.atoms) == {1: 8, 2: Fraction(-1, 4)}
    assert classify_triplet(t).classical_excluded


@settings(max_examples=80, deadline=None)
@given(st.fractions(-5, 5, max_denominator=9), st.fractions(-5, 5, max_denominator=9),
       st.fractions(-6, 6, max_denominator=9))
def test_two_mp_weights_properties(u, v, x):
    assume(u != 0 and v != 0 and u < v)
    a, b = two_mp_weights(u, v, x)
    assert a + b == (u * u * v * v - 3 * u * v * x * x + (u + v) * x ** 3) / (u * u * v * v)
    if x < u:
        assert a < 0 < b
    elif u < x < v:
        assert a > 0 and b > 0
    elif x > v:
        assert a > 0 > b


def test_smp_triplet_r_transform():
    u, x = 0.5, -1.0
    t = smp_triplet(u, x)
    zs = np.array([0.3 - 0.2j, -1 - 0.5j])
    want = x ** 3 * u ** 2 * zs ** 2 + (1 - x) ** 3 * u * zs / (1 - u * zs)
    assert np.allclose(r_from_triplet(t, zs), want, atol=1e-13)


def test_multi_mp_weights_exact():
    w = multi_mp_weights([1, 2, 3, 4])
    assert w == [Fraction(-1, 6), Fraction(4), Fraction(-27, 2), Fraction(32, 3)]
    assert sum(w) == 1
    with pytest.raises(DuplicateNode):
        multi_mp_weights([1, 2, 2])


def test_multi_mp_small_examples():
    assert multi_mp_weights([-1, 1]) == [Fraction(1, 2), Fraction(1, 2)]
    assert multi_mp_weights([1, 2]) == [-1, 2]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(-6, 6, max_denominator=7).filter(lambda u: u != 0),
                min_size=2, max_size=6, unique=True))
def test_multi_mp_lagrange_identities(us):
    # sum_k u_k^m / prod_{i != k}(u_k - u_i) is 0 for m < n-1 and 1 for m = n-1
    w = multi_mp_weights(us)
    n = len(us)
    assert sum(w) == 1
    for r in range(1, n):
        assert sum(t / u ** r for t, u in zip(w, us)) == 0
    if n >= 3:
        assert max(w) > 0 > min(w)


def test_multi_mp_symmetric_nodes():
    w = multi_mp_weights([-3, -1, 1, 3])
    assert w == w[::-1]


def test_multi_mp_triplet_r_equals_weighted_mp_sum():
    us = [1, 2, 3]
    t = multi_mp_triplet(us)
    w = multi_mp_weights(us)
    z = np.array([0.1 - 0.1j, -0.2 - 0.05j])
    want = sum(float(wk) * u * z / (1 - u * z) for wk, u in zip(w, us))
    assert np.allclose(r_from_triplet(t, z), want, atol=1e-13)


def test_classify_triplet():
    g = classify_triplet(gamma_as(1.0, 0.25).triplet())
    assert g.gaussian_negative and not g.plain_fid
    r = classify_triplet(rho_acl(1.0, 1.0, 0.25).triplet())
    assert not r.gaussian_negative and not r.plain_fid
    assert classify_triplet(Semicircle(0, 1).triplet()).plain_fid
    m = classify_triplet(multi_mp_triplet([1, 2, 3, 4]))
    assert not m.classical_excluded and not m.plain_fid
    assert classify_triplet(MP(1, 1).triplet()).plain_fid


def test_free_conv_of_mps_is_fid():
    fc = FreeConv((MP(0.5, 2.0), MP(-0.5, 2.0)))
    assert classify_triplet(fc.triplet()).plain_fid


def test_smp_triplet_examples():
    t = smp_triplet(1, -1)
    assert t.a == -1 and t.nu.atoms == ((1, 8),)
    assert classify_triplet(t).gaussian_negative
    t = smp_triplet(1, 2)
    assert t.a == 8 and t.nu.atoms == ((1, -1),)
    assert classify_triplet(t).classical_excluded
    t = smp_triplet(1, Fraction(1, 2))
    assert t.a == Fraction(1, 8) and t.nu.atoms == ((1, Fraction(1, 8)),)
    assert classify_triplet(t).plain_fid
