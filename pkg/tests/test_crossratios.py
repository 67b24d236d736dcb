"""Cross-ratios of isotropic configurations and their identity systems."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fslab.forms import ADMISSIBLE, make_space, random_group_element
from fslab.crossratios import (
    ConfigTuple,
    GenericityError,
    cross_ratios4,
    cross_ratios5,
    delta_disc,
    delta_sqrt,
    derived_c2,
    gamma_lin,
    genericity,
    perm4_identity_residuals,
    phi_eta,
    pi3,
    pi4,
    psi_eta,
    quint_identity_residuals,
    random_generic_tuple,
)

CASES = list(ADMISSIBLE)

finite_c = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3,
                              allow_nan=False, allow_infinity=False)


def make_tuple(eps, d, r, k, seed):
    space = make_space(eps, d, r)
    return random_generic_tuple(space, k, np.random.default_rng(seed))


# ----------------------------------------------------------------------
# Construction and genericity
# ----------------------------------------------------------------------

def test_from_vectors_rejects_anisotropic():
    space = make_space(1, 0, 2)
    v = space.e(1) + 0.5 * space.f(1)  # q = 1
    with pytest.raises(ValueError):
        ConfigTuple.from_vectors(space, [space.e(2), space.f(2), v])


def test_pairings_match_omega():
    t = make_tuple(1, 1, 3, 4, 0)
    for i in range(4):
        for j in range(4):
            want = t.space.omega(t.vectors[i], t.vectors[j])
            assert abs(t.pairings[i, j] - want) < 1e-12


def test_genericity_ladder():
    space = make_space(1, 0, 3)
    rng = np.random.default_rng(2)
    # repeated point: a vanishing pairing
    t = random_generic_tuple(space, 4, rng)
    v = t.vectors
    rep = ConfigTuple.from_vectors(space, [v[0], v[0], v[2], v[3]])
    assert genericity(rep).level == "degenerate"
    # generic tuple reaches the top level
    cert = genericity(t)
    assert cert.level == "cr-generic" and cert.cr_generic and cert.failing is None
    assert cert.min_pairing > 0


def test_genericity_delta_locus():
    # four independent isotropic vectors with nonzero pairings but Delta = 0
    # (alternating case: Gamma = 1 - cr1 - cr2 = 0 forces Delta = Gamma^2 = 0)
    space = make_space(-1, 0, 3)
    e3, f3 = space.e(3), space.f(3)
    v2 = e3 + space.e(2) - space.f(2) + f3
    v3 = 0.4 * e3 + 0.5 * space.e(2) + 0.3 * space.e(1) - 0.5 * space.f(2) + 0.7 * f3
    t = ConfigTuple.from_vectors(space, [e3, f3, v2, v3])
    cert = genericity(t)
    assert cert.level == "general-position"
    assert cert.failing == "delta"
    with pytest.raises(GenericityError) as exc:
        pi3(t)
    assert "delta" in str(exc.value)


@pytest.mark.parametrize("eps,d", CASES)
@pytest.mark.parametrize("k", [4, 5])
def test_random_generic_tuple_is_generic(eps, d, k):
    space = make_space(eps, d, 3)
    for seed in range(5):
        t = random_generic_tuple(space, k, np.random.default_rng(seed))
        assert genericity(t).cr_generic


# ----------------------------------------------------------------------
# Cross-ratio values and invariance
# ----------------------------------------------------------------------

def test_cross_ratios4_formula():
    t = make_tuple(1, 0, 3, 4, 1)
    w = t.pairings
    cr0, cr1, cr2 = cross_ratios4(t)
    assert abs(cr0 - w[0, 2] * w[1, 3] / (w[0, 3] * w[1, 2])) < 1e-12
    assert abs(cr1 - w[1, 3] * w[2, 0] / (w[1, 0] * w[2, 3])) < 1e-12
    assert abs(cr2 - w[2, 1] * w[0, 3] / (w[2, 3] * w[0, 1])) < 1e-12


@pytest.mark.parametrize("eps,d", CASES)
def test_cross_ratios_group_invariant(eps, d):
    space = make_space(eps, d, 3)
    rng = np.random.default_rng(5)
    for _ in range(10):
        t = random_generic_tuple(space, 4, rng)
        g = random_group_element(space, rng)
        a = np.array(cross_ratios4(t))
        b = np.array(cross_ratios4(t.apply(g)))
        assert np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))) < 1e-9


def test_cross_ratios_scale_invariant():
    t = make_tuple(-1, 0, 2, 4, 7)
    scaled = ConfigTuple.from_vectors(
        t.space, [c * v for c, v in zip([2.0, -1j, 0.5 + 0.5j, 3.0], t.vectors)])
    a, b = np.array(cross_ratios4(t)), np.array(cross_ratios4(scaled))
    assert np.max(np.abs(a - b)) < 1e-12


def test_cross_ratios5_faces_match_subtuples():
    """The 5-tuple face cross-ratios are exactly the 4-tuple cross-ratios of
    the subconfigurations dropping points 4, 3, 2."""
    t = make_tuple(1, 1, 3, 5, 3)
    a, b, g = cross_ratios5(t)
    assert np.allclose(a, cross_ratios4(t.face(4)), atol=1e-12)
    assert np.allclose(b, cross_ratios4(t.face(3)), atol=1e-12)
    assert np.allclose(g, cross_ratios4(t.face(2)), atol=1e-12)


def test_pi3_pi4_coordinates():
    t4 = make_tuple(1, 0, 3, 4, 11)
    _, a1, a2 = cross_ratios4(t4)
    assert pi3(t4) == (a1, a2)
    t5 = make_tuple(1, 0, 3, 5, 11)
    a, b, g = cross_ratios5(t5)
    assert pi4(t5) == (a[1], a[2], b[1], b[2], g[1])


# ----------------------------------------------------------------------
# Scalar helper identities (hypothesis)
# ----------------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(finite_c, finite_c, st.sampled_from([1, -1]))
def test_phi_eta_sum_and_product(z1, z2, eps):
    gam = gamma_lin(z1, z2)
    dlt = delta_disc(z1, z2, eps)
    root = delta_sqrt(z1, z2, eps)
    assert abs(root * root - dlt) < 1e-9 * max(1.0, abs(dlt))
    plus = phi_eta(z1, z2, eps, +1)
    minus = phi_eta(z1, z2, eps, -1)
    assert abs(plus + minus - root) < 1e-9 * max(1.0, abs(root))
    assert abs(plus - minus - gam) < 1e-9 * max(1.0, abs(gam))
    prod_expected = -((1 + eps) / 2.0) * z1 * z2
    assert abs(plus * minus - prod_expected) < 1e-8 * max(1.0, abs(prod_expected), abs(plus * minus))


def test_delta_sqrt_alternating_branch():
    # for the alternating case the square root of Delta = Gamma^2 is Gamma itself
    z1, z2 = 0.3 + 1.1j, -0.7 + 0.2j
    assert abs(delta_sqrt(z1, z2, -1) - gamma_lin(z1, z2)) < 1e-14


def test_derived_c2():
    a, b, c1, eps = (0.5 + 1j, 2.0 - 1j), (1.5j, -0.25), 0.75 + 0.5j, 1
    assert abs(derived_c2(a, b, c1, eps) - eps * a[0] * b[1] * c1 / (a[1] * b[0])) < 1e-14


def test_psi_eta_closed_form():
    a, b = (0.5 + 1j, 2.0 - 1j), (1.5j, -0.25)
    eps = 1
    c1 = 0.75 + 0.5j
    c = (c1, derived_c2(a, b, c1, eps))
    for eta in (+1, -1):
        want = (eta * phi_eta(a[0], a[1], eps, eta) * gamma_lin(b[0], b[1])
                + (a[1] * b[0] / c[0]) * gamma_lin(c[0], c[1]))
        assert abs(psi_eta(a, b, c, eps, eta) - want) < 1e-12


# ----------------------------------------------------------------------
# Identity systems (full sweeps live in the acceptance suite)
# ----------------------------------------------------------------------

@pytest.mark.parametrize("eps,d", CASES)
@pytest.mark.parametrize("r", [2, 3])
def test_perm4_identities(eps, d, r):
    space = make_space(eps, d, r)
    rng = np.random.default_rng(31)
    for _ in range(25):
        res = perm4_identity_residuals(random_generic_tuple(space, 4, rng))
        assert len(res) == 13
        assert max(res.values()) < 1e-10


@pytest.mark.parametrize("eps,d", CASES)
@pytest.mark.parametrize("r", [2, 3])
def test_quint_identities(eps, d, r):
    space = make_space(eps, d, r)
    rng = np.random.default_rng(37)
    for _ in range(25):
        res = quint_identity_residuals(random_generic_tuple(space, 5, rng))
        assert len(res) == 7
        assert max(res.values()) < 1e-10


def test_permute_and_transpose():
    t = make_tuple(1, 0, 3, 4, 13)
    p = t.permute([3, 2, 1, 0])
    assert np.allclose(p.vectors[0], t.vectors[3])
    s = t.transpose(0, 1)
    assert np.allclose(s.vectors[0], t.vectors[1])
    assert np.allclose(s.vectors[1], t.vectors[0])
    # pairing matrix follows the permutation
    assert abs(p.pairings[0, 1] - t.pairings[3, 2]) < 1e-12
