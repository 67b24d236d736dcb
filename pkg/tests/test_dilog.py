"""Dilogarithm, its single-valued totalization, and the volume of ideal
tetrahedra.  mpmath's polylog is the independent oracle throughout."""

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fslab.dilog import (
    BoundedFunction2,
    bloch_wigner,
    d3_infinity,
    dilog_symmetry_residuals,
    li2,
    spence_abel_residual,
    v_max,
    vol_p1,
    vol_p1_batch,
)

mp.mp.dps = 30

# Frozen 30-digit oracle: the maximal Bloch-Wigner value, attained at the
# primitive sixth root of unity (computed with mpmath).
V_MAX_ORACLE = 1.01494160640965362502120255427


def oracle_li2(z: complex) -> complex:
    return complex(mp.polylog(2, mp.mpc(z)))


def oracle_bw(z: complex) -> float:
    z = mp.mpc(z)
    if z == 0 or z == 1:
        return 0.0
    return float(mp.im(mp.polylog(2, z)) + mp.arg(1 - z) * mp.log(abs(z)))


# ----------------------------------------------------------------------
# Li2 against mpmath
# ----------------------------------------------------------------------

def test_li2_against_mpmath_random():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(300):
        z = complex(*rng.normal(size=2)) * rng.choice([0.1, 0.9, 1.5, 10.0])
        got, want = li2(z), oracle_li2(z)
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    assert worst < 5e-15


def test_li2_special_values():
    assert abs(li2(0)) == 0.0
    assert abs(li2(1) - np.pi**2 / 6) < 1e-15
    assert abs(li2(-1) + np.pi**2 / 12) < 1e-15
    assert abs(li2(0.5) - (np.pi**2 / 12 - np.log(2) ** 2 / 2)) < 1e-15
    # frozen mpmath literal
    assert abs(li2(0.3 + 0.4j) - (0.2665968667427404 + 0.4613628918191090j)) < 1e-14


def test_li2_vectorized():
    z = np.array([0.3, -2.0 + 1j, 0.9j])
    assert np.allclose(li2(z), [li2(w) for w in z], atol=1e-15)


# ----------------------------------------------------------------------
# Bloch-Wigner
# ----------------------------------------------------------------------

def test_bloch_wigner_against_mpmath():
    rng = np.random.default_rng(2)
    for _ in range(300):
        z = complex(*rng.normal(size=2)) * rng.choice([0.2, 1.0, 4.0])
        assert abs(bloch_wigner(z) - oracle_bw(z)) < 1e-13


def test_bloch_wigner_totalized():
    # real arguments and the removable points give exactly 0
    assert bloch_wigner(0.0) == 0.0
    assert bloch_wigner(1.0) == 0.0
    for x in (-3.0, 0.25, 0.999, 17.0):
        assert abs(bloch_wigner(x)) < 1e-15
    assert abs(bloch_wigner(2 + 1j) - 0.5116663985538234959678962) < 1e-14


def test_v_max_matches_frozen_oracle():
    assert abs(v_max() - V_MAX_ORACLE) < 1e-12
    w = np.exp(1j * np.pi / 3)
    assert abs(bloch_wigner(w) - V_MAX_ORACLE) < 1e-12
    # it is the global max: random sampling never exceeds it
    rng = np.random.default_rng(3)
    z = rng.normal(size=2000) + 1j * rng.normal(size=2000)
    assert np.max(np.abs(bloch_wigner(z))) <= V_MAX_ORACLE + 1e-12


@settings(max_examples=150, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-2, max_magnitude=50,
                          allow_nan=False, allow_infinity=False))
def test_bloch_wigner_antisymmetry_conjugate(z):
    assert abs(bloch_wigner(np.conj(z)) + bloch_wigner(z)) < 1e-12


def test_six_symmetries():
    rng = np.random.default_rng(4)
    z = rng.normal(size=500) + 1j * rng.normal(size=500)
    res = dilog_symmetry_residuals(z)
    assert len(res) == 6
    for key, vals in res.items():
        assert np.max(vals) < 1e-10, key


def test_spence_abel():
    rng = np.random.default_rng(5)
    a = rng.normal(size=200) + 1j * rng.normal(size=200)
    b = rng.normal(size=200) + 1j * rng.normal(size=200)
    keep = (np.abs(a) > 1e-2) & (np.abs(b) > 1e-2) & (np.abs(1 - a) > 1e-2) \
        & (np.abs(1 - b) > 1e-2) & (np.abs(a - b) > 1e-2)
    res = spence_abel_residual(bloch_wigner, a[keep], b[keep])
    assert np.max(np.abs(res)) < 1e-10


def test_spence_abel_guard():
    with pytest.raises(ValueError):
        spence_abel_residual(bloch_wigner, 1e-12, 0.5)


# ----------------------------------------------------------------------
# The five-term boundary operator
# ----------------------------------------------------------------------

def test_d3_infinity_constant():
    f = BoundedFunction2(lambda u, w: 2.5, 2.5, "const")
    assert d3_infinity(f, (1 + 1j, 2.0, -3.0, 4j, 0.5), 1) == 2.5
    assert d3_infinity(f, (1 + 1j, 2.0, -3.0, 4j, 0.5), -1) == 2.5


def test_d3_infinity_rejects_zero_coordinate():
    with pytest.raises(ValueError):
        d3_infinity(lambda u, w: 0.0, (0.0, 1.0, 1.0, 1.0, 1.0), 1)


def test_d3_infinity_term_structure():
    # a function reading off its first argument exposes the five arguments
    calls = []

    def probe(u, w):
        calls.append((complex(u), complex(w)))
        return 0.0

    x = (0.7 + 0.2j, 1.3, -0.4 + 1j, 2.0 - 1j, 0.9j)
    a1, a2, b1, b2, c1 = x
    eps = -1
    d3_infinity(probe, x, eps)
    c2 = eps * a1 * b2 * c1 / (a2 * b1)
    expected = [
        (eps * a1 * c1 / (a2 * b1), c1 / a2),
        (c1 / b1, eps * b2 * c1 / (a2 * b1)),
        (c1, c2),
        (b1, b2),
        (a1, a2),
    ]
    assert len(calls) == 5
    for got, want in zip(calls, expected):
        assert abs(got[0] - want[0]) < 1e-14 and abs(got[1] - want[1]) < 1e-14


# ----------------------------------------------------------------------
# Ideal-tetrahedron volume on the projective line
# ----------------------------------------------------------------------

def test_vol_p1_is_bw_of_cross_ratio():
    rng = np.random.default_rng(6)
    for _ in range(100):
        p = rng.normal(size=4) + 1j * rng.normal(size=4)
        cr = ((p[0] - p[2]) * (p[1] - p[3])) / ((p[0] - p[3]) * (p[1] - p[2]))
        assert abs(vol_p1(*p) - oracle_bw(cr)) < 1e-12


def test_vol_p1_infinity_and_degenerate():
    # [inf, 0, 1, z] has cross-ratio z
    z = 0.3 + 0.8j
    assert abs(vol_p1(None, 0.0, 1.0, z) - oracle_bw(z)) < 1e-13
    # repeated points give zero volume
    assert vol_p1(1.0, 1.0, 2.0, 3j) == 0.0
    # homogeneous lifts are accepted
    v = vol_p1(np.array([2.0, 1.0]), 0.0, 1.0, z)
    assert abs(v - vol_p1(0.5, 0.0, 1.0, z)) < 1e-14


def test_vol_p1_batch_matches_scalar():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(50, 4, 2)) + 1j * rng.normal(size=(50, 4, 2))
    got = vol_p1_batch(pts)
    want = np.array([vol_p1(*row) for row in pts])
    assert np.max(np.abs(got - want)) < 1e-12


def test_vol_p1_bounded_by_v_max():
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(2000, 4, 2)) + 1j * rng.normal(size=(2000, 4, 2))
    assert np.max(np.abs(vol_p1_batch(pts))) <= v_max() + 1e-12
