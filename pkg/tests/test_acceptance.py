"""Acceptance gate: every headline guarantee of the library, at full scale.

Each test is one guarantee, run at its stated sample count and tolerance;
``pytest -v`` therefore prints one pass/fail line per guarantee.  The slow
ones carry explicit wall-clock budgets.
"""

import json
import time

import numpy as np
import pytest

from fslab.cli import main as cli_main
from fslab.crossratios import (
    GenericityError,
    perm4_identity_residuals,
    pi3,
    pi4,
    quint_identity_residuals,
    random_generic_tuple,
)
from fslab.dilog import (
    bloch_wigner,
    d3_infinity,
    dilog_symmetry_residuals,
    spence_abel_residual,
    v_max,
)
from fslab.flags import (
    AffineFlag,
    b4_so4,
    b_n,
    b_n_j,
    cocycle_residual,
    contributing_j,
    flag_infinity,
    random_flag_tuple,
    standard_flags_so4,
)
from fslab.forms import ADMISSIBLE, make_space, random_group_element
from fslab.norms import (
    FamilyTag,
    bn_coefficient,
    dynkin_index,
    gromov_norm_bn,
    operator_norm_res2,
    sup_problem,
)
from fslab.reduction import phi3, phi4, reduce_quadruple, reduce_quintuple
from fslab.suites import _bounded_test_functions

V_REF = 1.0149416064096536


def rng_stream(tag: int, i: int) -> np.random.Generator:
    return np.random.default_rng((tag << 32) + i)


def test_four_and_five_point_identity_systems_hold_at_scale():
    """13 transposition identities and 7 face identities, 1000 tuples per
    (symmetry, middle, rank) combination, residual <= 1e-9, under 10 s."""
    t0 = time.perf_counter()
    worst = 0.0
    for eps, d in ADMISSIBLE:
        for r in (2, 3, 4):
            space = make_space(eps, d, r)
            for i in range(1000):
                t4 = random_generic_tuple(space, 4, rng_stream(1, i))
                worst = max(worst, max(perm4_identity_residuals(t4).values()))
                t5 = random_generic_tuple(space, 5, rng_stream(2, i))
                worst = max(worst, max(quint_identity_residuals(t5).values()))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-9, f"worst identity residual {worst:.3e}"
    assert elapsed < 10.0, f"identity sweep took {elapsed:.1f}s"


def test_coordinate_roundtrips_and_bulk_reductions():
    """Model-tuple coordinates roundtrip to 1e-10 (1000 draws per map) and
    1000 random quadruples + 1000 quintuples reduce per case to 1e-8,
    all under 60 s."""
    t0 = time.perf_counter()
    for eps, d in ADMISSIBLE:
        space = make_space(eps, d, 3)
        hits3 = hits4 = 0
        i = 0
        while hits3 < 1000 or hits4 < 1000:
            rng = rng_stream(3, i)
            i += 1
            a = tuple(rng.normal(size=2) + 1j * rng.normal(size=2))
            b = tuple(rng.normal(size=2) + 1j * rng.normal(size=2))
            c1 = complex(rng.normal() + 1j * rng.normal())
            if hits3 < 1000:
                try:
                    t = phi3(space, *a)
                except GenericityError:
                    continue
                got = pi3(t)
                assert max(abs(g - w) / max(1.0, abs(w))
                           for g, w in zip(got, a)) <= 1e-10
                hits3 += 1
            if hits4 < 1000:
                try:
                    t = phi4(space, a, b, c1)
                except GenericityError:
                    continue
                got = pi4(t)
                assert max(abs(g - w) / max(1.0, abs(w))
                           for g, w in zip(got, (*a, *b, c1))) <= 1e-10
                hits4 += 1
        for i in range(1000):
            t4 = random_generic_tuple(space, 4, rng_stream(4, i))
            assert reduce_quadruple(t4).residual <= 1e-8
            t5 = random_generic_tuple(space, 5, rng_stream(5, i))
            assert reduce_quintuple(t5).residual <= 1e-8
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"reduction sweep took {elapsed:.1f}s"


def test_canonical_coordinates_are_isometry_invariant():
    """pi3/pi4 agree on t and g.t to 1e-8 across 1000 group actions."""
    actions = 0
    for eps, d in ADMISSIBLE:
        space = make_space(eps, d, 3)
        for i in range(167):
            rng = rng_stream(6, i)
            for k, project in ((4, pi3), (5, pi4)):
                t = random_generic_tuple(space, k, rng)
                g = random_group_element(space, rng)
                before = np.array(project(t))
                after = np.array(project(t.apply(g)))
                rel = np.abs(after - before).max() / max(1.0, np.abs(before).max())
                assert rel <= 1e-8
                actions += 1
    assert actions >= 1000


def test_dilog_symmetries_five_term_relation_and_maximum():
    """Six symmetries and the five-term relation at 1e-10 over 10^4 samples;
    the maximum of D is 1.0149 within 5e-4; under 5 s."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    z = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    worst = max(float(res.max()) for res in dilog_symmetry_residuals(z).values())
    assert worst <= 1e-10, f"worst symmetry residual {worst:.3e}"

    a = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    b = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    guard = 1e-3
    ok = np.ones(a.shape, dtype=bool)
    for val in (a, b, 1 - a, 1 - b, a - b):
        ok &= np.abs(val) > guard
    res = spence_abel_residual(bloch_wigner, a[ok], b[ok], guard=guard)
    assert ok.sum() > 9000
    assert float(np.abs(res).max()) <= 1e-10

    assert abs(v_max() - 1.0149) <= 5e-4
    samples = bloch_wigner(rng.normal(size=10_000) + 1j * rng.normal(size=10_000))
    assert float(np.abs(samples).max()) <= v_max() + 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0, f"dilog sweep took {elapsed:.1f}s"


def test_face_sum_operator_matches_closed_form():
    """The alternating face sum of 10 bounded test functions equals the
    five-term closed form on 1000 tuples, for both symmetry signs, at 1e-9."""
    fns = _bounded_test_functions(0)
    assert len(fns) == 10
    for eps, d in ((+1, 0), (-1, 0)):
        space = make_space(eps, d, 3)
        for i in range(1000):
            t = random_generic_tuple(space, 5, rng_stream(8, i))
            x = pi4(t)
            faces = [pi3(t.face(j)) for j in range(5)]
            for f in fns:
                direct = sum((-1) ** j * f(*faces[j]) for j in range(5))
                closed = d3_infinity(f, x, eps)
                assert abs(direct - closed) / max(1.0, abs(closed)) <= 1e-9


def test_volume_cocycle_residuals_alternation_and_counts():
    """Cocycle residual <= 1e-8 on 1000 flag 5-tuples for n = 2, 3, 4 (the
    n = 4 block under 120 s); alternation and GL-invariance at 1e-9 over 100
    tuples; contributing-class counts are n(n^2-1)/6."""
    for n in (2, 3, 4):
        t0 = time.perf_counter()
        worst = 0.0
        for i in range(1000):
            five = random_flag_tuple(n, 5, rng_stream(10 + n, i))
            worst = max(worst, abs(cocycle_residual(five)))
        elapsed = time.perf_counter() - t0
        assert worst <= 1e-8, f"n={n}: worst residual {worst:.3e}"
        if n == 4:
            assert elapsed < 120.0, f"n=4 residual sweep took {elapsed:.1f}s"
        want = n * (n * n - 1) // 6
        for i in range(100):
            rng = rng_stream(20 + n, i)
            four = random_flag_tuple(n, 4, rng)
            val = b_n(four)
            swapped = [four[1], four[0], four[2], four[3]]
            assert abs(b_n(swapped) + val) <= 1e-9 * max(1.0, abs(val))
            g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            moved = [AffineFlag.create(g @ f.vecs) for f in four]
            assert abs(b_n(moved) - val) <= 1e-9 * max(1.0, abs(val))
            assert len(contributing_j(four)) == want


def test_restricted_cocycle_matches_dilog_closed_form():
    """On the quadric boundary, B_4(F_inf, F_0, F_1, F_ab) = 2(D(a) + D(b))
    over 100 points at 1e-8, and each of the ten contributing classes
    matches its own dilog expression at 1e-9."""
    from fslab.suites import _PERJ_FORMS
    rng = np.random.default_rng(9)
    for _ in range(100):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        want = 2.0 * (bloch_wigner(a) + bloch_wigner(b))
        assert abs(b4_so4(a, b) - want) <= 1e-8 * max(1.0, abs(want))
    f_inf, f0, f1 = flag_infinity(), standard_flags_so4(0, 0), standard_flags_so4(1, 1)
    for _ in range(10):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        flags = [f_inf, f0, f1, standard_flags_so4(a, b)]
        for J, form in _PERJ_FORMS.items():
            assert abs(b_n_j(flags, J) - form(a, b)) <= 1e-9


def test_monte_carlo_sup_and_operator_norm_ratio():
    """10^5 seeded trials plus refinement land the restricted-cocycle sup in
    [4v - 0.05, 4v + 1e-6], and the sampled norm ratio sits in
    [0.39, 0.4001]; under 60 s."""
    t0 = time.perf_counter()
    prob = sup_problem("b4-so4")
    est, _ = prob.estimate(100_000, seed=0)
    target = 4.0 * v_max()
    assert target - 0.05 <= est <= target + 1e-6, f"estimate {est!r}"
    exact, ratio = operator_norm_res2(trials=100_000, seed=1)
    assert float(exact) == 0.4
    assert 0.39 <= ratio <= 0.4001, f"ratio {ratio!r}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"sup estimation took {elapsed:.1f}s"


def test_index_tables_and_norm_values_are_exact():
    """Dynkin indices match the closed forms for r = 1..10 in all four
    families, and the Gromov norm of the degree-three generator is
    n(n^2-1)/6 times the maximal tetrahedron volume for n = 2..8."""
    closed = {
        "A": lambda r: r * (r + 1) * (r + 2) // 6,
        "B": lambda r: r * (r + 1) * (2 * r + 1) // 3,
        "C": lambda r: r * (4 * r * r - 1) // 3,
        "D": lambda r: r * (r - 1) * (2 * r - 1) // 3,
    }
    for family, formula in closed.items():
        for r in range(1, 11):
            assert dynkin_index(FamilyTag(family, r)) == formula(r)
    v = v_max()
    assert abs(v - V_REF) < 1e-12
    for n in range(2, 9):
        coeff = bn_coefficient(n)
        assert coeff.denominator in (1, 2, 3, 6)
        want = float(coeff) * v
        assert abs(gromov_norm_bn(n) - want) <= 1e-12 * want


def test_reports_are_reproducible_for_a_fixed_seed(tmp_path):
    """Identical command + seed produce byte-identical reports once the
    wall-clock field is stripped."""
    def run(argv, name):
        out = tmp_path / name
        code = cli_main(argv + ["--out", str(out)])
        data = json.loads(out.read_text(encoding="utf-8"))
        data.pop("wall_time_s")
        return code, json.dumps(data, sort_keys=True)

    for argv in (
        ["verify", "--suite", "dilog", "--trials", "500", "--seed", "11"],
        ["verify", "--suite", "cross-ratios", "--trials", "60", "--seed", "4"],
        ["estimate-norm", "--cocycle", "b4-so4", "--trials", "3000", "--seed", "2"],
    ):
        code1, rep1 = run(argv, "first.json")
        code2, rep2 = run(argv, "second.json")
        assert code1 == code2 == 0
        assert rep1 == rep2
