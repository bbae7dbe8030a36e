import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sturmbasis import diagnostics as dg
from sturmbasis.potential import (
    PotentialError,
    constant,
    make_counterexample,
    make_power_decay,
    trig_polynomial,
)

CEX = make_counterexample(1, 0.3, 0.7, 64)
ZERO = trig_polynomial({})


def test_window_indices_parity():
    assert dg.window_indices(1, 1, 9) == [2, 4, 6, 8]
    assert dg.window_indices(2, 1, 9) == [3, 5, 7, 9]
    assert [dg.pair_of_index(1, n) for n in (2, 8)] == [1, 4]
    assert [dg.pair_of_index(2, n) for n in (3, 9)] == [1, 4]


@given(st.integers(1, 40), st.complex_numbers(min_magnitude=0.1, max_magnitude=1.0))
def test_pair_angle_bounds(n, z):
    x = np.arange(64) / 64
    u = np.exp(2j * np.pi * n * x)
    w = z * u + np.exp(-2j * np.pi * n * x)
    w = w / np.sqrt(np.mean(np.abs(w) ** 2))
    a = dg.pair_angle(u, w)
    assert 0.0 <= a <= 1.0 + 1e-12
    assert dg.pair_angle(u, u) == pytest.approx(1.0)


def test_pair_angle_rejects_unnormalized():
    with pytest.raises(ValueError):
        dg.pair_angle(2 * np.ones(8), np.ones(8))


def test_gram_of_free_operator_is_identity():
    r = dg.gram_report(ZERO, 1, 1, 16)
    assert r.riesz_ratio == pytest.approx(1.0, abs=1e-8)
    assert max(a.angle for a in r.angles) < 1e-10
    assert r.system_size == 16


def test_gram_galerkin_method_agrees_on_separated_pairs():
    q = trig_polynomial({-2: 0.3, 2: 0.2, -4: 0.1, 4: 0.15})
    a = dg.gram_report(q, 1, 1, 8)
    b = dg.gram_report(q, 1, 1, 8, method="galerkin")
    assert a.riesz_ratio == pytest.approx(b.riesz_ratio, rel=1e-6)
    for x, y in zip(a.angles, b.angles):
        assert x.angle == pytest.approx(y.angle, abs=1e-6)


def test_gram_window_validation():
    with pytest.raises(ValueError):
        dg.gram_report(ZERO, 1, 8, 4)
    with pytest.raises(ValueError):
        dg.gram_report(ZERO, 1, 1, 16, grid_size=32)


def test_gram_with_jordan_pair():
    # the chain partner enters the Gram system in the <v, u> = 0 gauge
    q = trig_polynomial({-2: 0.01})
    r = dg.gram_report(q, 1, 1, 4)
    assert r.angles[0].classification == "DoubleJordan"
    assert r.angles[0].angle < 1e-8
    assert math.isfinite(r.riesz_ratio)


def test_margins_counterexample():
    ms = dg.margins(CEX, [4, 5, 8], m=0)
    assert ms[0].r == pytest.approx(4**0.4)
    assert ms[0].alpha_margin == pytest.approx(4 * 4**-0.3)
    assert ms[1].R == math.inf and math.isnan(ms[1].r)


def test_theorem1_counterexample_violated():
    v = dg.check_theorem1(CEX, 1)
    assert v.verdict == dg.VIOLATED


def test_theorem1_power_families():
    for s in (1.2, 1.5):
        v = dg.check_theorem1(make_power_decay(s, s, "even", 64), 1)
        assert v.verdict == dg.CONSISTENT
        assert v.stats["c1"] == v.stats["c2"] == 1.0
    # a bounded ratio that is not 1 is still within theta
    v = dg.check_theorem1(make_power_decay(1.2, 1.4, "odd", 64), 2, n_max=32)
    assert v.verdict == dg.CONSISTENT


def test_theorem1_monotone_dyadic_drift_detected():
    q = make_counterexample(1, 0.1, 0.9, 64) + make_power_decay(3.0, 3.0, "even", 64)
    v = dg.check_theorem1(q, 1)
    assert v.verdict == dg.VIOLATED
    assert "dyadic" in v.reason


@given(st.integers(1, 8), st.sampled_from([1, 2]))
@settings(max_examples=20)
def test_theorem1_trig_past_bandwidth(K, case):
    q = trig_polynomial({k: 0.3 for k in range(-K, K + 1)})
    assert dg.check_theorem1(q, case, n_max=K + 4).verdict == dg.VIOLATED


def test_theorem1_argument_validation():
    with pytest.raises(ValueError):
        dg.check_theorem1(CEX, 1, theta=1.0)
    with pytest.raises(ValueError):
        dg.check_theorem1(CEX, 1, n0=40, n_max=64)
    with pytest.raises(ValueError):
        dg.check_theorem1(CEX, 1, indices=[3, 4])


def test_theorem2_counterexample_slope():
    v = dg.check_theorem2(CEX, 1)
    assert v.verdict == dg.CONSISTENT
    assert v.stats["slope"] == pytest.approx(0.4, abs=1e-12)
    assert v.sequence == [2**p for p in range(1, 9)]


@given(st.floats(0.05, 0.5), st.floats(0.15, 0.45))
@settings(max_examples=20)
def test_theorem2_slope_is_exponent_gap(e1, gap):
    q = make_counterexample(2, e1, min(e1 + gap, 0.99), 16)
    v = dg.check_theorem2(q, 2)
    assert v.stats["slope"] == pytest.approx(min(e1 + gap, 0.99) - e1, abs=1e-9)


def test_theorem2_inconclusive_cases():
    assert dg.check_theorem2(ZERO, 1).verdict == dg.INCONCLUSIVE
    assert dg.check_theorem2(make_power_decay(1.5, 1.5, "even", 64), 1).verdict == dg.INCONCLUSIVE


def test_hypothesis_class():
    v1 = dg.check_theorem1(make_power_decay(1.5, 1.5, "even", 64), 1)
    v2 = dg.check_theorem2(make_power_decay(1.5, 1.5, "even", 64), 1)
    assert dg.hypothesis_class(v1, v2) == dg.BASIS_LIKE
    assert dg.hypothesis_class(dg.check_theorem1(CEX, 1), dg.check_theorem2(CEX, 1)) == dg.NON_BASIS_LIKE
    assert dg.hypothesis_class(dg.check_theorem1(ZERO, 1), dg.check_theorem2(ZERO, 1)) == dg.UNDETERMINED


def test_density_from_constant_and_gram_attached():
    rep = dg.density_demo(constant(1.0), 1e-3, dg.NON_BASIS_LIKE, n_max=64)
    assert rep.flipped
    assert rep.l1_distance_bound <= 1e-3 * (1 + 1e-12)
    assert rep.perturbed_gram is not None and rep.start_gram is not None


def test_density_validation():
    with pytest.raises(PotentialError):
        dg.density_demo(ZERO, 0.0, dg.BASIS_LIKE)
    with pytest.raises(ValueError):
        dg.density_demo(ZERO, 1e-3, "Riesz")


def test_density_antiperiodic():
    rep = dg.density_demo(ZERO, 1e-3, dg.NON_BASIS_LIKE, bc_case=2, gram_window=None)
    assert rep.flipped and rep.perturbed_class == dg.NON_BASIS_LIKE


def test_free_window_ratio_tight():
    assert abs(dg.gram_report(ZERO, 1, 1, 8).riesz_ratio - 1) <= 1e-10


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=5, deadline=None)
def test_nested_windows_interlace(seed):
    rng = np.random.default_rng(seed)
    q = trig_polynomial({k: 0.4 * complex(*rng.uniform(-1, 1, 2)) for k in range(-4, 5)})
    reps = dg.gram_sweep(q, 1, [(1, 4), (1, 8), (1, 12)])
    ratios = [r.riesz_ratio for r in reps]
    assert all(b >= a - 1e-10 for a, b in zip(ratios, ratios[1:]))


@given(st.permutations(list(range(6))), st.lists(st.floats(0, 2 * math.pi), min_size=6, max_size=6))
@settings(max_examples=20, deadline=None)
def test_gram_spectrum_invariances(perm, phases):
    rng = np.random.default_rng(0)
    members = [rng.normal(size=32) + 1j * rng.normal(size=32) for _ in range(6)]
    members = [m / np.sqrt(np.mean(np.abs(m) ** 2)) for m in members]
    G = dg.gram_matrix(members)
    assert np.allclose(np.diag(G), 1.0, atol=1e-12)
    H = dg.gram_matrix([members[i] * np.exp(1j * t) for i, t in zip(perm, phases)])
    assert np.allclose(np.linalg.eigvalsh(G), np.linalg.eigvalsh(H), atol=1e-12)


@given(st.floats(1e-3, 1e3), st.sampled_from([1.0, -1.0, 1j]))
@settings(max_examples=20)
def test_verdicts_scale_invariant(s, phase):
    for q in (CEX, make_power_decay(1.5, 1.5, "even", 64)):
        scaled = q * (s * phase)
        for check in (dg.check_theorem1, dg.check_theorem2):
            a, b = check(q, 1), check(scaled, 1)
            assert a.verdict == b.verdict
            assert b.stats["c0"] == pytest.approx(s * a.stats["c0"], rel=1e-12)


def test_counterexample_angles_grow_along_lacunary_indices():
    # oracle eigenvectors from the Galerkin matrix
    r = dg.gram_report(CEX, 1, 1, 32, method="galerkin", K_matrix=96)
    angles = [r.angle_at(n) for n in (8, 16, 32)]
    assert angles[0] < angles[1] < angles[2]
