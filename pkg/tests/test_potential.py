import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sturmbasis.potential import (
    Potential,
    PotentialError,
    constant,
    evaluate,
    fourier_coefficients,
    lacunary_support,
    load_potential,
    make_counterexample,
    make_power_decay,
    perturb,
    potential_from_dict,
    potential_to_dict,
    quadrature_coefficients,
    trig_polynomial,
)

complexes = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def trig_polys(draw, max_band=6):
    K = draw(st.integers(0, max_band))
    cs = draw(st.lists(complexes, min_size=2 * K + 1, max_size=2 * K + 1))
    return trig_polynomial({k: c for k, c in zip(range(-K, K + 1), cs)})


@given(trig_polys(), st.integers(0, 3))
def test_evaluate_matches_direct_sum(q, extra):
    M = 2 * q.K + 1 + extra
    x = np.arange(M) / M
    direct = sum(q.coeff(k) * np.exp(2j * np.pi * k * x) for k in range(-q.K, q.K + 1))
    assert np.allclose(evaluate(q, M), direct, atol=1e-12)


@given(trig_polys())
def test_quadrature_recovers_coefficients(q):
    for n in range(1, q.K + 2):
        exact = fourier_coefficients(q, n)
        quad = quadrature_coefficients(q, n)
        assert abs(exact.alpha - quad.alpha) < 1e-12
        assert abs(exact.beta - quad.beta) < 1e-12


def test_alpha_beta_convention():
    # alpha_n = int q e^{2 pi i n x} dx = c_{-n}
    q = trig_polynomial({-3: 2.0, 3: 5.0})
    c = fourier_coefficients(q, 3)
    assert c.alpha == 2.0 and c.beta == 5.0


def test_evaluate_rejects_coarse_grid():
    with pytest.raises(PotentialError):
        evaluate(trig_polynomial({4: 1.0}), 8)


@pytest.mark.parametrize("case,shift", [(1, 0), (2, 1)])
def test_counterexample_support(case, shift):
    q = make_counterexample(case, 0.3, 0.7, 64)
    support = [n for n in range(1, 300) if q.coeff(n) != 0]
    assert support == [2**p + shift for p in range(1, 9) if 2**p + shift < 300]
    assert all(q.coeff(-n) != 0 for n in support)
    assert all(lacunary_support(case, n) for n in support)


@given(st.floats(0.05, 0.45), st.floats(0.05, 0.45))
def test_counterexample_ratio_is_power(e1, gap):
    e2 = min(e1 + gap, 0.99)
    q = make_counterexample(1, e1, e2, 8)
    for p in range(1, 12):
        n = 2**p
        assert abs(q.coeff(-n) / q.coeff(n)) == pytest.approx(n ** (e2 - e1), rel=1e-13)


@pytest.mark.parametrize("args", [(1, 0.7, 0.3, 64), (1, 0.3, 0.3, 64), (3, 0.3, 0.7, 64),
                                  (1, 0.0, 0.7, 64), (1, 0.3, 1.0, 64), (1, 0.3, 0.7, 1)])
def test_counterexample_validation(args):
    with pytest.raises(PotentialError):
        make_counterexample(*args)


def test_power_decay_parity():
    q = make_power_decay(1.5, 2.0, "odd", 32)
    assert all(q.coeff(n) == 0 and q.coeff(-n) == 0 for n in range(2, 33, 2))
    # s_plus governs alpha_n = c_{-n}
    assert q.coeff(-3) == pytest.approx(3**-1.5) and q.coeff(3) == pytest.approx(3**-2.0)


def test_constant_potential():
    q = constant(2.5)
    assert q.coeff(0) == 2.5
    assert all(fourier_coefficients(q, n).alpha == 0 for n in range(1, 10))


@given(trig_polys(), trig_polys(), complexes)
def test_linear_combination(q1, q2, w):
    r = q1 + q2 * w
    for k in range(-7, 8):
        assert r.coeff(k) == pytest.approx(q1.coeff(k) + w * q2.coeff(k), abs=1e-14)


@given(trig_polys(max_band=4), st.floats(1e-6, 1e-1))
def test_perturb_stays_within_delta(q, delta):
    d = make_power_decay(1.5, 1.5, "all", 16)
    q2 = perturb(q, delta, d)
    K = 16
    grid = 2048
    diff = evaluate(Potential(q2.rule, K), grid) - evaluate(Potential(q.rule, K), grid)
    assert float(np.mean(np.abs(diff))) <= delta * (1 + 1e-12)


def test_l1_bound_counterexample():
    q = make_counterexample(1, 0.3, 0.7, 64)
    # sum over p >= 1 of 2^{-0.3 p} + 2^{-0.7 p}, two geometric series
    exact = sum(2**-e / (1 - 2**-e) for e in (0.3, 0.7))
    assert q.l1_bound() >= exact
    assert q.l1_bound() == pytest.approx(exact, rel=1e-9)


def test_non_summable_power_direction_is_truncated():
    d = make_power_decay(0.9, 0.9, "all", 16)
    assert math.isinf(d.l1_bound())
    q2 = perturb(constant(0.0), 1e-3, d)
    assert q2.coeff(17) == 0


@given(trig_polys())
def test_json_roundtrip_trig(q):
    q2 = potential_from_dict(json.loads(json.dumps(potential_to_dict(q))))
    assert all(q2.coeff(k) == q.coeff(k) for k in range(-q.K - 1, q.K + 2))


def test_json_roundtrip_families(tmp_path):
    for q in (make_counterexample(2, 0.2, 0.6, 33), make_power_decay(1.2, 1.7, "even", 20, m=1)):
        path = tmp_path / "q.json"
        path.write_text(json.dumps(potential_to_dict(q)))
        q2 = load_potential(str(path))
        assert q2.K == q.K and q2.m == q.m
        assert all(q2.coeff(k) == q.coeff(k) for k in range(-40, 41))


@pytest.mark.parametrize("text", [
    '{"kind": "trig", "coeffs": [[0, 1, 0]], "colour": "red"}',
    '{"kind": "spline"}',
    '{"kind": "counterexample", "case": 1, "eps1": 0.3}',
    '{"kind": "trig", "coeffs": [[0.5, 1, 0]]}',
    '{not json',
])
def test_malformed_potentials_rejected(text):
    with pytest.raises(PotentialError):
        load_potential(text)
