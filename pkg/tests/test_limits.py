import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from oracles import e_abs, jstar_oracle
from svhedge import limits
from svhedge.errors import DomainError, NumericalError
from svhedge.limits import (QuadratureConfig, eta, eta_zero, expected_abs_linear, g_func, j_limit, j_limit_batch,
                            j_star, j_star_batch, j_zero, j_zero_batch, lambda_func, min_identity_batch,
                            min_identity_residual)

SQ2PI = math.sqrt(2 / math.pi)


def test_g_examples():
    assert g_func(0.0) == pytest.approx(SQ2PI, rel=1e-15)
    a = np.linspace(-6, 6, 49)
    np.testing.assert_allclose(g_func(a), g_func(-a), rtol=0, atol=0)
    assert abs(g_func(10.0) - 10.0) <= 1e-20


def test_g_matches_folded_normal_mean():
    for a in (-3.0, -0.4, 0.0, 0.7, 2.5, 6.0):
        assert g_func(a) == pytest.approx(e_abs(1.0, a), rel=1e-13)


def test_g_bracket():
    a = np.random.default_rng(0).normal(0, 3, 1000)
    G = g_func(a)
    assert np.all(np.abs(a) <= G)
    assert np.all(G <= np.abs(a) + 2 * norm.pdf(a) + 1e-15)


def test_lambda_examples():
    assert lambda_func(0.0) == pytest.approx(1 - 2 / math.pi, rel=1e-14)
    a = np.random.default_rng(1).normal(0, 3, 1000)
    L = lambda_func(a)
    assert np.all(L > 0) and np.all(L <= 1)
    np.testing.assert_allclose(L, 1 + a * a - g_func(a) ** 2, atol=1e-12)


def test_lambda_deviation_bound():
    a = np.concatenate([[0.0], np.random.default_rng(2).normal(0, 2, 1000)])
    phi = norm.pdf(a)
    dev = np.abs(lambda_func(a) - 1)
    assert np.all(dev <= 4 * np.abs(a) * phi + 4 * phi**2 + 1e-15)


def test_published_lambda_bound_fails_at_zero():
    # |Lambda(0) - 1| = 2/pi exceeds 4|a| phi + phi^2 = 1/(2 pi); kept as a record of the slip
    assert abs(lambda_func(0.0) - 1) > norm.pdf(0.0) ** 2


@pytest.mark.parametrize("a", [0.0, 0.5, 2.0])
def test_lambda_sampling_oracle(a):
    z = np.abs(np.random.default_rng(10).standard_normal(10**6) + a)
    d = z - z.mean()
    s2 = np.mean(d * d)
    se = math.sqrt(np.mean((d * d - s2) ** 2) / z.size)
    assert abs(s2 - lambda_func(a)) < 3 * se


def test_expected_abs_linear():
    assert expected_abs_linear(1.0, 0.0) == pytest.approx(SQ2PI)
    assert expected_abs_linear(0.0, -3.0) == 3.0
    z = np.abs(0.5 * np.random.default_rng(11).standard_normal(10**6) + 1.0)
    assert abs(z.mean() - expected_abs_linear(0.5, 1.0)) < 3 * z.std() / 1e3
    with pytest.raises(DomainError):
        expected_abs_linear(-1.0, 0.0)


@given(st.floats(0.0, 50.0), st.floats(-50.0, 50.0))
@settings(max_examples=200, deadline=None)
def test_expected_abs_linear_properties(a, b):
    e = float(expected_abs_linear(a, b))
    assert e >= abs(b) - 1e-12
    assert e >= a * SQ2PI * (1 - 1e-12)
    assert e == pytest.approx(e_abs(a, b), rel=1e-9, abs=1e-300)


def test_eta_examples():
    assert eta(2.0, 1.0, 0.0) == 1.0
    kap, sy = 0.03, 1.7
    assert eta(sy, kap * sy * math.sqrt(8 / math.pi), kap) == pytest.approx(0.0, abs=1e-15)
    assert eta(2.27, 2.0, 0.01) == pytest.approx(1 - 0.01 * 2.27 * math.sqrt(8 / math.pi) / 2, rel=1e-15)
    assert eta(2.27, 2.0, 0.01) == pytest.approx(0.98189, abs=5e-6)
    assert eta_zero(2.0, 4.0, 1.25) == pytest.approx(2.0 / 5.0 * math.sqrt(8 / math.pi))
    assert eta_zero(2.0, 4.0, 1.25, kappa=0.1) == pytest.approx(0.04 * math.sqrt(8 / math.pi))


@pytest.mark.parametrize("x", [1.0, 2.0, 0.3])
def test_min_identity_examples(x):
    assert abs(min_identity_residual(x)) <= 1e-8


def test_min_identity_batch():
    x = np.geomspace(1e-3, 1e3, 61)
    assert np.max(np.abs(min_identity_batch(x))) <= 1e-10


def test_jstar_bounded_by_min():
    x = np.concatenate([np.geomspace(1e-4, 50, 40), [0.999, 1.001]])
    js = np.array([j_star(v) for v in x])
    assert np.all(js <= np.minimum(x, 1.0) * (1 + 1e-9))
    assert j_star(1e-4) <= 1e-4


def test_jstar_at_strike_oracle():
    assert j_star(1.0) == pytest.approx(jstar_oracle(1.0), rel=1e-6)
    assert j_star(1.0) == pytest.approx(0.5, rel=1e-12)


def test_jzero_is_j_over_x():
    for x in (0.4, 1.0, 2.5):
        assert j_zero(x, 1.5, 3.0) * x == pytest.approx(j_limit(x, 1.5, 3.0), rel=1e-12)
    assert j_zero(1.7, 2.0, 1e6) == pytest.approx(j_star(1.7) / 1.7, rel=1e-4)


def test_j_monotone_in_rho():
    for x in (0.5, 0.95, 1.05, 2.0):
        vals = [j_limit(x, 2.0, r) for r in (0.5, 1.0, 2.0, 8.0, 64.0)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] >= j_star(x) * (1 - 1e-9)


def test_j_inner_expectation_sampling():
    # replace E|aZ + q| by a sample mean over 10^5 draws; each draw gives one integral
    x, sy, rho = 1.0, 2.0, 2.0
    a = sy / rho
    M, U = 20_000, 40.0
    u = (np.arange(M) + 0.5) * (U / M)
    lm = math.log(x)
    v = lm / u + 0.5 * u
    q = lm / (2 * u * u) - 0.25
    w = 2 * norm.pdf(v) * (U / M) * x
    z = np.random.default_rng(12).standard_normal(10**5)
    Y = np.concatenate([np.abs(a * zc[:, None] + q[None, :]) @ w for zc in np.split(z, 20)])
    assert abs(Y.mean() - j_limit(x, sy, rho)) < 3 * Y.std() / math.sqrt(Y.size)


def test_batch_matches_scalar():
    rng = np.random.default_rng(5)
    x = np.concatenate([rng.uniform(0.1, 4, 30), [1.0, 1 + 1e-6, 1 - 1e-6, 1e-3, 30.0]])
    sy = rng.uniform(0.5, 4, x.size)
    J = j_limit_batch(x, sy, 2.0)
    Js = j_star_batch(x)
    J0 = j_zero_batch(x, sy, 2.0)
    for i in range(x.size):
        assert J[i] == pytest.approx(j_limit(x[i], sy[i], 2.0), rel=1e-8)
        assert Js[i] == pytest.approx(j_star(x[i]), rel=1e-8, abs=1e-14)
        assert J0[i] == pytest.approx(j_zero(x[i], sy[i], 2.0), rel=1e-8)


def test_algebraic_weight_route_agrees():
    cfg = QuadratureConfig(substitution=False)
    for x in (0.3, 1.0, 1.7):
        assert j_limit(x, 2.0, 2.0, quad=cfg) == pytest.approx(j_limit(x, 2.0, 2.0), rel=1e-8)
        assert j_star(x, quad=cfg) == pytest.approx(j_star(x), rel=1e-8)
        assert abs(min_identity_residual(x, quad=cfg)) < 1e-8


def test_strike_is_a_point_discontinuity():
    # J* jumps at x = K: the boundary layer at u ~ |ln(x/K)| carries mass that vanishes exactly at K
    assert j_star(1.0) == pytest.approx(0.5, rel=1e-12)
    assert j_star(1 - 1e-7) == pytest.approx(1 - 1e-7, rel=1e-12)
    # from above the gap to 1 closes like sqrt(x - K)
    gaps = [1.0 - j_star(1 + e) for e in (1e-5, 1e-7, 1e-9)]
    assert all(0 < g < 2 * math.sqrt(e) for g, e in zip(gaps, (1e-5, 1e-7, 1e-9)))
    assert gaps[0] / gaps[1] == pytest.approx(10.0, rel=0.05)


def test_domain_errors():
    with pytest.raises(DomainError):
        j_limit(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        j_limit(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        j_star_batch([1.0, 0.0])
    with pytest.raises(DomainError):
        QuadratureConfig(rtol=0.0)


def test_quadrature_failure_reports(monkeypatch):
    def bad_quad(*args, **kw):
        return 1.0, 0.5, {}

    monkeypatch.setattr(limits.integrate, "quad", bad_quad)
    with pytest.raises(NumericalError) as info:
        j_star(1.3)
    assert info.value.diagnostics["abserr"] == 0.5
