import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spiral_erw import oracle
from spiral_erw.angle import AngleLaw


# -- normalizers ------------------------------------------------------------


def test_normalizer_small_values():
    # a_n(phi) = prod_{j<n} (1 + phi/j): a_1 = 1, a_2 = 1+phi, a_3 = (1+phi)(1+phi/2)
    phi = 0.3 + 0.4j
    a = oracle.normalizer_a(phi, 3)
    assert a[0] == 1.0
    assert a[1] == pytest.approx(1.0 + phi)
    assert a[2] == pytest.approx((1.0 + phi) * (1.0 + phi / 2.0))


def test_normalizer_gamma_cross_check_frozen():
    a = oracle.normalizer_a(0.2 + 0.2j, 100)
    assert a[-1] == pytest.approx(1.5697076051976735 + 2.3217429568088535j, rel=1e-12)


def test_normalizer_integer_phi_is_binomial():
    # phi = 1: a_n = n; phi = 2: a_n = n(n+1)/2
    assert np.allclose(oracle.normalizer_a(1.0, 10).real, np.arange(1, 11))
    n = np.arange(1, 11)
    assert np.allclose(oracle.normalizer_a(2.0, 10).real, n * (n + 1) / 2)


def test_normalizer_rejects_negative_integer_phi():
    with pytest.raises(ValueError):
        oracle.normalizer_a(-1.0, 10)
    with pytest.raises(ValueError):
        oracle.normalizer_a(-3.0, 10)


def test_limit_constant_matches_product_asymptotics():
    phi = 0.6 + 0.25j
    n = 200000
    a_n = oracle.normalizer_a(phi, n)[-1]
    approx = oracle.limit_constant(phi) * complex(n) ** phi
    assert abs(a_n / approx - 1.0) < 1e-2


def test_gamma_ratio_vectorized():
    phi = 0.5
    vals = oracle.gamma_ratio(phi, np.array([1.0, 2.0, 3.0]))
    a = oracle.normalizer_a(phi, 3)
    assert np.allclose(vals, a)


# -- moment recursions ------------------------------------------------------


def test_uniform_law_second_moment_is_n():
    # phi1 = 0: u_{m+1} = u_m + 1
    u = oracle.abs_square_recursion(0.0, 50)
    assert np.allclose(u, np.arange(1, 51))


def test_critical_second_moment_is_harmonic():
    u = oracle.abs_square_recursion(np.exp(1j * np.pi / 3), 5000)
    n = np.arange(1, 5001)
    harmonic = np.cumsum(1.0 / n)
    assert np.allclose(u, n * harmonic, rtol=1e-12)


def test_square_recursion_zero_phi2_is_constant():
    q = oracle.square_recursion(0.0, 0.0, 50)
    assert np.allclose(q, 1.0)


def test_recursion_frozen_values():
    assert oracle.abs_square_recursion(0.2 + 0.2j, 100)[-1] == pytest.approx(
        161.93150681686413
    )
    assert oracle.square_recursion(0.2 + 0.2j, -0.1 + 0.05j, 100)[-1] == pytest.approx(
        -3.088616552444063 + 6.3080773384455835j
    )


def test_moment_table_shapes_and_v():
    law = AngleLaw.uniform()
    table = oracle.build_moment_table(law, 20)
    assert len(table.a_seq) == len(table.u_seq) == len(table.q_seq) == len(table.v_seq) == 20
    # phi1 = 0 makes every a_m = 1 and v_m = m - 1
    assert np.allclose(table.v_seq, np.arange(20))


def test_endpoint_component_moments_uniform():
    mean, var_re, var_im, cov = oracle.endpoint_component_moments(AngleLaw.uniform(), 100)
    assert mean == pytest.approx(1.0 + 0.0j)
    # E|S|^2 = n, E S^2 = 1, E S = 1: Var Re = (n+1)/2 - 1, Var Im = (n-1)/2
    assert var_re == pytest.approx((100 + 1) / 2 - 1)
    assert var_im == pytest.approx((100 - 1) / 2)
    assert cov == pytest.approx(0.0)


# -- enumeration ------------------------------------------------------------


def test_enumeration_n2_distribution():
    law = AngleLaw.discrete([(0.0, 0.75), (math.pi, 0.25)])
    dist = oracle.enumerate_exact(law, 2)
    assert dist.prob_of(2.0 + 0j) == Fraction(3, 4)
    assert dist.prob_of(0.0 + 0j) == Fraction(1, 4)


def test_enumeration_probabilities_sum_to_one_exactly():
    law = AngleLaw.quarter_turn(0.4, 0.3, 0.2, 0.1)
    total = sum(p for _, p in oracle.enumerate_outcomes(law, 4))
    assert total == 1


def test_enumeration_mean_matches_normalizer():
    law = AngleLaw.quarter_turn(0.4, 0.3, 0.2, 0.1)
    for n in range(1, 6):
        dist = oracle.enumerate_exact(law, n)
        assert dist.mean() == pytest.approx(
            complex(oracle.normalizer_a(law.phi1, n)[-1]), abs=1e-12
        )


def test_enumeration_supports_constant_laws():
    dist = oracle.enumerate_exact(AngleLaw.constant(math.pi / 2), 3)
    assert dist.abs_second_moment() == pytest.approx(
        float(oracle.abs_square_recursion(1j, 3)[-1].real), abs=1e-12
    )


def test_enumeration_rejects_big_n_and_continuous_laws():
    with pytest.raises(ValueError):
        oracle.enumerate_exact(AngleLaw.quarter_turn(0.25, 0.25, 0.25, 0.25), 9)
    with pytest.raises(ValueError):
        list(oracle.enumerate_outcomes(AngleLaw.uniform(), 3))


@settings(deadline=None, max_examples=20)
@given(
    st.integers(2, 5),
    st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5)),
)
def test_enumeration_matches_recursions(n, weights):
    total = sum(weights)
    p, q, r, s = (w / total for w in weights)
    law = AngleLaw.quarter_turn(p, q, r, s)
    dist = oracle.enumerate_exact(law, n)
    assert dist.abs_second_moment() == pytest.approx(
        float(oracle.abs_square_recursion(law.phi1, n)[-1].real), abs=1e-10
    )
    assert dist.second_moment() == pytest.approx(
        complex(oracle.square_recursion(law.phi1, law.phi2, n)[-1]), abs=1e-10
    )


# -- limit variable ---------------------------------------------------------


def test_w_moments_pi_over_4():
    wm = oracle.w_moments(AngleLaw.constant(math.pi / 4))
    assert wm.mean == 1.0 + 0.0j
    assert wm.abs_second == pytest.approx(math.sqrt(2.0) / (math.sqrt(2.0) - 1.0))
    assert wm.abs_second == pytest.approx(3.4142135623730945)
    assert wm.second == pytest.approx(1.190743569830546 + 0.6512392830509103j)
    # covariance entries reassemble both centered second moments (E W = 1)
    assert wm.cov[0, 0] + wm.cov[1, 1] == pytest.approx(wm.abs_second - 1.0)
    assert wm.cov[0, 0] - wm.cov[1, 1] == pytest.approx(wm.second.real - 1.0)
    assert 2.0 * wm.cov[0, 1] == pytest.approx(wm.second.imag)


def test_w_moments_rejects_other_regimes():
    with pytest.raises(ValueError):
        oracle.w_moments(AngleLaw.uniform())
    with pytest.raises(ValueError):
        oracle.w_moments(AngleLaw.constant(math.pi / 3))


# -- continuous-time moments ------------------------------------------------


def test_continuous_first_moment_growth():
    law = AngleLaw.constant(math.pi / 4)
    first, _, _ = oracle.continuous_moments(law, 1, 2.0)
    assert first == pytest.approx(np.exp(2.0 * law.phi1))


def test_continuous_moments_uniform():
    first, abs_second, second = oracle.continuous_moments(AngleLaw.uniform(), 1, 2.0)
    assert first == pytest.approx(1.0)
    assert abs_second == pytest.approx(math.exp(2.0))  # resolves to e^t at Re phi = 0
    assert second == pytest.approx(1.0)  # resonant branch 2 phi1 = phi2 = 0


def test_continuous_moments_critical_branch_continuity():
    # Re phi -> 1/2 limit of the generic formula equals the resonant value
    law_c = AngleLaw.constant(math.pi / 3)
    _, abs_c, _ = oracle.continuous_moments(law_c, 1, 3.0)
    assert abs_c == pytest.approx(4.0 * math.exp(3.0))
    law_eps = AngleLaw.constant(math.acos(0.5 + 1e-9))
    _, abs_eps, _ = oracle.continuous_moments(law_eps, 1, 3.0)
    assert abs_eps == pytest.approx(abs_c, rel=1e-6)


def test_continuous_second_moment_monte_carlo():
    from spiral_erw import branching

    law = AngleLaw.constant(math.pi / 4)
    t = 1.5
    m = 4000
    z = np.empty(m, dtype=np.complex128)
    for i in range(m):
        run = branching.simulate_to_time(law, t, seed=314, path_index=i, n0=16)
        z[i] = branching.additive_functional(run, 1, t)
    first, abs_second, second = oracle.continuous_moments(law, 1, t)
    assert abs(np.mean(z) - first) < 5.0 * np.std(z) / math.sqrt(m)
    a2 = np.abs(z) ** 2
    assert abs(np.mean(a2) - abs_second) < 5.0 * np.std(a2) / math.sqrt(m)


# -- poissonized targets ----------------------------------------------------


def test_poissonized_mean_is_exactly_one():
    mean, abs2 = oracle.poissonized_what_moments(np.exp(1j * np.pi / 4), 2**12)
    assert mean == 1.0 + 0.0j
    assert abs2 > 1.0


def test_poissonized_abs2_converges_to_w_moment():
    law = AngleLaw.constant(math.pi / 4)
    _, abs2 = oracle.poissonized_what_moments(law.phi1, 2**16)
    target = oracle.w_moments(law).abs_second
    assert abs2 == pytest.approx(target, rel=0.01)


def test_poissonized_residual_components_positive_and_below_asymptote():
    law = AngleLaw.constant(math.pi / 4)
    var_re, var_im, cov = oracle.poissonized_residual_components(
        law.phi1, law.phi2, 2**10, 2**16
    )
    sigma2 = 1.0 / (2.0 * math.cos(math.pi / 4) - 1.0)
    assert 0.0 < var_re < 0.5 * sigma2
    assert 0.0 < var_im < 0.5 * sigma2
    assert abs(cov) < 0.05


def test_poissonized_residual_monte_carlo():
    # the closed finite-horizon covariance must match simulation
    from spiral_erw import walk

    law = AngleLaw.constant(math.pi / 4)
    n, big_n, m = 64, 1024, 4000
    sim = walk.simulate_endpoints(
        law, big_n, 2718, range(m), snapshot_ns=(n, big_n), with_yule=True
    )
    w_hat = sim["S"][big_n] * np.exp(-law.phi1 * sim["tau"][big_n])
    r = (sim["S"][n] - np.exp(law.phi1 * sim["tau"][n]) * w_hat) / math.sqrt(n)
    var_re, var_im, cov = oracle.poissonized_residual_components(law.phi1, law.phi2, n, big_n)
    assert np.var(r.real) == pytest.approx(var_re, rel=0.15)
    assert np.var(r.imag) == pytest.approx(var_im, rel=0.15)
    assert abs(np.mean(r)) < 5.0 * math.sqrt((var_re + var_im) / m)
