import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spiral_erw import oracle, walk
from spiral_erw.angle import AngleLaw

UNIFORM = AngleLaw.uniform()
QT = AngleLaw.quarter_turn(0.4, 0.3, 0.2, 0.1)


def test_first_step_is_one_exactly():
    path = walk.simulate_path(UNIFORM, 100, seed=0)
    assert path.steps[0] == 1.0 + 0.0j
    assert path.positions[0] == 1.0 + 0.0j


def test_steps_have_unit_modulus():
    path = walk.simulate_path(UNIFORM, 500, seed=1)
    assert np.allclose(np.abs(path.steps), 1.0, atol=1e-12)


def test_positions_are_prefix_sums():
    path = walk.simulate_path(QT, 200, seed=2)
    assert np.allclose(path.positions, np.cumsum(path.steps))


def test_reproducibility_and_stream_independence():
    a = walk.simulate_path(UNIFORM, 64, seed=3, path_index=5)
    b = walk.simulate_path(UNIFORM, 64, seed=3, path_index=5)
    c = walk.simulate_path(UNIFORM, 64, seed=3, path_index=6)
    d = walk.simulate_path(UNIFORM, 64, seed=4, path_index=5)
    assert np.array_equal(a.steps, b.steps)
    assert not np.array_equal(a.steps, c.steps)
    assert not np.array_equal(a.steps, d.steps)


def test_horizon_extension_is_prefix_consistent():
    short = walk.simulate_path(QT, 50, seed=7)
    long = walk.simulate_path(QT, 200, seed=7)
    assert np.allclose(short.steps, long.steps[:50])


def test_rejects_empty_walk():
    with pytest.raises(ValueError):
        walk.simulate_path(UNIFORM, 0, seed=0)


def test_constant_zero_law_walks_straight():
    path = walk.simulate_path(AngleLaw.constant(0.0), 50, seed=0)
    assert np.allclose(path.positions, np.arange(1, 51))


def test_step_powers():
    path = walk.simulate_path(QT, 64, seed=9)
    assert np.allclose(walk.step_powers(path, 1), path.positions)
    assert np.allclose(walk.step_powers(path, 2), np.cumsum(path.steps**2))
    with pytest.raises(ValueError):
        walk.step_powers(path, 0)


def test_mean_square_displacement_matches_recursion():
    n, m = 128, 3000
    endpoints = walk.simulate_endpoints(QT, n, 11, range(m))["S"][n]
    emp = np.mean(np.abs(endpoints) ** 2)
    target = float(oracle.abs_square_recursion(QT.phi1, n)[-1].real)
    se = np.std(np.abs(endpoints) ** 2) / math.sqrt(m)
    assert abs(emp - target) < 5.0 * se


def test_mean_endpoint_matches_normalizer():
    n, m = 128, 3000
    endpoints = walk.simulate_endpoints(QT, n, 13, range(m))["S"][n]
    target = complex(oracle.normalizer_a(QT.phi1, n)[-1])
    se = np.std(endpoints.real) / math.sqrt(m) + np.std(endpoints.imag) / math.sqrt(m)
    assert abs(np.mean(endpoints) - target) < 5.0 * se


# -- lattice coupling -------------------------------------------------------


def test_lattice_rejects_bad_params():
    with pytest.raises(ValueError):
        walk.lattice_simulate((0.5, 0.5, 0.5, -0.5), 10, seed=0)
    with pytest.raises(ValueError):
        walk.lattice_simulate((0.3, 0.3, 0.3, 0.3), 10, seed=0)


def test_lattice_matches_complex_walk_exactly():
    params = (0.4, 0.3, 0.2, 0.1)
    law = AngleLaw.quarter_turn(*params)
    for idx in range(5):
        lp = walk.lattice_simulate(params, 128, seed=21, path_index=idx)
        cp = walk.simulate_path(law, 128, seed=21, path_index=idx)
        assert np.allclose(lp.positions[:, 0], np.rint(cp.positions.real), atol=1e-9)
        assert np.allclose(lp.positions[:, 1], np.rint(cp.positions.imag), atol=1e-9)


def test_lattice_steps_are_unit_moves():
    lp = walk.lattice_simulate((0.25, 0.25, 0.25, 0.25), 300, seed=5)
    moves = np.diff(lp.positions, axis=0)
    assert np.all(np.abs(moves).sum(axis=1) == 1)


# -- quadratic variations ---------------------------------------------------


def test_quadratic_variation_uniform_is_deterministic():
    # phi1 = phi2 = 0: <M, Mbar>_n = n - 1 exactly and <M>_n = 0
    path = walk.simulate_path(UNIFORM, 256, seed=31)
    qv = walk.quadratic_variations(path, UNIFORM.phi1)
    assert qv.bracket_modulus[-1] == pytest.approx(255.0)
    assert abs(qv.bracket_complex[-1]) < 1e-12
    assert np.allclose(qv.bracket_modulus, np.arange(256))


def test_quadratic_variation_traces_are_cumulative():
    path = walk.simulate_path(QT, 128, seed=33)
    qv = walk.quadratic_variations(path, QT.phi1)
    assert qv.bracket_modulus[0] == 0.0
    assert qv.bracket_complex[0] == 0.0
    assert len(qv.bracket_modulus) == 128
    # modulus bracket increments are bounded by the normalizer weights
    a = oracle.normalizer_a(QT.phi1, 128, check=False)
    incr = np.diff(qv.bracket_modulus)
    assert np.all(incr <= 1.0 / np.abs(a[1:]) ** 2 + 1e-12)


def test_quadratic_variation_needs_two_steps():
    path = walk.simulate_path(QT, 1, seed=0)
    with pytest.raises(ValueError):
        walk.quadratic_variations(path, QT.phi1)


# -- batch helpers ----------------------------------------------------------


def test_simulate_endpoints_matches_per_path_simulation():
    out = walk.simulate_endpoints(QT, 64, 41, [0, 3, 7], snapshot_ns=(16, 64), with_power2=True)
    for row, idx in enumerate([0, 3, 7]):
        path = walk.simulate_path(QT, 64, 41, path_index=idx)
        assert out["S"][64][row] == pytest.approx(path.positions[-1], abs=1e-9)
        assert out["S"][16][row] == pytest.approx(path.positions[15], abs=1e-9)
        assert out["S2"][row] == pytest.approx(walk.step_powers(path, 2)[-1], abs=1e-9)


def test_simulate_endpoints_rejects_late_snapshot():
    with pytest.raises(ValueError):
        walk.simulate_endpoints(QT, 64, 0, [0], snapshot_ns=(128,))


def test_constant_law_fast_path_matches_generic():
    law = AngleLaw.constant(0.9)
    out = walk.simulate_endpoints(law, 300, 43, [2], with_power2=True)
    path = walk.simulate_path(law, 300, 43, path_index=2)
    assert out["S"][300][0] == pytest.approx(path.positions[-1], abs=1e-9)
    assert out["S2"][0] == pytest.approx(walk.step_powers(path, 2)[-1], abs=1e-9)


def test_yule_times_moments():
    # tau_n = sum Exp(m)/... : E tau_n = H_{n-1}
    n, m = 64, 4000
    taus = np.array([walk.yule_times(n, 51, i)[-1] for i in range(m)])
    target = np.sum(1.0 / np.arange(1, n))
    assert abs(taus.mean() - target) < 5.0 * taus.std() / math.sqrt(m)
    assert walk.yule_times(1, 0)[0] == 0.0


def test_yule_times_increasing():
    tau = walk.yule_times(200, seed=1)
    assert np.all(np.diff(tau) > 0)


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 40), st.integers(0, 3), st.integers(0, 2**20))
def test_walk_invariants(n, idx, seed):
    path = walk.simulate_path(QT, n, seed, path_index=idx)
    assert path.n == n
    assert np.allclose(np.abs(path.steps), 1.0, atol=1e-12)
    # reinforcement keeps steps in the quarter-turn subgroup of the circle
    angles = np.angle(path.steps) / (math.pi / 2.0)
    assert np.allclose(angles, np.rint(angles), atol=1e-9)
