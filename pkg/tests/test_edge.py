import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_potential, rk4_transfer
from qgscat.edge import (BoundaryData, asymptotic_form_eval, check_momentum, jost_boundary_data,
                         jost_pair, standard_solutions_at, transfer_matrices, transfer_matrix)
from qgscat.graph import PiecewisePotential


def free_transfer(k, a):
    return np.array([[np.cos(k * a), np.sin(k * a) / k], [-k * np.sin(k * a), np.cos(k * a)]])


@pytest.mark.parametrize("k,a", [(0.5, 1.0), (1.0, 2.3), (7.0, 0.4), (-1.3, 0.8)])
def test_free_transfer_matrix(k, a):
    M = transfer_matrix(PiecewisePotential.zero(), k, 0.0, a)
    assert np.allclose(M, free_transfer(k, a), atol=1e-14)


def test_identity_on_empty_interval():
    pot = PiecewisePotential(((0.3, 2.0), (0.5, -1.0)))
    assert np.array_equal(transfer_matrix(pot, 1.7, 0.4, 0.4), np.eye(2))


def test_zero_effective_momentum_is_linear():
    # k^2 == q on the whole segment: solutions are a + b x
    delta = 0.7
    pot = PiecewisePotential.constant(delta, 4.0)
    M = transfer_matrix(pot, 2.0, 0.0, delta)
    assert np.allclose(M, [[1.0, delta], [0.0, 1.0]], atol=1e-14)


def test_near_zero_effective_momentum_is_continuous():
    delta = 0.7
    base = transfer_matrix(PiecewisePotential.constant(delta, 4.0), 2.0, 0.0, delta)
    for eps in (1e-3, 1e-6, 1e-9):
        M = transfer_matrix(PiecewisePotential.constant(delta, 4.0), 2.0 + eps, 0.0, delta)
        assert np.abs(M - base).max() < 10 * eps


def test_classically_forbidden_segment():
    # q > k^2: hyperbolic solutions
    w, q, k = 0.5, 5.0, 1.0
    kap = np.sqrt(q - k * k)
    M = transfer_matrix(PiecewisePotential.constant(w, q), k, 0.0, w)
    want = [[np.cosh(kap * w), np.sinh(kap * w) / kap], [kap * np.sinh(kap * w), np.cosh(kap * w)]]
    assert np.allclose(M, want, atol=1e-13)


def test_standard_solutions():
    k, a = 1.3, 0.9
    th, dth, ph, dph = standard_solutions_at(PiecewisePotential.zero(), k, a)
    assert np.isclose(th, np.cos(k * a)) and np.isclose(ph, np.sin(k * a) / k)
    assert standard_solutions_at(PiecewisePotential.zero(), k, 0.0) == (1.0, 0.0, 0.0, 1.0)
    assert np.isclose(th * dph - dth * ph, 1.0, atol=1e-14)


def test_standard_solutions_against_ode_oracle():
    pot = PiecewisePotential(((1.0, 2.0),))
    th, dth, ph, dph = standard_solutions_at(pot, 1.0, 2.0)
    ref = rk4_transfer(pot, 1.0, 0.0, 2.0)
    assert np.allclose([th, dth, ph, dph], [ref[0, 0], ref[1, 0], ref[0, 1], ref[1, 1]], atol=1e-10)


def test_transfer_matches_ode_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(10):
        pot = random_potential(rng)
        k = rng.uniform(0.3, 5.0)
        x1 = pot.support_end + rng.uniform(0, 0.5)
        x0 = rng.uniform(0, x1)
        assert np.abs(transfer_matrix(pot, k, x0, x1) - rk4_transfer(pot, k, x0, x1)).max() < 1e-8


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.floats(0.05, 30.0))
def test_determinant_and_composition(seed, k):
    rng = np.random.default_rng(seed)
    pot = random_potential(rng)
    end = pot.support_end + 0.3
    x0, x1, x2 = np.sort(rng.uniform(0, end, 3))
    M01 = transfer_matrix(pot, k, x0, x1)
    M12 = transfer_matrix(pot, k, x1, x2)
    M02 = transfer_matrix(pot, k, x0, x2)
    scale = max(1.0, np.abs(M01).max() * np.abs(M12).max())
    assert abs(np.linalg.det(M02) - 1.0) < 1e-12 * max(1.0, np.abs(M02).max() ** 2)
    assert np.abs(M12 @ M01 - M02).max() < 1e-12 * scale


def test_transfer_continuous_in_k():
    pot = PiecewisePotential(((0.4, 3.0), (0.2, -2.0)))
    k, h = 1.7, 1e-7
    d = (transfer_matrix(pot, k + h, 0, 1) - transfer_matrix(pot, k - h, 0, 1)) / (2 * h)
    d2 = (transfer_matrix(pot, k + 10 * h, 0, 1) - transfer_matrix(pot, k - 10 * h, 0, 1)) / (20 * h)
    assert np.abs(d - d2).max() < 1e-5


def test_transfer_matrices_grid_matches_pointwise():
    pot = PiecewisePotential(((0.4, 3.0), (0.2, -2.0)))
    ks = np.linspace(0.1, 4.0, 17)
    grid = transfer_matrices(pot, ks, 0.1, 0.9)
    for k, M in zip(ks, grid):
        assert np.allclose(M, transfer_matrix(pot, k, 0.1, 0.9), atol=1e-14)


def test_transfer_rejects_reversed_interval():
    with pytest.raises(ValueError):
        transfer_matrix(PiecewisePotential.zero(), 1.0, 1.0, 0.5)


@pytest.mark.parametrize("bad", [0.0, np.nan, np.inf])
def test_momentum_must_be_real_nonzero(bad):
    with pytest.raises(ValueError):
        check_momentum(bad)


def test_free_jost_data():
    k = 1.9
    fp, fm = jost_pair(PiecewisePotential.zero(), k)
    assert fp == BoundaryData(1, 1j * k)
    assert fm == BoundaryData(1, -1j * k)
    assert np.isclose(fp.value * fm.derivative - fp.derivative * fm.value, -2j * k)


def test_jost_data_against_ode_oracle():
    pot = PiecewisePotential(((1.0, -1.0),))
    k = 2.0
    ref = np.linalg.solve(rk4_transfer(pot, k, 0.0, 1.0), [np.exp(1j * k), 1j * k * np.exp(1j * k)])
    f = jost_boundary_data(pot, k, +1)
    assert abs(f.value - ref[0]) < 1e-10 and abs(f.derivative - ref[1]) < 1e-10


def test_jost_sign_validated():
    with pytest.raises(ValueError):
        jost_boundary_data(PiecewisePotential.zero(), 1.0, 0)


def test_form_examples():
    k = 1.4
    fp, fm = jost_pair(PiecewisePotential.zero(), k)
    assert np.isclose(asymptotic_form_eval(k, [fp], [fp]), 2j)
    assert np.isclose(asymptotic_form_eval(k, [fp], [fm]), 0)
    theta, phi = BoundaryData(1, 0), BoundaryData(0, 1)
    assert asymptotic_form_eval(k, [theta], [phi], normalized=False) == 1


def test_form_rejects_mismatched_ray_counts():
    with pytest.raises(ValueError):
        asymptotic_form_eval(1.0, [BoundaryData(1, 0)], [])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.floats(0.1, 20.0))
def test_jost_relations_with_potential(seed, k):
    rng = np.random.default_rng(seed)
    fp, fm = jost_pair(random_potential(rng), k)
    assert abs(asymptotic_form_eval(k, [fp], [fp]) - 2j) < 1e-10
    assert abs(asymptotic_form_eval(k, [fm], [fm]) + 2j) < 1e-10
    assert abs(asymptotic_form_eval(k, [fp], [fm])) < 1e-10


def test_form_is_anti_hermitian_on_solution_data():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = [BoundaryData(*(rng.normal(size=2) + 1j * rng.normal(size=2))) for _ in range(3)]
        b = [BoundaryData(*(rng.normal(size=2) + 1j * rng.normal(size=2))) for _ in range(3)]
        assert abs(asymptotic_form_eval(0.7, a, b) + np.conj(asymptotic_form_eval(0.7, b, a))) < 1e-12
