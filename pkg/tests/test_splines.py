import numpy as np
import pytest

from locoforce.splines import (DEGREES, DomainError, PiecewiseTrajectory,
                               Spline3, accel_gram, basis_row, sample_times)


def horner_eval(coeffs, t):
    """Independent scalar polynomial evaluation (Horner, descending degrees)."""
    acc = 0.0
    for c in coeffs:
        acc = acc * t + c
    return acc


def horner_derivative(coeffs):
    """Coefficients of the derivative, still in descending-degree layout."""
    degrees = range(len(coeffs) - 1, 0, -1)
    return [c * p for c, p in zip(coeffs[:-1], degrees)]


def test_basis_row_matches_horner_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        coeffs = rng.normal(size=6)
        t = rng.uniform(-2.0, 2.0)
        d1 = horner_derivative(coeffs)
        d2 = horner_derivative(d1)
        assert basis_row(t, 0) @ coeffs == pytest.approx(horner_eval(coeffs, t), rel=1e-12, abs=1e-12)
        assert basis_row(t, 1) @ coeffs == pytest.approx(horner_eval(d1, t), rel=1e-12, abs=1e-12)
        assert basis_row(t, 2) @ coeffs == pytest.approx(horner_eval(d2, t), rel=1e-12, abs=1e-12)


def test_basis_row_rejects_higher_derivatives():
    with pytest.raises(ValueError):
        basis_row(0.5, 3)


def test_derivative_consistency_against_finite_differences():
    rng = np.random.default_rng(1)
    h = 1e-5
    for _ in range(50):
        coeffs = rng.normal(size=(3, 6))
        s = Spline3(coeffs, 0.0, 1.0)
        t = rng.uniform(0.1, 0.9)
        fd_v = (s.eval(t + h, 0) - s.eval(t - h, 0)) / (2 * h)
        fd_a = (s.eval(t + h, 1) - s.eval(t - h, 1)) / (2 * h)
        scale = max(1.0, float(np.abs(s.eval(t, 1)).max()))
        assert np.abs(fd_v - s.eval(t, 1)).max() / scale <= 1e-6
        scale = max(1.0, float(np.abs(s.eval(t, 2)).max()))
        assert np.abs(fd_a - s.eval(t, 2)).max() / scale <= 1e-6


def test_accel_gram_matches_gauss_legendre_quadrature():
    # integrand is a polynomial of degree <= 8, exact with 5 nodes; use 8
    nodes, weights = np.polynomial.legendre.leggauss(8)
    rng = np.random.default_rng(2)
    for _ in range(20):
        t0 = rng.uniform(-1.0, 1.0)
        tf = t0 + rng.uniform(0.2, 2.0)
        ts = 0.5 * (tf - t0) * nodes + 0.5 * (tf + t0)
        ws = 0.5 * (tf - t0) * weights
        rows = np.vstack([basis_row(t, 2) for t in ts])
        oracle = rows.T @ (ws[:, None] * rows)
        gram = accel_gram(t0, tf)
        scale = max(1.0, float(np.abs(oracle).max()))
        assert np.abs(gram - oracle).max() / scale <= 1e-8


def test_accel_gram_rank_and_quadratic_form():
    gram = accel_gram(0.0, 1.0)
    assert np.linalg.matrix_rank(gram) == 4
    # c @ G @ c is the integral of the squared acceleration
    c = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])   # t^3 -> a = 6t
    assert c @ gram @ c == pytest.approx(12.0)      # int_0^1 36 t^2 dt


def test_sample_times_are_six_even_points():
    ts = sample_times(1.0, 2.0)
    assert ts.shape == (6,)
    assert ts[0] == 1.0 and ts[-1] == 2.0
    assert np.allclose(np.diff(ts), 0.2)
    with pytest.raises(DomainError):
        sample_times(1.0, 1.0)


def test_spline3_validates_shape_and_domain():
    with pytest.raises(ValueError):
        Spline3(np.zeros((2, 6)), 0.0, 1.0)
    with pytest.raises(ValueError):
        Spline3(np.full((3, 6), np.nan), 0.0, 1.0)
    with pytest.raises(DomainError):
        Spline3(np.zeros((3, 6)), 1.0, 0.0)


def test_trajectory_requires_contiguous_pieces():
    a = Spline3(np.zeros((3, 6)), 0.0, 1.0)
    b = Spline3(np.zeros((3, 6)), 1.5, 2.0)
    with pytest.raises(ValueError):
        PiecewiseTrajectory((a, b))
    with pytest.raises(ValueError):
        PiecewiseTrajectory(())


def test_trajectory_boundary_resolves_to_later_piece():
    ca = np.zeros((3, 6)); ca[:, 5] = 1.0   # constant 1
    cb = np.zeros((3, 6)); cb[:, 5] = 2.0   # constant 2
    traj = PiecewiseTrajectory((Spline3(ca, 0.0, 1.0), Spline3(cb, 1.0, 2.0)))
    assert traj.piece_index(1.0) == 1
    assert np.allclose(traj.eval(1.0), 2.0)
    assert np.allclose(traj.eval(0.999), 1.0)
    assert traj.piece_index(2.0) == 1
    assert traj.domains() == [(0.0, 1.0), (1.0, 2.0)]
    with pytest.raises(DomainError):
        traj.eval(2.1)
    with pytest.raises(DomainError):
        traj.eval(-0.1)
