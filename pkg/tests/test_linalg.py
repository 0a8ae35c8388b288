import math

import numpy as np
import pytest

from povmlab.errors import DimensionMismatch, InvariantViolation, NotHermitian, NotPsd, NotUnitary, SpectrumOutsideDomain
from povmlab.linalg import (
    DEFAULT_TOL,
    Interval,
    Tolerance,
    as_matrix,
    default_tolerance,
    fun_calc,
    is_psd,
    psd_pinv,
    psd_pinv_sqrt,
    psd_sqrt,
    range_projection,
    rank,
    require_unitary,
)
from povmlab.randomness import RngStream, haar_unitary


def test_tolerance_bounds():
    assert Tolerance.from_identity_tol(1e-6).eigen_tol == pytest.approx(1e-7)
    with pytest.raises(InvariantViolation):
        Tolerance(eigen_tol=0.0)
    with pytest.raises(InvariantViolation):
        Tolerance(identity_tol=0.1)


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("POVM_LAB_TOL", "1e-6")
    assert default_tolerance().identity_tol == 1e-6
    monkeypatch.delenv("POVM_LAB_TOL")
    assert default_tolerance() == DEFAULT_TOL


def test_as_matrix_validation():
    m = as_matrix([[1, 2], [3, 4]])
    assert m.dtype == np.complex128 and not m.flags.writeable
    with pytest.raises(InvariantViolation):
        as_matrix([[1, 2, 3]])
    with pytest.raises(DimensionMismatch):
        as_matrix(np.eye(2), 3)
    with pytest.raises(InvariantViolation):
        as_matrix([[np.nan]])


def test_psd_checks():
    assert is_psd(np.diag([1.0, 0.0]))
    assert not is_psd(np.diag([1.0, -1e-3]))
    with pytest.raises(NotHermitian):
        is_psd(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotPsd):
        psd_sqrt(np.diag([1.0, -1.0]))


def test_sqrt_examples():
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    p = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(psd_sqrt(p), p)  # projections are their own roots


def test_sqrt_squares_back_and_noise_floor():
    gen = np.random.default_rng(0)
    for _ in range(50):
        v = gen.standard_normal((3, 1)) + 1j * gen.standard_normal((3, 1))
        h = v @ v.conj().T
        r = psd_sqrt(h)
        assert np.max(np.abs(r @ r - h)) < 1e-12
        # rank-one input: the root must stay rank one (no sqrt-of-rounding leakage)
        assert np.linalg.eigvalsh(r)[:2].max() < 1e-12


def test_pinv_and_ranges():
    h = np.diag([2.0, 0.0, 1e-14])
    p = psd_pinv(h)
    assert np.allclose(p, np.diag([0.5, 0.0, 0.0]))
    assert np.allclose(p @ h, range_projection(h))
    assert rank(h) == 1
    assert np.allclose(psd_pinv_sqrt(h), np.diag([1 / np.sqrt(2), 0.0, 0.0]))


def test_pinv_sqrt_ignores_rounding_eigenvalues():
    v = np.array([1.0, 1j]) / np.sqrt(2)
    h = np.outer(v, v.conj()) + 1e-17 * np.eye(2)
    r = psd_pinv_sqrt(h)
    assert np.max(np.abs(r @ h @ r - range_projection(h))) < 1e-12


def test_unitary_check():
    u = haar_unitary(3, RngStream(1))
    assert np.allclose(require_unitary(u).conj().T @ u, np.eye(3))
    with pytest.raises(NotUnitary):
        require_unitary(np.diag([1.0, 2.0]))


def test_interval():
    assert str(Interval(0, math.inf)) == "(0, inf)"
    assert Interval(0, 1, True, False).contains(0.0)
    assert not Interval(0, 1).contains(0.0)


def test_fun_calc_domain_handling():
    a = np.diag([1.0, 4.0])
    assert np.allclose(fun_calc(a, np.sqrt, domain=Interval(0, math.inf, lo_closed=True)), np.diag([1.0, 2.0]))
    # clamp a tiny negative eigenvalue onto a closed endpoint
    out = fun_calc(np.diag([-1e-12, 1.0]), np.sqrt, domain=Interval(0, math.inf, lo_closed=True))
    assert np.allclose(out, np.diag([0.0, 1.0]))
    # but never onto an open endpoint
    with pytest.raises(SpectrumOutsideDomain) as info:
        fun_calc(np.diag([0.0, 1.0]), lambda t: 1 / t, domain=Interval(0, math.inf))
    assert info.value.eigenvalue == 0.0
    with pytest.raises(NotHermitian):
        fun_calc(np.array([[0, 1], [0, 0]]), np.exp)


def test_fun_calc_unitary_covariance():
    gen = np.random.default_rng(3)
    u = haar_unitary(3, RngStream(3))
    z = gen.standard_normal((3, 3)) + 1j * gen.standard_normal((3, 3))
    a = z + z.conj().T
    lhs = fun_calc(u.conj().T @ a @ u, np.exp)
    rhs = u.conj().T @ fun_calc(a, np.exp) @ u
    assert np.max(np.abs(lhs - rhs)) < 1e-10
