import warnings

import numpy as np
import pytest

from povmlab.convex import (
    classical_combination,
    cstar_combination,
    extremal_decomposition,
    is_cstar_extreme,
    is_extreme,
    make_cstar_coefficients,
    perturbation_direction,
    sharp_coarsening,
    unitarily_equivalent,
    verify_coarsening,
    weakly_independent,
)
from povmlab.errors import CoefficientsInvalid, DepthExceeded, DimensionMismatch, NotPsd, WeightsInvalid
from povmlab.integral import conjugate_povm
from povmlab.linalg import range_projection
from povmlab.model import dirac, embed_classical, is_sharp, make_povm
from povmlab.randomness import RngStream, haar_unitary, random_cstar_coefficients, random_povm, random_rank_one_povm
from support import (
    SDP_THRESHOLD,
    classical_uniform,
    extremality_instance,
    sdp_perturbation_value,
    seeded_povm,
    sharp_qubit,
    trine,
)


# combinations --------------------------------------------------------------

def test_single_unitary_combination_is_conjugation():
    u = haar_unitary(2, RngStream(1))
    nu = trine()
    out = cstar_combination(make_cstar_coefficients([u]), [nu])
    assert out.distance(conjugate_povm(nu, u)) < 1e-12


def test_scalar_coefficients_give_classical_mixture():
    a, b = trine(), sharp_qubit()
    lam = 0.3
    coeffs = make_cstar_coefficients([np.sqrt(lam) * np.eye(2), np.sqrt(1 - lam) * np.eye(2)])
    out = cstar_combination(coeffs, [a, b])
    assert out.distance(classical_combination([lam, 1 - lam], [a, b])) < 1e-12
    assert np.allclose(out.effect("t0"), lam * a.effect("t0"))
    assert np.allclose(out.effect("a"), (1 - lam) * b.effect("a"))


def test_coefficient_validation():
    with pytest.raises(CoefficientsInvalid):
        make_cstar_coefficients([np.eye(2), np.eye(2)])
    with pytest.raises(DimensionMismatch):
        make_cstar_coefficients([np.eye(2) / np.sqrt(2), np.eye(3) / np.sqrt(2)])
    coeffs = make_cstar_coefficients([np.eye(2)])
    with pytest.raises(CoefficientsInvalid):
        cstar_combination(coeffs, [trine(), trine()])
    with pytest.raises(DimensionMismatch):
        cstar_combination(coeffs, [dirac("a", 3)])
    with pytest.raises(WeightsInvalid):
        classical_combination([0.5, 0.6], [trine(), trine()])


def test_proper_flag():
    assert make_cstar_coefficients([np.eye(2) / np.sqrt(2)] * 2).proper
    assert not make_cstar_coefficients([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).proper


# weak independence ----------------------------------------------------------

def test_orthogonal_projections_independent():
    assert weakly_independent([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).independent


def test_two_full_rank_effects_dependent_with_valid_witness():
    h1, h2 = np.diag([0.3, 0.6]), np.diag([0.7, 0.4])
    result = weakly_independent([h1, h2])
    assert not result.independent
    t1, t2 = result.witness
    assert np.max(np.abs(t1 + t2)) < 1e-9
    assert np.linalg.norm(np.concatenate([t1.ravel(), t2.ravel()])) == pytest.approx(1.0)


def test_witness_lies_in_corners():
    nu = random_rank_one_povm(4, 2, RngStream(2), real=True)
    result = weakly_independent(nu.effects)
    assert not result.independent
    for h, t in zip(nu.effects, result.witness):
        q = range_projection(h)
        assert np.max(np.abs(q @ t @ q - t)) < 1e-9
    assert np.max(np.abs(sum(result.witness))) < 1e-9


def test_trine_independent():
    assert weakly_independent(trine().effects).independent


def test_weak_independence_rejects_non_psd():
    with pytest.raises(NotPsd):
        weakly_independent([np.diag([1.0, -1.0])])


@pytest.mark.parametrize("seed", range(40))
def test_dimension_count_bound(seed):
    nu = seeded_povm(seed)
    ranks = [np.linalg.matrix_rank(h, tol=1e-9) for h in nu.effects]
    if sum(r * r for r in ranks) > nu.dim**2:
        assert not is_extreme(nu)


# classification -------------------------------------------------------------

def test_pinned_classifications():
    assert is_extreme(sharp_qubit()) and is_cstar_extreme(sharp_qubit())
    assert is_extreme(trine()) and not is_cstar_extreme(trine())
    assert not is_extreme(classical_uniform())
    assert is_cstar_extreme(dirac("x0", 3))


@pytest.mark.parametrize("seed", range(30))
def test_cstar_extreme_implies_extreme(seed):
    nu = extremality_instance(seed)
    if is_cstar_extreme(nu):
        assert is_extreme(nu)


def test_classification_unitary_invariance():
    for seed in range(100):
        nu = extremality_instance(seed)
        u = haar_unitary(2, RngStream(1000 + seed))
        nu2 = conjugate_povm(nu, u)
        assert is_extreme(nu2) == is_extreme(nu)
        assert is_cstar_extreme(nu2) == is_cstar_extreme(nu)


def test_classifier_agrees_with_sdp_cross_check():
    """Independent convex-optimization check on a subset of the instance mix."""
    pytest.importorskip("cvxpy")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed in range(0, 120, 3):
            nu = extremality_instance(seed)
            value = sdp_perturbation_value(nu, seed)
            assert (value < SDP_THRESHOLD) == is_extreme(nu), (seed, value)


# extremal decomposition -------------------------------------------------------

def _check_decomposition(nu, dec, tol=1e-9):
    assert abs(dec.total_weight() - 1.0) < tol
    assert dec.residual(nu) <= tol
    assert all(w > 0 for w, _ in dec)
    assert all(is_extreme(c) for _, c in dec)
    assert dec.depth <= len(nu) * nu.dim


def test_decomposition_of_extreme_is_singleton():
    dec = extremal_decomposition(trine())
    assert len(dec) == 1 and dec.components[0][1] is not None


def test_decomposition_of_classical_uniform():
    nu = classical_uniform()
    dec = extremal_decomposition(nu)
    _check_decomposition(nu, dec)
    assert len(dec) > 1


def test_scalar_classical_decomposes_into_diracs():
    nu = embed_classical([0.5, 0.5], ["a", "b"], 1)
    dec = extremal_decomposition(nu)
    _check_decomposition(nu, dec)
    weights = sorted((c.labels, w) for w, c in dec)
    assert weights == [(("a",), pytest.approx(0.5)), (("b",), pytest.approx(0.5))]


@pytest.mark.parametrize("seed", range(15))
def test_decomposition_random(seed):
    nu = seeded_povm(seed, dims=(2, 3), ms=(2, 3, 4))
    _check_decomposition(nu, extremal_decomposition(nu))


def test_perturbation_direction_invariants():
    nu = random_povm(3, 2, RngStream(11))
    g = perturbation_direction(nu).values
    assert np.max(np.abs(sum(g.values()))) < 1e-9
    for x, gx in g.items():
        assert np.max(np.abs(gx - gx.conj().T)) < 1e-12
    assert perturbation_direction(trine()) is None


def test_depth_exceeded_carries_partial():
    nu = random_povm(3, 2, RngStream(12))
    with pytest.raises(DepthExceeded) as info:
        extremal_decomposition(nu, max_depth=1)
    assert len(info.value.partial) >= 1


# sharp coarsening -------------------------------------------------------------

def test_sharp_coarsening_examples():
    coeffs, diracs = sharp_coarsening(sharp_qubit())
    assert np.allclose(coeffs.matrices[0], np.diag([1.0, 0.0]))
    assert [d.labels for d in diracs] == [("a",), ("b",)]
    assert not coeffs.proper
    coeffs, diracs = sharp_coarsening(dirac("x0", 2))
    assert np.allclose(coeffs.matrices[0], np.eye(2)) and coeffs.proper
    nu = trine()
    coeffs, diracs = sharp_coarsening(nu)
    assert cstar_combination(coeffs, diracs).distance(nu) < 1e-12
    assert all(is_sharp(d) for d in diracs)


def test_sharp_coarsening_proper_iff_invertible():
    nu = random_povm(3, 2, RngStream(13))
    coeffs, _ = sharp_coarsening(nu)
    assert coeffs.proper


# coarsening verification ------------------------------------------------------

def test_verify_coarsening_examples():
    nu = trine()
    half = make_cstar_coefficients([np.eye(2) / np.sqrt(2)] * 2)
    assert verify_coarsening(nu, half, [nu, nu])
    coeffs, diracs = sharp_coarsening(nu)
    assert not verify_coarsening(nu, coeffs, diracs)  # rank-one roots are not invertible
    # proper mixture of unitary conjugates of nu
    r = RngStream(14)
    us = [haar_unitary(2, r) for _ in range(2)]
    a = [us[0] / np.sqrt(2), us[1] / np.sqrt(2)]
    conj = [conjugate_povm(nu, u.conj().T) for u in us]
    assert verify_coarsening(nu, make_cstar_coefficients(a), conj)
    assert not verify_coarsening(sharp_qubit(), half, [nu, nu])
    with pytest.raises(CoefficientsInvalid):
        verify_coarsening(nu, half, [nu])


def test_random_coefficients_rarely_proper_for_rank_deficient_blocks():
    # m d > d: blocks are generically invertible here, so only the invariant is asserted
    c = random_cstar_coefficients(3, 2, RngStream(15))
    assert np.allclose(sum(a.conj().T @ a for a in c), np.eye(2))


# unitary equivalence ----------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_equivalence_certificate(seed):
    r = RngStream(seed)
    nu = seeded_povm(seed, ms=(2, 3, 4))
    u = haar_unitary(nu.dim, r)
    verdict = unitarily_equivalent(nu, conjugate_povm(nu, u), RngStream(100 + seed))
    assert verdict.verdict == "yes"
    w = verdict.unitary
    for h, h2 in zip(nu.effects, conjugate_povm(nu, u).effects):
        assert np.max(np.abs(w.conj().T @ h @ w - h2)) <= 1e-9


def test_equivalence_refutations():
    r = RngStream(20)
    assert unitarily_equivalent(sharp_qubit(), trine(), r).verdict == "no"
    nu = random_povm(2, 2, r)
    h0, h1 = nu.effects
    bumped = make_povm(2, [(nu.points[0], h0 + 0.01 * np.diag([1, -1])), (nu.points[1], h1 - 0.01 * np.diag([1, -1]))])
    assert unitarily_equivalent(nu, bumped, r).verdict == "no"
    with pytest.raises(DimensionMismatch):
        unitarily_equivalent(trine(), dirac("t0", 3), r)


def test_equivalence_degenerate_is_undetermined_or_yes():
    # scalar effects: every unitary works, but A has a degenerate spectrum
    nu = classical_uniform()
    verdict = unitarily_equivalent(nu, nu, RngStream(21))
    assert verdict.verdict == "undetermined"
