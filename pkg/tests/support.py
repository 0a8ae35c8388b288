"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np

from povmlab.model import OutcomePoint, QuantumRandomVariable, embed_classical, make_povm
from povmlab.randomness import RngStream, haar_unitary, random_povm, random_rank_one_povm


def trine():
    vs = [np.array([np.cos(a), np.sin(a)]) for a in (0.0, 2 * np.pi / 3, 4 * np.pi / 3)]
    return make_povm(2, [(OutcomePoint(f"t{k}", float(k)), (2 / 3) * np.outer(v, v)) for k, v in enumerate(vs)])


def sharp_qubit():
    return make_povm(2, [(OutcomePoint("a", 0.0), np.diag([1.0, 0.0])), (OutcomePoint("b", 1.0), np.diag([0.0, 1.0]))])


def classical_uniform(dim=2):
    return embed_classical([0.5, 0.5], [OutcomePoint("a", 0.0), OutcomePoint("b", 1.0)], dim)


def random_hermitian(d, gen, scale=1.0):
    z = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
    return scale * (z + z.conj().T) / 2


def random_psd(d, gen, shift=0.0):
    z = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
    return z @ z.conj().T / d + shift * np.eye(d)


def random_effect(d, gen):
    """Effect with spectrum drawn uniformly in [0, 1]."""
    u = haar_unitary(d, RngStream(int(gen.integers(2**63))))
    return u @ np.diag(gen.uniform(0, 1, d)) @ u.conj().T


def random_state(d, gen):
    rho = random_psd(d, gen)
    return rho / np.trace(rho).real


def random_qrv(labels, d, gen, kind="hermitian", shift=0.0):
    if kind == "effect":
        return QuantumRandomVariable({x: random_effect(d, gen) for x in labels}, d)
    if kind == "psd":
        return QuantumRandomVariable({x: random_psd(d, gen, shift) for x in labels}, d)
    if kind == "complex":
        return QuantumRandomVariable(
            {x: gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d)) for x in labels}, d
        )
    return QuantumRandomVariable({x: random_hermitian(d, gen) for x in labels}, d)


def seeded_povm(seed, dims=(2, 3), ms=(1, 2, 3, 4, 5)):
    """Random POVM with dimension and outcome count drawn from ``seed``."""
    gen = np.random.default_rng(seed)
    d = int(gen.choice(dims))
    m = int(gen.choice(ms))
    return random_povm(m, d, RngStream(seed))


def max_residual(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def hermitian_basis(d):
    """Real basis of the d x d Hermitian matrices (orthonormal in Hilbert-Schmidt)."""
    basis = []
    for k in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[k, k] = 1.0
        basis.append(e)
        for l in range(k + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[k, l] = e[l, k] = 1 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[k, l], e[l, k] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(e)
    return basis


def _realify(m):
    return np.concatenate([m.real.reshape(-1), m.imag.reshape(-1)])


def nullspace_perturbation(nu, rank_tol=1e-8):
    """Brute-force search for a perturbation ``g`` with ``nu +- eps g`` a POVM.

    Works in real coordinates over a Hermitian basis: the constraints are
    ``sum_j g_j = 0`` and ``(1 - q_j) g_j = 0`` with ``q_j`` the range
    projection of ``h_j`` (from ``numpy.linalg.eigh``). Any nonzero solution
    is returned after checking positivity of ``h_j +- eps g_j`` for small
    ``eps``; None means no perturbation exists, i.e. ``nu`` is extreme.
    """
    from scipy.linalg import null_space

    d, m = nu.dim, len(nu)
    basis = hermitian_basis(d)
    n = len(basis)
    blocks_sum = np.hstack([np.column_stack([_realify(b) for b in basis])] * m)
    rows = [blocks_sum]
    for j, h in enumerate(nu.effects):
        w, v = np.linalg.eigh(np.asarray(h))
        null_proj = v[:, w <= rank_tol] @ v[:, w <= rank_tol].conj().T
        block = np.zeros((2 * d * d, n * m))
        block[:, j * n : (j + 1) * n] = np.column_stack([_realify(null_proj @ b) for b in basis])
        rows.append(block)
    kernel = null_space(np.vstack(rows), rcond=1e-9)
    if kernel.shape[1] == 0:
        return None
    coords = kernel[:, 0]
    g = [sum(c * b for c, b in zip(coords[j * n : (j + 1) * n], basis)) for j in range(m)]
    eps = 1e-3 * min(np.linalg.eigvalsh(np.asarray(h))[np.linalg.eigvalsh(np.asarray(h)) > rank_tol].min()
                     for h in nu.effects)
    for h, gj in zip(nu.effects, g):
        for sign in (1, -1):
            assert np.linalg.eigvalsh(np.asarray(h) + sign * eps * gj)[0] >= -1e-12, "oracle perturbation leaves the cone"
    return g


def oracle_extreme(nu):
    return nullspace_perturbation(nu) is None


def sdp_perturbation_value(nu, seed=0):
    """Convex-optimization cross-check of extremality.

    Maximizes a random linear functional over Hermitian perturbations ``g_j``
    with ``h_j +- g_j >= 0`` and ``sum_j g_j = 0``. The feasible set is
    symmetric, so the optimum is zero iff ``nu`` is extreme. Rank-deficient
    effects make the problem degenerate, so solver accuracy is only ~1e-6.
    """
    import cvxpy as cp

    gen = np.random.default_rng(seed)
    d = nu.dim
    gs = [cp.Variable((d, d), hermitian=True) for _ in nu.effects]
    cons = [sum(gs) == 0]
    for h, g in zip(nu.effects, gs):
        cons += [np.asarray(h) + g >> 0, np.asarray(h) - g >> 0]
    cs = [random_hermitian(d, gen) for _ in gs]
    objective = cp.Maximize(sum(cp.real(cp.trace(c @ g)) for c, g in zip(cs, gs)))
    problem = cp.Problem(objective, cons)
    problem.solve(solver="CLARABEL")
    return float(problem.value)


SDP_THRESHOLD = 1e-5


def extremality_instance(seed):
    """Instance mix at d = 2, m <= 4 covering extreme and non-extreme cases."""
    gen = np.random.default_rng(seed)
    r = RngStream(seed)
    kind = seed % 6
    if kind == 0:
        return random_povm(int(gen.integers(1, 5)), 2, r)
    if kind == 1:
        return random_rank_one_povm(int(gen.integers(2, 5)), 2, r)
    if kind == 2:
        return random_rank_one_povm(int(gen.integers(3, 5)), 2, r, real=True)
    if kind == 3:
        return random_povm(int(gen.integers(1, 3)), 2, r, sharp=True)
    if kind == 4:
        w = gen.dirichlet(np.ones(int(gen.integers(1, 5))))
        return embed_classical(w, [f"x{j}" for j in range(len(w))], 2)
    # rank-one effects merged with a full-rank remainder
    base = random_rank_one_povm(3, 2, r)
    lam = gen.uniform(0.2, 0.8)
    entries = [(p, lam * h) for p, h in base]
    entries.append((OutcomePoint("rest"), (1 - lam) * np.eye(2)))
    return make_povm(2, entries)
