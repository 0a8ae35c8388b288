"""Seeded random unitaries, coefficients, channels, POVMs and outcome sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .convex import CstarCoefficients, cstar_combination, make_cstar_coefficients
from .errors import DimensionMismatch, InvariantViolation, NotUnital
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, dagger, hermitian_part, max_abs
from .model import FinitePovm, OutcomePoint, State, dirac, make_povm


class RngStream:
    """Exclusive-use random stream: a PCG64 generator keyed by a 64-bit seed."""

    def __init__(self, seed: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise InvariantViolation(f"seed {seed} is not an unsigned 64-bit integer")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def spawn(self, n: int) -> list["RngStream"]:
        """Derive ``n`` independent child streams deterministically."""
        seeds = self.generator.integers(0, 2**63, size=n)
        return [RngStream(int(s)) for s in seeds]

    def __repr__(self):
        return f"RngStream(seed={self.seed})"


def _ginibre(n: int, m: int, gen: np.random.Generator) -> np.ndarray:
    return (gen.standard_normal((n, m)) + 1j * gen.standard_normal((n, m))) / np.sqrt(2.0)


def haar_unitary(n: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary (QR of a Ginibre matrix, phases fixed by ``diag R``)."""
    if n < 1:
        raise InvariantViolation("dimension must be positive")
    q, r = np.linalg.qr(_ginibre(n, n, rng.generator))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_cstar_coefficients(m: int, d: int, rng: RngStream, cfg: Tolerance = DEFAULT_TOL) -> CstarCoefficients:
    """The ``m`` d x d blocks of the first block column of a Haar unitary on ``C^{md}``."""
    if m < 1:
        raise InvariantViolation("need at least one coefficient")
    u = haar_unitary(m * d, rng)
    return make_cstar_coefficients([u[j * d : (j + 1) * d, :d] for j in range(m)], d, cfg)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Channel ``rho -> sum_k a_k rho a_k^*``; acts on effects as ``h -> sum_k a_k^* h a_k``."""

    dim: int
    kraus: tuple[np.ndarray, ...]
    trace_preserving: bool
    unital: bool

    def apply_state(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        return sum(a @ rho @ dagger(a) for a in self.kraus)

    def apply_effect(self, h) -> np.ndarray:
        stack = np.array(self.kraus)
        return kernels.congruence_sum(stack, np.broadcast_to(np.asarray(h, dtype=np.complex128), stack.shape))


def make_channel(kraus: Sequence, dim: int | None = None, cfg: Tolerance = DEFAULT_TOL) -> KrausChannel:
    mats = [as_matrix(a, dim) for a in kraus]
    if not mats:
        raise InvariantViolation("a channel needs at least one Kraus operator")
    dim = mats[0].shape[0]
    if any(a.shape[0] != dim for a in mats):
        raise DimensionMismatch("Kraus operators have mixed dimensions")
    eye = np.eye(dim)
    tp = max_abs(sum(dagger(a) @ a for a in mats) - eye) <= cfg.identity_tol
    unital = max_abs(sum(a @ dagger(a) for a in mats) - eye) <= cfg.identity_tol
    return KrausChannel(dim, tuple(mats), bool(tp), bool(unital))


def random_simplex(m: int, rng: RngStream) -> np.ndarray:
    """Uniform draw from the probability simplex (normalized exponentials)."""
    e = rng.generator.standard_exponential(m)
    return e / e.sum()


def random_mixed_unitary_channel(m: int, d: int, rng: RngStream, cfg: Tolerance = DEFAULT_TOL) -> KrausChannel:
    if m < 1:
        raise InvariantViolation("need at least one unitary")
    p = random_simplex(m, rng)
    return make_channel([np.sqrt(pj) * haar_unitary(d, rng) for pj in p], d, cfg)


def apply_channel_to_povm(channel: KrausChannel, nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """POVM ``x -> sum_k a_k^* nu({x}) a_k``.

    Both flags are required: unitality of the dual map keeps the sum equal to
    the identity, and trace preservation of the Schroedinger map keeps the
    effects below the identity (so each stays an effect).
    """
    if channel.dim != nu.dim:
        raise DimensionMismatch(f"channel has dim {channel.dim}, POVM has dim {nu.dim}")
    if not (channel.unital and channel.trace_preserving):
        raise NotUnital("channel must be unital and trace preserving to act on POVMs")
    stack = np.array(channel.kraus)
    entries = []
    for p, h in nu:
        image = kernels.congruence_sum(stack, np.broadcast_to(h, stack.shape))
        if np.linalg.norm(image, 2) > cfg.eigen_tol:
            entries.append((p, hermitian_part(image)))
    return make_povm(nu.dim, entries, cfg)


def _labels(m: int) -> list[OutcomePoint]:
    return [OutcomePoint(f"x{j}", float(j)) for j in range(m)]


def random_povm(m: int, d: int, rng: RngStream, sharp: bool = False, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """Random POVM on points ``x0..x{m-1}``.

    The default draws random C*-convex coefficients and applies them to the
    Dirac measures at the points. ``sharp=True`` Haar-rotates a random
    partition of an orthonormal basis into ``m`` nonempty blocks (needs ``m <= d``).
    """
    if m < 1:
        raise InvariantViolation("need at least one outcome")
    points = _labels(m)
    if sharp:
        if m > d:
            raise InvariantViolation(f"a sharp POVM in dimension {d} has at most {d} outcomes")
        gen = rng.generator
        # every block nonempty: one basis vector each, the rest assigned at random
        owner = np.concatenate([np.arange(m), gen.integers(0, m, size=d - m)])
        owner = gen.permutation(owner)
        u = haar_unitary(d, rng)
        entries = []
        for j, p in enumerate(points):
            cols = u[:, owner == j]
            entries.append((p, hermitian_part(cols @ dagger(cols))))
        return make_povm(d, entries, cfg)
    while True:
        coeffs = random_cstar_coefficients(m, d, rng, cfg)
        if all(np.linalg.norm(a, 2) ** 2 > cfg.eigen_tol for a in coeffs):
            break
    return cstar_combination(coeffs, [dirac(p.label, d, p.coordinate) for p in points], cfg)


def random_rank_one_povm(m: int, d: int, rng: RngStream, real: bool = False, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """POVM with rank-one effects ``|v_j><v_j|`` from the first ``d`` columns of an m x m unitary.

    The rows ``v_j`` of an isometry ``C^d -> C^m`` satisfy ``sum_j v_j v_j^* = 1``.
    ``real=True`` uses a Haar orthogonal matrix instead.
    """
    if m < d:
        raise InvariantViolation("a rank-one POVM needs at least d outcomes")
    if real:
        q, r = np.linalg.qr(rng.generator.standard_normal((m, m)))
        w = q * np.sign(np.diagonal(r))
    else:
        w = haar_unitary(m, rng)
    rows = w[:, :d].conj()
    entries = [(p, np.outer(v, v.conj())) for p, v in zip(_labels(m), rows)]
    return make_povm(d, entries, cfg)


def outcome_distribution(rho: State, nu: FinitePovm) -> np.ndarray:
    if rho.dim != nu.dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, POVM has dim {nu.dim}")
    p = np.array([np.real(np.trace(rho.matrix @ h)) for h in nu.effects])
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_outcome(rho: State, nu: FinitePovm, rng: RngStream) -> OutcomePoint:
    """Draw one outcome point with probability ``tr(rho h_j)``."""
    return sample_outcomes(rho, nu, 1, rng)[0]


def sample_outcomes(rho: State, nu: FinitePovm, n: int, rng: RngStream) -> list[OutcomePoint]:
    p = outcome_distribution(rho, nu)
    idx = rng.generator.choice(len(p), size=n, p=p)
    return [nu.points[k] for k in idx]
