"""Classical and C*-convex structure of the POVM set.

Extremality is decided by a linear-algebra rank test: a finite POVM with
effects ``h_j`` is extreme iff the range subspaces of the ``h_j`` are weakly
independent, i.e. no nonzero tuple ``(t_j)`` with ``t_j = q_j t_j q_j``
(``q_j`` the range projection of ``h_j``) sums to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    CoefficientsInvalid,
    DegenerateWitness,
    DepthExceeded,
    DimensionMismatch,
    InvariantViolation,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    dagger,
    hermitian_part,
    max_abs,
    psd_pinv_sqrt,
    psd_sqrt,
    range_basis,
    rank,
)
from .model import FinitePovm, OutcomePoint, dirac, is_sharp, make_povm


# C*-convex coefficients -------------------------------------------------

@dataclass(frozen=True, eq=False)
class CstarCoefficients:
    """Tuple ``a_1..a_m`` of d x d matrices with ``sum a_j^* a_j = 1``."""

    dim: int
    matrices: tuple[np.ndarray, ...]
    proper: bool

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)


def make_cstar_coefficients(matrices: Sequence, dim: int | None = None,
                            cfg: Tolerance = DEFAULT_TOL) -> CstarCoefficients:
    mats = [as_matrix(a, dim) for a in matrices]
    if not mats:
        raise CoefficientsInvalid("need at least one coefficient")
    dim = mats[0].shape[0]
    if any(a.shape[0] != dim for a in mats):
        raise DimensionMismatch("coefficients have mixed dimensions")
    deviation = max_abs(sum(dagger(a) @ a for a in mats) - np.eye(dim))
    if deviation > cfg.identity_tol:
        raise CoefficientsInvalid(f"sum a^* a deviates from identity by {deviation:.3g}", deviation=deviation)
    proper = all(np.linalg.svd(a, compute_uv=False)[-1] > cfg.eigen_tol for a in mats)
    return CstarCoefficients(dim, tuple(mats), proper)


def cstar_combination(coeffs: CstarCoefficients, povms: Sequence[FinitePovm],
                      cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """``sum_j a_j^* nu_j a_j``, pointwise over the union of supports."""
    if len(coeffs) != len(povms):
        raise CoefficientsInvalid(f"{len(coeffs)} coefficients for {len(povms)} POVMs")
    for nu in povms:
        if nu.dim != coeffs.dim:
            raise DimensionMismatch(f"POVM has dim {nu.dim}, coefficients have dim {coeffs.dim}")
    merged: dict[str, np.ndarray] = {}
    first: dict[str, OutcomePoint] = {}
    for a, nu in zip(coeffs.matrices, povms):
        images = kernels.congruence_terms(np.broadcast_to(a, (len(nu), nu.dim, nu.dim)), nu.stack())
        for p, h in zip(nu.points, images):
            if p.label in merged:
                merged[p.label] = merged[p.label] + h
            else:
                merged[p.label] = h
                first[p.label] = p
    entries = [(first[x], hermitian_part(h)) for x, h in merged.items() if np.linalg.norm(h, 2) > cfg.eigen_tol]
    return make_povm(coeffs.dim, entries, cfg)


def classical_combination(weights: Sequence[float], povms: Sequence[FinitePovm],
                          cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """Convex mixture ``sum_j w_j nu_j`` (scalar coefficients ``sqrt(w_j) 1``)."""
    from .errors import WeightsInvalid

    w = np.asarray(weights, dtype=float)
    if len(w) != len(povms) or len(w) == 0:
        raise WeightsInvalid("need one weight per POVM")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or abs(w.sum() - 1.0) > cfg.identity_tol:
        raise WeightsInvalid("weights must be a probability vector")
    dim = povms[0].dim
    coeffs = make_cstar_coefficients([np.sqrt(wj) * np.eye(dim) for wj in w], dim, cfg)
    return cstar_combination(coeffs, povms, cfg)


# weak independence --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IndependenceResult:
    independent: bool
    witness: tuple[np.ndarray, ...] | None = None

    def __bool__(self):
        return self.independent


def _corner_matrix(bases: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Columns ``vec(V_j e_kl V_j^*)`` spanning the compressed corners ``q_j M_d q_j``."""
    cols = []
    for v in bases:
        r = v.shape[1]
        for k in range(r):
            for l in range(r):
                cols.append(np.outer(v[:, k], v[:, l].conj()).reshape(-1))
    if not cols:
        return np.zeros((dim * dim, 0), dtype=np.complex128)
    return np.array(cols).T


def weakly_independent(effects: Sequence, cfg: Tolerance = DEFAULT_TOL) -> IndependenceResult:
    """Rank test for weak independence of the ranges of PSD matrices.

    Since ``V_j`` has orthonormal columns, the corner basis elements are
    orthonormal and the stacked matrix has unit-scale singular values on an
    independent family; values below ``sqrt(d) * eigen_tol`` count as zero.
    """
    mats = [as_matrix(h) for h in effects]
    if not mats:
        return IndependenceResult(True)
    dim = mats[0].shape[0]
    if any(h.shape[0] != dim for h in mats):
        raise DimensionMismatch("effects have mixed dimensions")
    bases = [range_basis(h, cfg) for h in mats]
    stacked = _corner_matrix(bases, dim)
    ncols = stacked.shape[1]
    if ncols == 0:
        return IndependenceResult(True)
    if ncols > dim * dim:
        # more columns than rows: a null vector certainly exists
        _, _, vh = np.linalg.svd(stacked)
        null = vh[-1].conj()
    else:
        _, s, vh = np.linalg.svd(stacked, full_matrices=False)
        if s[-1] > np.sqrt(dim) * cfg.eigen_tol:
            return IndependenceResult(True)
        null = vh[-1].conj()
    witness, offset = [], 0
    for v in bases:
        r = v.shape[1]
        c = null[offset : offset + r * r].reshape(r, r)
        offset += r * r
        witness.append(v @ c @ dagger(v))
    return IndependenceResult(False, tuple(witness))


def is_extreme(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> bool:
    return weakly_independent(nu.effects, cfg).independent


def is_cstar_extreme(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> bool:
    """C*-extreme points of the POVM set are exactly the sharp POVMs."""
    return is_sharp(nu, cfg)


# extremal decomposition ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class PerturbationDirection:
    """Hermitian ``g_j`` supported in the corners of ``nu``'s effects, summing to zero."""

    values: dict


def _hermitian_direction(witness: Sequence[np.ndarray], cfg: Tolerance) -> list[np.ndarray]:
    real = [hermitian_part(t) for t in witness]
    if max(max_abs(g) for g in real) > cfg.eigen_tol:
        return real
    imag = [hermitian_part((t - dagger(t)) / 2j) for t in witness]
    if max(max_abs(g) for g in imag) > cfg.eigen_tol:
        return imag
    raise DegenerateWitness("witness has negligible Hermitian and anti-Hermitian parts")


def perturbation_direction(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> PerturbationDirection | None:
    """A nonzero direction ``g`` with ``nu +- eps g`` POVMs for small ``eps``; None if extreme."""
    result = weakly_independent(nu.effects, cfg)
    if result.independent:
        return None
    g = _hermitian_direction(result.witness, cfg)
    return PerturbationDirection(dict(zip(nu.labels, g)))


def _step_sizes(nu: FinitePovm, g: dict, cfg: Tolerance) -> tuple[float, float]:
    """Largest ``eps+`` and ``eps-`` keeping ``h_j + eps+ g_j`` and ``h_j - eps- g_j`` PSD.

    On the range of ``h_j``, ``h_j + e g_j >= 0`` iff ``1 + e M_j >= 0`` with
    ``M_j = h_j^{-1/2} g_j h_j^{-1/2}``.
    """
    lo, hi = 0.0, 0.0
    for x, h in zip(nu.labels, nu.effects):
        root_inv = psd_pinv_sqrt(h, cfg)
        w = np.linalg.eigvalsh(hermitian_part(root_inv @ g[x] @ root_inv))
        lo = max(lo, -w[0])
        hi = max(hi, w[-1])
    if lo <= 0.0 or hi <= 0.0:
        # sum g = 0 with g != 0 forces both signs to appear
        raise DegenerateWitness("perturbation direction is one-signed")
    return 1.0 / lo, 1.0 / hi


def _clean_povm(dim: int, entries, cfg: Tolerance) -> FinitePovm:
    """Clamp eigenvalues within ``eigen_tol`` of 0 and drop vanished effects."""
    kept = []
    for p, h in entries:
        w, v = np.linalg.eigh(hermitian_part(h))
        w = np.where(np.abs(w) <= cfg.eigen_tol, 0.0, w)
        w = np.clip(w, 0.0, 1.0)
        if w[-1] <= cfg.eigen_tol:
            continue
        kept.append((p, hermitian_part((v * w) @ dagger(v))))
    # absorb residual rounding in the identity sum into the largest effect
    return make_povm(dim, kept, cfg)


@dataclass(frozen=True, eq=False)
class ConvexDecomposition:
    components: tuple[tuple[float, FinitePovm], ...]
    depth: int = 0

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.components))

    def reassemble(self, labels) -> dict:
        dim = self.components[0][1].dim
        out = {x: np.zeros((dim, dim), dtype=np.complex128) for x in labels}
        for w, nu in self.components:
            for p, h in nu:
                out[p.label] = out.get(p.label, 0) + w * h
        return out

    def residual(self, nu: FinitePovm) -> float:
        parts = self.reassemble(nu.labels)
        return max(max_abs(parts[x] - nu.effect(x)) for x in parts)


def _total_rank(nu: FinitePovm, cfg: Tolerance) -> int:
    return sum(rank(h, cfg) for h in nu.effects)


def extremal_decomposition(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL,
                           max_depth: int | None = None) -> ConvexDecomposition:
    """Write ``nu`` as a convex combination of extreme POVMs.

    Each non-extreme node is split along a perturbation direction ``g`` into
    ``nu + eps+ g`` and ``nu - eps- g`` with maximal step sizes; both children
    lose at least one unit of total effect rank, so the recursion depth is at
    most ``sum_j rank(h_j) <= m d``. A witness with vanishing Hermitian and
    anti-Hermitian parts is treated as certifying extremality.
    """
    if max_depth is None:
        max_depth = 4 * len(nu) * nu.dim
    leaves: list[tuple[float, FinitePovm]] = []
    deepest = 0

    def split(node: FinitePovm, weight: float, depth: int):
        nonlocal deepest
        deepest = max(deepest, depth)
        if depth > max_depth:
            leaves.append((weight, node))
            raise DepthExceeded(
                f"decomposition exceeded depth {max_depth}",
                partial=ConvexDecomposition(tuple(leaves), deepest),
            )
        try:
            direction = perturbation_direction(node, cfg)
            if direction is None:
                leaves.append((weight, node))
                return
            g = direction.values
            eps_plus, eps_minus = _step_sizes(node, g, cfg)
        except DegenerateWitness:
            leaves.append((weight, node))
            return
        plus = _clean_povm(node.dim, [(p, h + eps_plus * g[p.label]) for p, h in node], cfg)
        minus = _clean_povm(node.dim, [(p, h - eps_minus * g[p.label]) for p, h in node], cfg)
        total = eps_plus + eps_minus
        split(plus, weight * eps_minus / total, depth + 1)
        split(minus, weight * eps_plus / total, depth + 1)

    split(nu, 1.0, 0)
    return ConvexDecomposition(tuple(leaves), deepest)


# sharp coarsening ---------------------------------------------------------

def sharp_coarsening(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> tuple[CstarCoefficients, list[FinitePovm]]:
    """``nu = sum_j a_j^* (delta_{x_j} 1) a_j`` with ``a_j = h_j^{1/2}``."""
    roots = [psd_sqrt(h, cfg) for h in nu.effects]
    coeffs = make_cstar_coefficients(roots, nu.dim, cfg)
    diracs = [dirac(p.label, nu.dim, p.coordinate) for p in nu.points]
    return coeffs, diracs


def verify_coarsening(nu: FinitePovm, coeffs: CstarCoefficients, povms: Sequence[FinitePovm],
                      cfg: Tolerance = DEFAULT_TOL) -> bool:
    """Whether ``nu`` is a proper C*-convex combination of ``povms`` with ``coeffs``."""
    if len(coeffs) != len(povms):
        raise CoefficientsInvalid(f"{len(coeffs)} coefficients for {len(povms)} POVMs")
    if not coeffs.proper:
        return False
    try:
        combined = cstar_combination(coeffs, povms, cfg)
    except InvariantViolation:
        return False
    labels = set(combined.labels) | set(nu.labels)
    return max(max_abs(combined.effect(x) - nu.effect(x)) for x in labels) <= cfg.identity_tol


# unitary equivalence ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EquivalenceVerdict:
    verdict: str  # "yes" | "no" | "undetermined"
    unitary: np.ndarray | None = None
    reason: str = ""
    residual: float | None = None


def _phase_fit(bs: Sequence[np.ndarray], bps: Sequence[np.ndarray], scale: float) -> np.ndarray:
    """Diagonal phases ``D`` with ``D^* B_j D = B'_j`` for all ``j``, via spanning trees.

    Entry ``(k, l)`` forces ``conj(D_k) D_l = B'_kl / B_kl``; a breadth-first
    walk over significantly nonzero entries fixes every phase relative to the
    root of its connected component, whose own phase is free and set to 1.
    """
    n = bs[0].shape[0]
    phases = np.full(n, np.nan + 0j)
    mag = sum(np.abs(b) for b in bs)
    for root in range(n):
        if not np.isnan(phases[root]):
            continue
        phases[root] = 1.0
        frontier = [root]
        while frontier:
            k = frontier.pop()
            for l in range(n):
                if not np.isnan(phases[l]) or mag[k, l] <= scale:
                    continue
                j = int(np.argmax([abs(b[k, l]) for b in bs]))
                ratio = bps[j][k, l] / bs[j][k, l]
                # conj(D_k) D_l = ratio  =>  D_l = D_k * ratio (|D_k| = 1)
                phases[l] = phases[k] * ratio / abs(ratio)
                frontier.append(l)
    return phases


def unitarily_equivalent(nu: FinitePovm, other: FinitePovm, rng, cfg: Tolerance = DEFAULT_TOL,
                         trials: int = 8) -> EquivalenceVerdict:
    """Decide whether ``other = u^* nu u`` for some unitary ``u``.

    Cheap invariants refute equivalence; a randomized search builds a
    certificate when the random combination ``sum_j w_j h_j`` has simple
    spectrum. ``rng`` is a :class:`~povmlab.randomness.RngStream`.
    """
    if nu.dim != other.dim:
        raise DimensionMismatch(f"POVMs have dims {nu.dim} and {other.dim}")
    if set(nu.labels) != set(other.labels):
        return EquivalenceVerdict("no", reason="supports differ")
    labels = list(nu.labels)
    hs = [nu.effect(x) for x in labels]
    hps = [other.effect(x) for x in labels]
    for x, h, hp in zip(labels, hs, hps):
        if np.max(np.abs(np.linalg.eigvalsh(h) - np.linalg.eigvalsh(hp))) > cfg.eigen_tol:
            return EquivalenceVerdict("no", reason=f"spectra differ at {x!r}")
    for i in range(len(hs)):
        for j in range(i, len(hs)):
            if abs(np.trace(hs[i] @ hs[j]) - np.trace(hps[i] @ hps[j])) > cfg.identity_tol:
                return EquivalenceVerdict("no", reason=f"trace word tr(h h) differs at ({labels[i]!r}, {labels[j]!r})")
    gen = rng.generator
    for _ in range(trials):
        w = gen.standard_normal(len(hs))
        a = sum(wj * h for wj, h in zip(w, hs))
        ap = sum(wj * h for wj, h in zip(w, hps))
        ev, v = np.linalg.eigh(a)
        evp, vp = np.linalg.eigh(ap)
        if np.max(np.abs(ev - evp)) > np.sqrt(cfg.identity_tol):
            return EquivalenceVerdict("no", reason="spectra of a random weighted sum differ")
        gaps = np.diff(ev)
        if gaps.size and np.min(gaps) <= np.sqrt(cfg.identity_tol):
            continue
        bs = [dagger(v) @ h @ v for h in hs]
        bps = [dagger(vp) @ h @ vp for h in hps]
        phases = _phase_fit(bs, bps, np.sqrt(cfg.identity_tol))
        # other = u^* nu u with u = V D V'^*
        u = v @ np.diag(phases) @ dagger(vp)
        residual = max(max_abs(dagger(u) @ h @ u - hp) for h, hp in zip(hs, hps))
        if residual <= cfg.identity_tol:
            return EquivalenceVerdict("yes", u, "certificate found", residual)
    return EquivalenceVerdict("undetermined", reason=f"no certificate after {trials} trials")
