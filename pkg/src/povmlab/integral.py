"""Quantum integration and the transforms between POVMs and ucp maps.

On finite support the integral of a matrix-valued function ``f`` against
``nu = sum_j delta_{x_j} h_j`` is ``sum_j h_j^{1/2} f(x_j) h_j^{1/2}``. The map
``f -> integral`` is the elementary ucp map with coefficients ``h_j^{1/2}``
(:func:`gamma`); :func:`omega0` sends any elementary map back to a POVM.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import CoefficientsInvalid, DimensionMismatch, MissingValue, NotPsd
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    dagger,
    hermitian_part,
    is_psd,
    max_abs,
    psd_sqrt,
    require_unitary,
)
from .model import FinitePovm, OutcomePoint, QuantumRandomVariable, as_point, make_povm


def _values_at(f: QuantumRandomVariable | Mapping, labels, dim: int) -> np.ndarray:
    if getattr(f, "dim", dim) != dim:
        raise DimensionMismatch(f"random variable has dim {f.dim}, measure has dim {dim}")
    out = np.empty((len(labels), dim, dim), dtype=np.complex128)
    for k, label in enumerate(labels):
        try:
            out[k] = f[label]
        except KeyError:
            raise MissingValue(f"random variable undefined at support point {label!r}", label=label) from None
    return out


def sqrt_effects(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    return np.array([psd_sqrt(h, cfg) for h in nu.effects])


def integrate(f, nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Integral of the quantum random variable ``f`` with respect to ``nu``."""
    values = _values_at(f, nu.labels, nu.dim)
    return kernels.congruence_sum(sqrt_effects(nu, cfg), values)


def integrate_over(f, nu: FinitePovm, event: Iterable[str], cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Integral of ``f`` over an event: only support points in ``event`` contribute."""
    event = set(event)
    labels = [x for x in nu.labels if x in event]
    if not labels:
        return np.zeros((nu.dim, nu.dim), dtype=np.complex128)
    roots = np.array([psd_sqrt(nu.effect(x), cfg) for x in labels])
    return kernels.congruence_sum(roots, _values_at(f, labels, nu.dim))


@dataclass(frozen=True, eq=False)
class ElementaryUcp:
    """Elementary map ``f -> sum_j t_j^* f(x_j) t_j``; points may repeat."""

    dim: int
    points: tuple[OutcomePoint, ...]
    coefficients: tuple[np.ndarray, ...]

    @property
    def labels(self):
        return tuple(p.label for p in self.points)

    def __iter__(self):
        return iter(zip(self.points, self.coefficients))

    def __len__(self):
        return len(self.points)

    def unitality_defect(self) -> float:
        total = sum(dagger(t) @ t for t in self.coefficients)
        return max_abs(total - np.eye(self.dim))

    def is_epos(self, cfg: Tolerance = DEFAULT_TOL) -> bool:
        try:
            return all(is_psd(t, cfg) for t in self.coefficients)
        except NotPsd:
            return False


def make_ucp(dim: int, terms: Iterable, cfg: Tolerance = DEFAULT_TOL, check: bool = True) -> ElementaryUcp:
    """Build an :class:`ElementaryUcp`; ``check=False`` skips the unitality test."""
    terms = list(terms)
    points = tuple(as_point(p) for p, _ in terms)
    coeffs = tuple(as_matrix(t, dim) for _, t in terms)
    phi = ElementaryUcp(dim, points, coeffs)
    if check:
        defect = phi.unitality_defect()
        if defect > cfg.identity_tol:
            raise CoefficientsInvalid(f"sum t^* t deviates from identity by {defect:.3g}", deviation=defect)
    return phi


def spectral_map(label="x0", dim: int = 1) -> ElementaryUcp:
    """Point evaluation ``f -> f(x0)``."""
    return make_ucp(dim, [(label, np.eye(dim))])


def apply_ucp(phi: ElementaryUcp, f) -> np.ndarray:
    values = _values_at(f, phi.labels, phi.dim)
    return kernels.congruence_sum(np.array(phi.coefficients), values)


def gamma(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> ElementaryUcp:
    """The ucp map ``f -> integral of f d(nu)``."""
    return ElementaryUcp(nu.dim, nu.points, tuple(sqrt_effects(nu, cfg)))


def omega0(phi: ElementaryUcp, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """POVM ``sum_j delta_{x_j} t_j^* t_j`` with coincident points merged."""
    merged: dict[str, np.ndarray] = {}
    first: dict[str, OutcomePoint] = {}
    for p, t in phi:
        h = dagger(t) @ t
        if p.label in merged:
            merged[p.label] = merged[p.label] + h
        else:
            merged[p.label] = h
            first[p.label] = p
    entries = [
        (first[x], hermitian_part(h)) for x, h in merged.items() if np.linalg.norm(h, 2) > cfg.eigen_tol
    ]
    return make_povm(phi.dim, entries, cfg)


@dataclass(frozen=True, eq=False)
class ScalarRestriction:
    """Restriction of a ucp map to scalar functions: ``g -> sum_j g(x_j) b_j``."""

    dim: int
    points: tuple[OutcomePoint, ...]
    effects: tuple[np.ndarray, ...]

    @property
    def labels(self):
        return tuple(p.label for p in self.points)

    def __call__(self, g) -> np.ndarray:
        """Apply to a scalar function given as a mapping or a callable on labels."""
        get = g.__getitem__ if isinstance(g, Mapping) else g
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for p, b in zip(self.points, self.effects):
            out = out + get(p.label) * b
        return out


def gamma_c(nu: FinitePovm) -> ScalarRestriction:
    return ScalarRestriction(nu.dim, nu.points, nu.effects)


def natural_extension(sigma: ScalarRestriction, cfg: Tolerance = DEFAULT_TOL) -> ElementaryUcp:
    """Extend ``g -> sum g(x_j) b_j^* b_j`` to ``f -> sum b_j^* f(x_j) b_j`` with PSD ``b_j``."""
    return ElementaryUcp(sigma.dim, sigma.points, tuple(psd_sqrt(h, cfg) for h in sigma.effects))


def choi_block(coefficients, dim: int) -> np.ndarray:
    """Choi matrix ``sum_{kl} e_kl (x) phi(e_kl)`` of ``phi(a) = sum_j t_j^* a t_j``."""
    choi = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for k in range(dim):
        for l in range(dim):
            e = np.zeros((dim, dim), dtype=np.complex128)
            e[k, l] = 1.0
            image = sum(dagger(t) @ e @ t for t in coefficients)
            choi[k * dim : (k + 1) * dim, l * dim : (l + 1) * dim] = image
    return choi


@dataclass(frozen=True)
class UcpReport:
    unital: bool
    cp: bool
    unitality_defect: float
    min_choi_eigenvalue: dict
    choi_rank: dict

    def as_dict(self):
        return {
            "unital": self.unital,
            "cp": self.cp,
            "unitality_defect": self.unitality_defect,
            "min_choi_eigenvalue": dict(self.min_choi_eigenvalue),
            "choi_rank": dict(self.choi_rank),
        }


def verify_ucp(phi: ElementaryUcp, cfg: Tolerance = DEFAULT_TOL) -> UcpReport:
    """Certify unitality and complete positivity of an elementary map.

    Over a finite point set the domain algebra splits into one matrix block
    per point, so complete positivity is checked block by block through the
    Choi matrix of ``a -> sum_{j: x_j = x} t_j^* a t_j``.
    """
    defect = phi.unitality_defect()
    groups: dict[str, list] = {}
    for p, t in phi:
        groups.setdefault(p.label, []).append(t)
    min_eig, ranks = {}, {}
    for label, ts in groups.items():
        w = np.linalg.eigvalsh(hermitian_part(choi_block(ts, phi.dim)))
        min_eig[label] = float(w[0])
        ranks[label] = int(np.sum(w > cfg.eigen_tol))
    cp = all(v >= -cfg.eigen_tol for v in min_eig.values())
    return UcpReport(defect <= cfg.identity_tol, cp, defect, min_eig, ranks)


def conjugate_povm(nu: FinitePovm, u, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """Automorphic image ``u^* nu u``."""
    u = require_unitary(u, cfg)
    if u.shape[0] != nu.dim:
        raise DimensionMismatch(f"unitary has dim {u.shape[0]}, POVM has dim {nu.dim}")
    images = kernels.congruence_terms(np.broadcast_to(u, (len(nu), nu.dim, nu.dim)), nu.stack())
    return make_povm(nu.dim, [(p, hermitian_part(h)) for p, h in zip(nu.points, images)], cfg)
