"""States, effects, finitely supported POVMs and quantum random variables.

A POVM with finite support is stored as its support points together with the
nonzero effect at each point; events are finite sets of point labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicatePoint,
    EffectInvalid,
    InvariantViolation,
    MissingValue,
    NotPsd,
    StateInvalid,
    SumNotIdentity,
    WeightsInvalid,
    ZeroEffect,
)
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, is_hermitian, is_psd, max_abs


@dataclass(frozen=True)
class OutcomePoint:
    label: str
    coordinate: float | None = None

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise InvariantViolation("outcome label must be a nonempty string")
        if self.coordinate is not None:
            object.__setattr__(self, "coordinate", float(self.coordinate))


def as_point(p) -> OutcomePoint:
    return p if isinstance(p, OutcomePoint) else OutcomePoint(str(p))


def _check_distinct(points: Sequence[OutcomePoint]):
    seen = set()
    for p in points:
        if p.label in seen:
            raise DuplicatePoint(f"outcome label {p.label!r} appears twice", label=p.label)
        seen.add(p.label)


@dataclass(frozen=True, eq=False)
class State:
    """Density matrix: PSD with unit trace."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def make_state(matrix, cfg: Tolerance = DEFAULT_TOL) -> State:
    m = as_matrix(matrix)
    try:
        psd = is_psd(m, cfg)
    except NotPsd as exc:
        raise StateInvalid(f"state matrix invalid: {exc}") from exc
    if not psd:
        raise StateInvalid("state matrix is not positive semidefinite")
    tr = np.trace(m)
    if abs(tr - 1.0) > cfg.identity_tol:
        raise StateInvalid(f"state trace is {tr.real:.12g}, expected 1")
    return State(m)


def maximally_mixed(dim: int) -> State:
    return State(as_matrix(np.eye(dim) / dim))


def is_effect(m, cfg: Tolerance = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    try:
        return is_psd(m, cfg) and is_psd(np.eye(len(m)) - m, cfg)
    except NotPsd:
        return False


def check_effect(m, cfg: Tolerance = DEFAULT_TOL, dim: int | None = None) -> np.ndarray:
    """Return ``m`` as a validated effect matrix (0 <= m <= 1)."""
    m = as_matrix(m, dim)
    if not is_effect(m, cfg):
        if is_hermitian(m, cfg):
            w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
            detail = f"spectrum [{w[0]:.6g}, {w[-1]:.6g}] not inside [0, 1]"
        else:
            detail = "not Hermitian"
        raise EffectInvalid(f"matrix is not an effect: {detail}")
    return m


@dataclass(frozen=True, eq=False)
class FinitePovm:
    """POVM ``sum_j delta_{x_j} h_j`` with distinct points and nonzero effects.

    Build instances with :func:`make_povm`; the constructor itself does not
    validate.
    """

    dim: int
    points: tuple[OutcomePoint, ...]
    effects: tuple[np.ndarray, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p.label: k for k, p in enumerate(self.points)})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.effects))

    def __contains__(self, label) -> bool:
        return label in self._index

    def effect(self, label: str) -> np.ndarray:
        """Effect at ``label``; zero if the label lies outside the support."""
        k = self._index.get(label)
        if k is None:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return self.effects[k]

    def point(self, label: str) -> OutcomePoint:
        return self.points[self._index[label]]

    def stack(self) -> np.ndarray:
        return np.array(self.effects)

    def allclose(self, other: "FinitePovm", atol: float = 1e-9) -> bool:
        if self.dim != other.dim or set(self.labels) != set(other.labels):
            return False
        return all(max_abs(h - other.effect(p.label)) <= atol for p, h in self)

    def distance(self, other: "FinitePovm") -> float:
        """Max-entry distance over the union of both supports."""
        labels = set(self.labels) | set(other.labels)
        return max(max_abs(self.effect(x) - other.effect(x)) for x in labels)

    def __repr__(self):
        return f"FinitePovm(dim={self.dim}, labels={list(self.labels)})"


def make_povm(dim: int, entries: Iterable, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """Validate ``entries`` (pairs of point and effect) into a :class:`FinitePovm`.

    Points may be :class:`OutcomePoint` instances or bare labels.
    """
    entries = list(entries)
    if not entries:
        raise InvariantViolation("a POVM needs at least one outcome")
    points = tuple(as_point(p) for p, _ in entries)
    _check_distinct(points)
    effects = []
    for p, (_, h) in zip(points, entries):
        try:
            m = check_effect(h, cfg, dim)
        except EffectInvalid as exc:
            raise EffectInvalid(f"outcome {p.label!r}: {exc}", label=p.label) from exc
        if np.linalg.norm(m, 2) <= cfg.eigen_tol:
            raise ZeroEffect(f"outcome {p.label!r} has a zero effect", label=p.label)
        effects.append(m)
    deviation = max_abs(sum(effects) - np.eye(dim))
    if deviation > cfg.identity_tol:
        raise SumNotIdentity(
            f"effects sum to identity only within {deviation:.3g}", deviation=deviation
        )
    return FinitePovm(dim, points, tuple(effects))


def dirac(label="x0", dim: int = 1, coordinate: float | None = None) -> FinitePovm:
    return make_povm(dim, [(OutcomePoint(label, coordinate), np.eye(dim))])


def evaluate(nu: FinitePovm, event: Iterable[str]) -> np.ndarray:
    """Effect assigned to a finite event (labels outside the support add nothing)."""
    out = np.zeros((nu.dim, nu.dim), dtype=np.complex128)
    for label in set(event):
        if label in nu:
            out = out + nu.effect(label)
    return out


def is_sharp(nu: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> bool:
    sharp = all(max_abs(h @ h - h) <= cfg.identity_tol for h in nu.effects)
    if sharp:
        # orthogonality follows from idempotence plus the sum constraint; an
        # idempotence defect delta allows cross terms up to sqrt(d * delta)
        bound = 2.0 * np.sqrt(nu.dim * cfg.identity_tol)
        for i, hi in enumerate(nu.effects):
            for hj in nu.effects[i + 1 :]:
                assert max_abs(hi @ hj) <= bound, "idempotent effects are not orthogonal"

    return sharp


def outcome_probability(rho: State, nu: FinitePovm, event: Iterable[str], cfg: Tolerance = DEFAULT_TOL) -> float:
    if rho.dim != nu.dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, POVM has dim {nu.dim}")
    p = float(np.real(np.trace(rho.matrix @ evaluate(nu, event))))
    if -cfg.identity_tol <= p < 0.0:
        p = 0.0
    elif 1.0 < p <= 1.0 + cfg.identity_tol:
        p = 1.0
    return p


def embed_classical(weights: Sequence[float], points: Sequence, dim: int = 1, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """Scalar-valued POVM ``sum_j w_j delta_{x_j} 1`` from a probability vector."""
    w = np.asarray(weights, dtype=float)
    if len(w) != len(points) or len(w) == 0:
        raise WeightsInvalid("need one weight per point")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise WeightsInvalid("weights must be strictly positive")
    if abs(w.sum() - 1.0) > cfg.identity_tol:
        raise WeightsInvalid(f"weights sum to {w.sum():.12g}, expected 1")
    return make_povm(dim, [(p, wj * np.eye(dim)) for p, wj in zip(points, w)], cfg)


class QuantumRandomVariable(Mapping):
    """Matrix-valued function on outcome labels.

    Only values at support points of the measure it is integrated against
    matter; other labels may be present.
    """

    def __init__(self, values: Mapping[str, object] | Iterable, dim: int | None = None):
        items = list(values.items()) if isinstance(values, Mapping) else list(values)
        mats = {}
        for label, m in items:
            label = as_point(label).label
            if label in mats:
                raise DuplicatePoint(f"label {label!r} appears twice", label=label)
            mats[label] = as_matrix(m)
        dims = {m.shape[0] for m in mats.values()}
        if dim is not None:
            dims.add(dim)
        if len(dims) > 1:
            raise DimensionMismatch(f"values have mixed dimensions {sorted(dims)}")
        if not dims:
            raise InvariantViolation("dimension of an empty random variable must be given")
        self.dim = dims.pop()
        self._values = mats

    @classmethod
    def constant(cls, matrix, labels: Iterable[str]) -> "QuantumRandomVariable":
        m = as_matrix(matrix)
        return cls({label: m for label in labels})

    def __getitem__(self, label):
        try:
            return self._values[label]
        except KeyError:
            raise MissingValue(f"random variable undefined at {label!r}", label=label) from None

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def map(self, func) -> "QuantumRandomVariable":
        return QuantumRandomVariable({k: func(v) for k, v in self._values.items()})

    def __add__(self, other: "QuantumRandomVariable"):
        keys = [k for k in self if k in other]
        return QuantumRandomVariable({k: self[k] + other[k] for k in keys}, self.dim)

    def __mul__(self, scalar):
        return QuantumRandomVariable({k: scalar * v for k, v in self._values.items()}, self.dim)

    __rmul__ = __mul__

    def __repr__(self):
        return f"QuantumRandomVariable(dim={self.dim}, labels={list(self._values)})"
