"""Induced probabilities, Radon-Nikodym derivatives and density discretization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    GridTooCoarse,
    InvariantViolation,
    NormalizationSingular,
    NotAbsolutelyContinuous,
    ReconstructionFailed,
)
from .integral import integrate_over
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    dagger,
    hermitian_part,
    is_psd,
    max_abs,
    psd_pinv_sqrt,
)
from .model import FinitePovm, OutcomePoint, QuantumRandomVariable, make_povm


@dataclass(frozen=True)
class InducedMeasure:
    """Classical probability ``mu(E) = tr(nu(E)) / d`` on the support of ``nu``."""

    weights: dict

    def __getitem__(self, label) -> float:
        return self.weights.get(label, 0.0)

    def total(self) -> float:
        return float(sum(self.weights.values()))


def induced_probability(nu: FinitePovm) -> InducedMeasure:
    return InducedMeasure({p.label: float(np.trace(h).real) / nu.dim for p, h in nu})


def principal_rn_derivative(nu: FinitePovm) -> QuantumRandomVariable:
    """Density of ``nu`` against its induced measure: ``(d / tr h_j) h_j`` at ``x_j``."""
    return QuantumRandomVariable(
        {p.label: (nu.dim / np.trace(h).real) * h for p, h in nu}, nu.dim
    )


def abs_continuous(nu2: FinitePovm, nu1: FinitePovm) -> bool:
    """Whether every null event of ``nu1`` is null for ``nu2``."""
    return set(nu2.labels) <= set(nu1.labels)


def non_principal_rn(nu2: FinitePovm, nu1: FinitePovm, cfg: Tolerance = DEFAULT_TOL) -> QuantumRandomVariable:
    """Bounded ``g`` with ``nu2(E) = integral over E of g d(nu1)``.

    At each support point of ``nu1`` the value is
    ``(dmu2/dmu1) * D1^{-1/2} D2 D1^{-1/2}`` where ``D1, D2`` are the principal
    derivatives and ``^{-1/2}`` is the generalized inverse square root.
    Points outside the support of ``nu2`` get the zero matrix.

    Raises :class:`ReconstructionFailed` when the formula does not give back
    ``nu2``, which happens when the range of an effect of ``nu2`` is not
    contained in the range of the ``nu1`` effect at the same point.
    """
    if nu1.dim != nu2.dim:
        from .errors import DimensionMismatch

        raise DimensionMismatch("POVMs have different dimensions")
    if not abs_continuous(nu2, nu1):
        missing = sorted(set(nu2.labels) - set(nu1.labels))
        raise NotAbsolutelyContinuous(f"nu2 charges points outside supp nu1: {missing}", points=missing)
    mu1, mu2 = induced_probability(nu1), induced_probability(nu2)
    d1, d2 = principal_rn_derivative(nu1), principal_rn_derivative(nu2)
    values = {}
    for x in nu1.labels:
        if x not in nu2:
            values[x] = np.zeros((nu1.dim, nu1.dim), dtype=np.complex128)
            continue
        inv_root = psd_pinv_sqrt(d1[x], cfg)
        values[x] = hermitian_part((mu2[x] / mu1[x]) * inv_root @ d2[x] @ inv_root)
    g = QuantumRandomVariable(values, nu1.dim)
    # additivity over points makes singletons sufficient for every event
    residual = max(max_abs(integrate_over(g, nu1, [x], cfg) - nu2.effect(x)) for x in nu1.labels)
    if residual > cfg.identity_tol:
        raise ReconstructionFailed(
            f"integral of g against nu1 misses nu2 by {residual:.3g}; an effect range of nu2 "
            "is not contained in the matching effect range of nu1",
            residual=residual,
        )
    return g


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Samples ``(t_k, D(t_k))`` of a PSD matrix density on [0, 1]."""

    dim: int
    coordinates: np.ndarray
    matrices: np.ndarray

    def __len__(self):
        return len(self.coordinates)

    def integral(self) -> np.ndarray:
        return np.trapezoid(self.matrices, self.coordinates, axis=0)


def make_density_grid(samples: Sequence, dim: int | None = None, cfg: Tolerance = DEFAULT_TOL,
                      normalization_slack: float = 0.05) -> DensityGrid:
    """Validate ``(coordinate, matrix)`` samples into a :class:`DensityGrid`.

    The trapezoidal total mass must match the identity within
    ``normalization_slack``; :func:`discretize_density` renormalizes exactly.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise GridTooCoarse("a density grid needs at least two samples")
    ts = np.array([float(t) for t, _ in samples])
    mats = np.array([as_matrix(m, dim) for _, m in samples])
    dim = mats.shape[1]
    if np.any(ts < 0.0) or np.any(ts > 1.0):
        raise InvariantViolation("grid coordinates must lie in [0, 1]")
    if np.any(np.diff(ts) <= 0):
        raise InvariantViolation("grid coordinates must be strictly increasing")
    for t, m in zip(ts, mats):
        if not is_psd(m, cfg):
            raise InvariantViolation(f"density sample at t={t:g} is not PSD")
    grid = DensityGrid(dim, ts, mats)
    mass_error = max_abs(grid.integral() - np.eye(dim))
    if mass_error > normalization_slack:
        raise InvariantViolation(
            f"density mass differs from the identity by {mass_error:.3g} (slack {normalization_slack})",
            deviation=mass_error,
        )
    return grid


def _interpolate(grid: DensityGrid, t: float) -> np.ndarray:
    k = int(np.searchsorted(grid.coordinates, t, side="right")) - 1
    k = min(max(k, 0), len(grid) - 2)
    t0, t1 = grid.coordinates[k], grid.coordinates[k + 1]
    s = (t - t0) / (t1 - t0)
    return (1.0 - s) * grid.matrices[k] + s * grid.matrices[k + 1]


def _bin_mass(grid: DensityGrid, a: float, b: float) -> np.ndarray:
    """Exact integral over [a, b] of the piecewise-linear interpolant of the samples."""
    lo, hi = max(a, grid.coordinates[0]), min(b, grid.coordinates[-1])
    if hi <= lo:
        return np.zeros((grid.dim, grid.dim), dtype=np.complex128)
    inside = (grid.coordinates > lo) & (grid.coordinates < hi)
    ts = np.concatenate([[lo], grid.coordinates[inside], [hi]])
    ms = np.concatenate([[_interpolate(grid, lo)], grid.matrices[inside], [_interpolate(grid, hi)]])
    return np.trapezoid(ms, ts, axis=0)


def discretize_density(grid: DensityGrid, n_bins: int, cfg: Tolerance = DEFAULT_TOL) -> FinitePovm:
    """Finite POVM approximating a matrix density on [0, 1].

    Bin ``k`` covers ``[k/n, (k+1)/n)`` and gets the trapezoidal mass of the
    density over it; empty bins are dropped and the remaining effects are
    renormalized as ``S^{-1/2} E_k S^{-1/2}`` with ``S = sum_k E_k``.
    """
    if n_bins < 1:
        raise InvariantViolation("n_bins must be positive")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts = np.histogram(grid.coordinates, bins=edges)[0]
    if np.any(counts < 2):
        k = int(np.argmin(counts))
        raise GridTooCoarse(
            f"bin {k} holds {counts[k]} samples; each bin needs at least 2", bin=k
        )
    masses, points = [], []
    for k in range(n_bins):
        e = hermitian_part(_bin_mass(grid, edges[k], edges[k + 1]))
        if np.linalg.norm(e, 2) <= cfg.eigen_tol:
            continue
        masses.append(e)
        points.append(OutcomePoint(f"bin{k}", 0.5 * (edges[k] + edges[k + 1])))
    total = sum(masses)
    w, v = np.linalg.eigh(hermitian_part(total))
    if w[0] <= cfg.eigen_tol:
        raise NormalizationSingular(f"total mass is singular (min eigenvalue {w[0]:.3g})")
    s_inv_root = (v / np.sqrt(w)) @ dagger(v)
    effects = [hermitian_part(s_inv_root @ e @ s_inv_root) for e in masses]
    return make_povm(grid.dim, list(zip(points, effects)), cfg)


# demo densities ---------------------------------------------------------

def _uniform(t: float, dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def _linear_qubit(t: float, dim: int) -> np.ndarray:
    return np.diag([2.0 * t, 2.0 - 2.0 * t]).astype(np.complex128)


def _gaussian_smeared(t: float, dim: int, width: float = 0.1) -> np.ndarray:
    # diagonal density; basis vector k is smeared around (k + 1) / (dim + 1),
    # each normalized to unit mass on [0, 1]
    out = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(dim):
        c = (k + 1) / (dim + 1)
        mass = 0.5 * (math.erf((1 - c) / (width * math.sqrt(2))) + math.erf(c / (width * math.sqrt(2))))
        out[k, k] = math.exp(-0.5 * ((t - c) / width) ** 2) / (width * math.sqrt(2 * math.pi) * mass)
    return out


DENSITY_CATALOG: dict[str, Callable] = {
    "uniform": _uniform,
    "linear-qubit": _linear_qubit,
    "gaussian-smeared": _gaussian_smeared,
}


def catalog_density(name: str, n_samples: int = 1025, dim: int | None = None, width: float = 0.1,
                    cfg: Tolerance = DEFAULT_TOL) -> DensityGrid:
    """Sample a named demo density on an equispaced grid over [0, 1]."""
    if name not in DENSITY_CATALOG:
        raise InvariantViolation(f"unknown density {name!r}; choose from {sorted(DENSITY_CATALOG)}")
    if name == "linear-qubit":
        dim = 2
    dim = dim or 2
    ts = np.linspace(0.0, 1.0, n_samples)
    if name == "gaussian-smeared":
        mats = [_gaussian_smeared(t, dim, width) for t in ts]
    else:
        mats = [DENSITY_CATALOG[name](t, dim) for t in ts]
    return make_density_grid(list(zip(ts, mats)), dim, cfg)


def catalog_moment(name: str, power: int, dim: int = 2, width: float = 0.1) -> float:
    """Closed-form ``integral t^power dmu(t)`` for the induced measure of a demo density."""
    if name in ("uniform", "linear-qubit"):
        # both have tr D(t) / d == 1 on [0, 1]
        return 1.0 / (power + 1)
    if name == "gaussian-smeared":
        from scipy import integrate as _quad

        total = 0.0
        for k in range(dim):
            total += _quad.quad(lambda t: t**power * _gaussian_smeared(t, dim, width)[k, k].real, 0.0, 1.0)[0]
        return total / dim
    raise InvariantViolation(f"unknown density {name!r}")


def moment_error(nu: FinitePovm, name: str, powers=(1, 2, 3), width: float = 0.1) -> float:
    """Largest moment discrepancy between the induced measure of ``nu`` and the exact one.

    Polynomial test functions probe weak convergence of the discretized
    induced measure at the bin midpoints.
    """
    mu = induced_probability(nu)
    err = 0.0
    for p in powers:
        approx = sum(mu[x.label] * x.coordinate**p for x in nu.points)
        err = max(err, abs(approx - catalog_moment(name, p, nu.dim, width)))
    return err
