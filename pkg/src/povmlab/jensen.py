"""Operator-convex functions and the operator Jensen inequality for POVM integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .convex import CstarCoefficients
from .errors import CoefficientsInvalid, InvariantViolation, NotHermitian
from .integral import _values_at, integrate
from .linalg import (
    DEFAULT_TOL,
    Interval,
    REAL_LINE,
    Tolerance,
    as_matrix,
    dagger,
    fun_calc,
    hermitian_part,
    is_hermitian,
    max_abs,
)
from .model import FinitePovm, QuantumRandomVariable

POSITIVE = Interval(0.0, math.inf)
NONNEGATIVE = Interval(0.0, math.inf, lo_closed=True)


@dataclass(frozen=True)
class ScalarFunction:
    """Real function on an interval, applied to Hermitian matrices spectrally."""

    name: str
    domain: Interval
    evaluator: Callable[[np.ndarray], np.ndarray]

    def __call__(self, a, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
        return fun_calc(a, self.evaluator, cfg, self.domain)


def _xlogx(t):
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)


CATALOG_NAMES = ("square", "inverse", "neg_log", "xlogx", "power")


def operator_convex(name: str, p: float | None = None) -> ScalarFunction:
    """Catalog of operator-convex functions with their domains.

    ``square`` on R; ``inverse``, ``neg_log`` and ``xlogx`` on (0, inf);
    ``power`` with ``p`` in [1, 2] on [0, inf) or ``p`` in [-1, 0) on (0, inf).
    """
    if name == "square":
        return ScalarFunction("square", REAL_LINE, lambda t: t * t)
    if name == "inverse":
        return ScalarFunction("inverse", POSITIVE, lambda t: 1.0 / t)
    if name == "neg_log":
        return ScalarFunction("neg_log", POSITIVE, lambda t: -np.log(t))
    if name == "xlogx":
        return ScalarFunction("xlogx", POSITIVE, _xlogx)
    if name == "power":
        if p is None:
            raise InvariantViolation("power needs an exponent")
        p = float(p)
        if 1.0 <= p <= 2.0:
            return ScalarFunction(f"power({p:g})", NONNEGATIVE, lambda t: np.power(np.clip(t, 0.0, None), p))
        if -1.0 <= p < 0.0:
            return ScalarFunction(f"power({p:g})", POSITIVE, lambda t: np.power(t, p))
        raise InvariantViolation(f"t^{p:g} is not in the operator-convex catalog (need p in [-1, 0) or [1, 2])")
    raise InvariantViolation(f"unknown function {name!r}; choose from {list(CATALOG_NAMES)}")


def affine(theta: ScalarFunction, scale: float, shift: float) -> ScalarFunction:
    """``t -> scale * theta(t) + shift`` on the same domain (convex for ``scale >= 0``)."""
    if scale < 0:
        raise InvariantViolation("a negative scale does not preserve convexity")
    ev = theta.evaluator
    return ScalarFunction(f"{scale:g}*{theta.name}+{shift:g}", theta.domain, lambda t: scale * ev(t) + shift)


def _checked_values(values: Sequence[np.ndarray], theta: ScalarFunction, cfg: Tolerance) -> list[np.ndarray]:
    out = []
    for y in values:
        if not is_hermitian(y, cfg):
            raise NotHermitian("Jensen arguments must be Hermitian")
        y = hermitian_part(np.asarray(y))
        theta(y, cfg)  # raises SpectrumOutsideDomain outside the domain
        out.append(y)
    return out


def jensen_gap(kappa: QuantumRandomVariable, nu: FinitePovm, theta: ScalarFunction,
               cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``integral of theta(kappa) d(nu) - theta(integral of kappa d(nu))``; PSD for operator-convex ``theta``."""
    values = _checked_values(_values_at(kappa, nu.labels, nu.dim), theta, cfg)
    transformed = QuantumRandomVariable({x: theta(y, cfg) for x, y in zip(nu.labels, values)}, nu.dim)
    mean = hermitian_part(integrate(QuantumRandomVariable(dict(zip(nu.labels, values)), nu.dim), nu, cfg))
    return hermitian_part(integrate(transformed, nu, cfg) - theta(mean, cfg))


def hp_jensen_gap(coeffs: CstarCoefficients | Sequence, ys: Sequence, theta: ScalarFunction,
                  cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``sum a_j^* theta(y_j) a_j - theta(sum a_j^* y_j a_j)`` for C*-convex coefficients ``a_j``."""
    mats = list(coeffs.matrices if isinstance(coeffs, CstarCoefficients) else (as_matrix(a) for a in coeffs))
    if len(mats) != len(ys):
        raise CoefficientsInvalid(f"{len(mats)} coefficients for {len(ys)} arguments")
    dim = mats[0].shape[0]
    deviation = max_abs(sum(dagger(a) @ a for a in mats) - np.eye(dim))
    if deviation > cfg.identity_tol:
        raise CoefficientsInvalid(f"sum a^* a deviates from identity by {deviation:.3g}", deviation=deviation)
    ys = _checked_values(ys, theta, cfg)
    lhs = sum(dagger(a) @ theta(y, cfg) @ a for a, y in zip(mats, ys))
    mean = hermitian_part(sum(dagger(a) @ y @ a for a, y in zip(mats, ys)))
    return hermitian_part(lhs - theta(mean, cfg))


def min_eigenvalue(g) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(np.asarray(g)))[0])
