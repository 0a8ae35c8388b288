"""Dense Hermitian linear algebra on small complex matrices.

Every routine takes a :class:`Tolerance` that fixes the two thresholds used
throughout the package: ``eigen_tol`` (absolute eigenvalue cut-off used for
positivity and rank decisions) and ``identity_tol`` (max-entry threshold
for matrix identities).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatch,
    InvariantViolation,
    NotHermitian,
    NotPsd,
    NotUnitary,
    SpectrumOutsideDomain,
)


@dataclass(frozen=True)
class Tolerance:
    eigen_tol: float = 1e-10
    identity_tol: float = 1e-9

    def __post_init__(self):
        for name in ("eigen_tol", "identity_tol"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-3) or not math.isfinite(value):
                raise InvariantViolation(f"{name}={value!r} must lie in (0, 1e-3]")

    @classmethod
    def from_identity_tol(cls, tol: float) -> "Tolerance":
        """Tolerance with ``identity_tol = tol`` and ``eigen_tol = tol / 10``."""
        return cls(eigen_tol=tol / 10.0, identity_tol=tol)


DEFAULT_TOL = Tolerance()


def default_tolerance() -> Tolerance:
    """Tolerance honouring the ``POVM_LAB_TOL`` environment override."""
    raw = os.environ.get("POVM_LAB_TOL")
    if not raw:
        return DEFAULT_TOL
    return Tolerance.from_identity_tol(float(raw))


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    """Validate and copy ``m`` into a read-only square complex128 array."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantViolation(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionMismatch(f"expected {dim}x{dim} matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvariantViolation("matrix has non-finite entries")
    a.setflags(write=False)
    return a


def max_abs(m) -> float:
    """Max-entry norm."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def is_hermitian(m, cfg: Tolerance = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return max_abs(m - dagger(m)) <= cfg.identity_tol


def _eigh(m: np.ndarray):
    return np.linalg.eigh(hermitian_part(np.asarray(m, dtype=np.complex128)))


def is_psd(m, cfg: Tolerance = DEFAULT_TOL) -> bool:
    if not is_hermitian(m, cfg):
        raise NotHermitian("matrix is not Hermitian")
    w = np.linalg.eigvalsh(hermitian_part(np.asarray(m, dtype=np.complex128)))
    return bool(w[0] >= -cfg.eigen_tol)


def _require_psd(h, cfg: Tolerance):
    if not is_psd(h, cfg):
        w = np.linalg.eigvalsh(hermitian_part(np.asarray(h, dtype=np.complex128)))
        raise NotPsd(f"matrix has negative eigenvalue {w[0]:.3e}", min_eigenvalue=float(w[0]))


def psd_sqrt(h, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unique PSD square root, via Hermitian eigendecomposition.

    Eigenvalues at the rounding-noise level of the decomposition are set to
    zero first: their square roots (~1e-8 for noise ~1e-16) would otherwise
    leak into the range complement.
    """
    _require_psd(h, cfg)
    w, v = _eigh(h)
    noise = 8 * len(w) * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))
    w = np.where(w <= noise, 0.0, w)
    root = (v * np.sqrt(w)) @ dagger(v)
    return hermitian_part(root)


def psd_pinv(h, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a PSD matrix.

    Eigenvalues at or below ``eigen_tol`` are treated as exact zeros, so
    ``p @ h`` and ``h @ p`` equal the range projection of ``h``.
    """
    _require_psd(h, cfg)
    w, v = _eigh(h)
    keep = w > cfg.eigen_tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return hermitian_part((v * inv) @ dagger(v))


def psd_pinv_sqrt(h, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Generalized inverse square root ``h^{-1/2}`` on the range of PSD ``h``.

    The ``eigen_tol`` cut applies to the eigenvalues of ``h`` itself; cutting
    after taking the square root would invert rounding noise of size ~1e-17,
    whose square root (~3e-9) exceeds the cut.
    """
    _require_psd(h, cfg)
    w, v = _eigh(h)
    keep = w > cfg.eigen_tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return hermitian_part((v * inv) @ dagger(v))


def range_basis(h, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the eigenvectors with eigenvalue > eigen_tol."""
    _require_psd(h, cfg)
    w, v = _eigh(h)
    return v[:, w > cfg.eigen_tol]


def range_projection(h, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    b = range_basis(h, cfg)
    return b @ dagger(b)


def rank(h, cfg: Tolerance = DEFAULT_TOL) -> int:
    return range_basis(h, cfg).shape[1]


def is_unitary(u, cfg: Tolerance = DEFAULT_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and max_abs(dagger(u) @ u - np.eye(len(u))) <= cfg.identity_tol


def require_unitary(u, cfg: Tolerance = DEFAULT_TOL) -> np.ndarray:
    u = as_matrix(u)
    if not is_unitary(u, cfg):
        raise NotUnitary("matrix is not unitary", deviation=max_abs(dagger(u) @ u - np.eye(len(u))))
    return u


@dataclass(frozen=True)
class Interval:
    """Real interval with independently open/closed endpoints."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, t: float) -> bool:
        above = t >= self.lo if self.lo_closed else t > self.lo
        below = t <= self.hi if self.hi_closed else t < self.hi
        return above and below

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


REAL_LINE = Interval()


def _fit_to_domain(w: np.ndarray, domain: Interval, eps: float) -> np.ndarray:
    w = w.copy()
    for k, t in enumerate(w):
        if domain.contains(t):
            continue
        # clamp only onto a closed endpoint; an open endpoint has no value to clamp to
        if domain.lo_closed and domain.lo - eps <= t < domain.lo:
            w[k] = domain.lo
        elif domain.hi_closed and domain.hi < t <= domain.hi + eps:
            w[k] = domain.hi
        else:
            raise SpectrumOutsideDomain(
                f"eigenvalue {t:.6g} lies outside the domain {domain}", eigenvalue=float(t)
            )
    return w


def fun_calc(
    a,
    theta: Callable[[np.ndarray], np.ndarray],
    cfg: Tolerance = DEFAULT_TOL,
    domain: Interval = REAL_LINE,
) -> np.ndarray:
    """Apply the scalar function ``theta`` to Hermitian ``a`` by spectral calculus.

    ``theta`` is called once with the 1-D array of (clamped) eigenvalues.
    """
    a = np.asarray(a, dtype=np.complex128)
    if not is_hermitian(a, cfg):
        raise NotHermitian("functional calculus needs a Hermitian argument")
    w, v = _eigh(a)
    w = _fit_to_domain(w, domain, cfg.eigen_tol)
    fw = np.asarray(theta(w))
    out = (v * fw) @ dagger(v)
    if np.isrealobj(fw):
        out = hermitian_part(out)
    return out
