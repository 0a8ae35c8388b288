"""Pure numpy implementations of the compiled kernels in ``_ckernels``."""

import numpy as np


def congruence_sum(a, x):
    """Return ``sum_j a[j]^H @ x[j] @ a[j]`` for stacks of square matrices."""
    a = np.asarray(a, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if a.shape != x.shape or a.ndim != 3:
        raise ValueError(f"shape mismatch: {a.shape} vs {x.shape}")
    return (np.conj(np.swapaxes(a, 1, 2)) @ x @ a).sum(axis=0)


def congruence_terms(a, x):
    """Return the stack ``a[j]^H @ x[j] @ a[j]`` without summing."""
    a = np.asarray(a, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if a.shape != x.shape or a.ndim != 3:
        raise ValueError(f"shape mismatch: {a.shape} vs {x.shape}")
    return np.conj(np.swapaxes(a, 1, 2)) @ x @ a
