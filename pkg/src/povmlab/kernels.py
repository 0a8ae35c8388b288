"""Backend selection for the congruence kernels.

The compiled extension is used when it imports; otherwise (or when the
environment variable ``POVMLAB_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the numpy fallback is used. ``BACKEND`` names the choice.
"""

import os

from . import _pykernels

_force_python = os.environ.get("POVMLAB_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

congruence_sum = _impl.congruence_sum
congruence_terms = _impl.congruence_terms
