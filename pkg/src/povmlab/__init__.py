"""Numerics for finitely supported POVMs (positive operator-valued measures).

Modules:

* :mod:`povmlab.linalg` -- Hermitian linear algebra and tolerances
* :mod:`povmlab.model` -- states, effects, POVMs, quantum random variables
* :mod:`povmlab.integral` -- quantum integral and POVM <-> ucp transforms
* :mod:`povmlab.measure` -- induced measures, Radon-Nikodym derivatives, discretization
* :mod:`povmlab.convex` -- C*-convexity, extremality, decompositions
* :mod:`povmlab.randomness` -- seeded Haar unitaries, channels, random POVMs, sampling
* :mod:`povmlab.jensen` -- operator-convex functions and Jensen gaps
* :mod:`povmlab.io` / :mod:`povmlab.cli` -- JSON wire format and the ``povm-lab`` CLI
"""

from .convex import (
    ConvexDecomposition,
    CstarCoefficients,
    classical_combination,
    cstar_combination,
    extremal_decomposition,
    is_cstar_extreme,
    is_extreme,
    make_cstar_coefficients,
    sharp_coarsening,
    unitarily_equivalent,
    verify_coarsening,
    weakly_independent,
)
from .errors import *  # noqa: F401,F403
from .integral import (
    ElementaryUcp,
    apply_ucp,
    conjugate_povm,
    gamma,
    gamma_c,
    integrate,
    integrate_over,
    make_ucp,
    natural_extension,
    omega0,
    verify_ucp,
)
from .jensen import ScalarFunction, affine, hp_jensen_gap, jensen_gap, operator_convex
from .kernels import BACKEND
from .linalg import DEFAULT_TOL, Interval, Tolerance, fun_calc, psd_pinv, psd_sqrt
from .measure import (
    DensityGrid,
    abs_continuous,
    catalog_density,
    discretize_density,
    induced_probability,
    make_density_grid,
    non_principal_rn,
    principal_rn_derivative,
)
from .model import (
    FinitePovm,
    OutcomePoint,
    QuantumRandomVariable,
    State,
    dirac,
    embed_classical,
    evaluate,
    is_sharp,
    make_povm,
    make_state,
    maximally_mixed,
    outcome_probability,
)
from .randomness import (
    KrausChannel,
    RngStream,
    apply_channel_to_povm,
    haar_unitary,
    make_channel,
    random_cstar_coefficients,
    random_mixed_unitary_channel,
    random_povm,
    random_rank_one_povm,
    sample_outcome,
    sample_outcomes,
)

__version__ = "0.1.0"
