"""Certified fixed-point solvers built on normal nonnegative matrices."""

__version__ = "0.1.0"

from .errors import FixpointError, NotNormal, Undecided  # noqa: E402
from .nonneg_matrix import (  # noqa: E402
    NonnegativeMatrix,
    is_admissible,
    is_asymptotic,
    is_normal_matkowski,
    leading_minors,
    matkowski_eliminate,
    neumann_inverse,
    normality_certificate,
    nu_estimate,
    spectral_radius,
)
from .norms import Renorming, build_renorming  # noqa: E402
from .picard import OrderedProblem, PicardRun, picard_iterate  # noqa: E402
from .perov import ProductSpace, SystemOfMaps, perov_solve  # noqa: E402
from .coupled_tripled import TripledProblem, coupled_matrix, solve_tripled, tripled_matrix  # noqa: E402
