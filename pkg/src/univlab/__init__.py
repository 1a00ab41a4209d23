"""univlab: numerical experiments around shifted Dirichlet L-functions.

Subpackages cover Dirichlet character algebra, L-evaluation in the critical
strip, twisted truncated Euler products, equidistribution tests, mean-square
diagnostics, and the universality scan engine. The hot kernels run from a
compiled extension when available (see `univlab.backend_name`).
"""

from ._backend import BACKEND as backend_name
from .approx import (
    FitResult,
    ScanJob,
    ScanOutcome,
    ScanReport,
    fit_finite_product,
    scan_continuous,
    scan_discrete,
    sup_distance,
)
from .characters import (
    DirichletCharacter,
    are_equivalent,
    build_character_group,
    char_value,
    character,
    conductor_and_primitive,
)
from .equidist import (
    SequenceSpec,
    UDReport,
    discrepancy_star_1d,
    harmonics_box,
    ud_report,
    weyl_integral_continuous,
    weyl_sum_discrete,
)
from .errors import (
    ConfigError,
    DegenerateTargetError,
    DomainError,
    HeightCapError,
    PoleError,
    PrecisionError,
    QuadratureAccuracyError,
    SingularFactorError,
    UnivlabError,
)
from .euler_product import PrimeSet, Twist, shifted_product, truncated_euler_product
from .lfunc import EvalParams, GridEvaluator, hurwitz_zeta, l_derivative, l_value
from .moments import (
    MeanSquareReport,
    carlson_tail,
    empirical_mean_square_shifted,
    empirical_mean_square_vertical,
    gallagher_check,
)
from .shifts import (
    ExactAlpha,
    PathologyData,
    ShiftFamily,
    adjust_target,
    classify_family_set,
    eval_shift,
    minimal_rational_exponent,
    parse_alpha_spec,
    pathology_summary,
    q_star,
)
from .targets import CompactRect, TargetFunction

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
