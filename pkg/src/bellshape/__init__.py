"""Two-sided bell-shaped sequences: construction, verification, generating functions."""

from .constructors import (
    DiscreteMeasure,
    PolyaFrequencyParams,
    amcm_sequence,
    binomial_pmf,
    build,
    convolve,
    discrete_stable,
    pf_sequence,
    poisson_pmf,
)
from .errors import *  # noqa: F401,F403
from .genfunc import (
    CircleEvaluator,
    boundary_phi,
    check_c5,
    eval_direct,
    eval_exponential,
    recover_sequence,
)
from .inversion import mn_identity_check, post_invert, raising_factorial, transform_delta_G
from .phi import ExponentialRep, PhiFunction, check_admissible, check_boundary_mass
from .sequences import TwoSidedSequence, count_sign_changes, forward_difference, verify_bell_shaped
from .walks import WalkSpec, hitting_pmf, rrw_gf_closed, rw_gf_closed

__version__ = "0.1.0"
