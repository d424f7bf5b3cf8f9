"""Concentration bounds for ultra log-concave distributions."""

from .distributions import (
    DiscretePMF,
    PMFError,
    convolve,
    is_log_concave,
    is_ultra_log_concave,
    lower_tail,
    make_binomial,
    make_poisson,
    make_truncated_poisson,
    mean,
    mgf,
    random_ulc,
    upper_tail,
    variance,
)
from .bounds import (
    TailBoundReport,
    bennett_h,
    chernoff_upper_oracle,
    corollary2_lower,
    corollary2_upper,
    johnson_bound,
    theorem1_lower,
    theorem1_upper,
    verify_variance,
)
from .extremizers import ExtremizerParams, extremizer_pmf, psi, verify_mgf_domination
from .intrinsic_volumes import (
    Ball,
    Box,
    ScaledCube,
    corollary6_check,
    intrinsic_volumes,
    poisson_limit_demo,
    zk_pmf,
)

__version__ = "0.1.0"
