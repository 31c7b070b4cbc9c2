"""Exact density evolution of varentropy under the polar transform."""

from .dist import (
    AlphaDistribution,
    BdeClass,
    BdeTag,
    BetaDistribution,
    DistributionError,
    binary_entropy,
    binary_entropy2,
    classify,
    conditional_entropy,
    make_bec,
    make_biawgn,
    make_bsc,
    to_beta,
    varentropy,
)
from .polar2 import (
    ConsistencyError,
    TransformReport,
    cov1,
    cov2,
    f_cov,
    h_minus_fn,
    h_plus_fn,
    polar_pair,
    star,
    transform_report,
)

__version__ = "0.1.0"
