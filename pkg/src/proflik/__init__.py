"""Profile likelihoods, Jeffreys-marginal likelihoods and their equivalence
for normal models."""

from .core import (
    LogCurve,
    RegressionSample,
    ScalarSample,
    VectorSample,
    anchor_curve,
    rss,
    scatter_matrix,
    sum_sq_dev,
)
from .errors import ProflikError

__version__ = "0.1.0"
