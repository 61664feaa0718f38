"""Sequential normal scores: distribution-free inputs for normal-theory control charts."""

from .calibration import (ArlEstimate, CalibrationError, CalibrationTarget, StreamModel, calibrate_limit,
                          compare_sns_vs_normal, estimate_arl)
from .charts import (CusumMean, CusumMeanConfig, CusumVariance, CusumVarianceConfig, Ewma, EwmaConfig,
                     cusum_variance_k, ewma_limit)
from .normal import DomainError, anderson_darling_n01, phi, phi_inverse
from .rankstore import RankStore
from .scoring import (BatchScorer, ConditionalBatchScorer, ConditionalScorer, IndividualScorer, ScoredValue,
                      ScoringConvention, make_scorer, variance_of_p)

__version__ = "0.1.0"

__all__ = [
    "ArlEstimate", "BatchScorer", "CalibrationError", "CalibrationTarget", "ConditionalBatchScorer",
    "ConditionalScorer", "CusumMean", "CusumMeanConfig", "CusumVariance", "CusumVarianceConfig",
    "DomainError", "Ewma", "EwmaConfig", "IndividualScorer", "RankStore", "ScoredValue", "ScoringConvention",
    "StreamModel", "anderson_darling_n01", "calibrate_limit", "compare_sns_vs_normal", "cusum_variance_k",
    "estimate_arl", "ewma_limit", "make_scorer", "phi", "phi_inverse", "variance_of_p",
]
