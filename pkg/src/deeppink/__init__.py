"""Feature selection with paired-input neural networks and model-X knockoffs."""

__version__ = "0.1.0"

from .errors import (DeepPinkError, DimensionMismatch, DivergedTraining,  # noqa: E402
                     NotPositiveDefinite, NumericalFailure, SingularSigma,
                     ZeroVarianceColumn)
from .filter import evaluate, knockoff_statistic, select, threshold  # noqa: E402
from .knockoffs import (AugmentedDesign, DesignMatrix, KnockoffModel,  # noqa: E402
                        ResponseVector, build_knockoff_model, equicorrelated_s,
                        estimate_covariance, exchangeability_diagnostic,
                        sample_knockoffs, standardize)
from .net import (PinkNetwork, TrainConfig, importance, init_network,  # noqa: E402
                  run_ensemble, train)
from .simgen import SimConfig, run_experiment  # noqa: E402

__all__ = [
    "AugmentedDesign", "DeepPinkError", "DesignMatrix", "DimensionMismatch",
    "DivergedTraining", "KnockoffModel", "NotPositiveDefinite", "NumericalFailure",
    "PinkNetwork", "ResponseVector", "SimConfig", "SingularSigma", "TrainConfig",
    "ZeroVarianceColumn", "build_knockoff_model", "equicorrelated_s",
    "estimate_covariance", "evaluate", "exchangeability_diagnostic", "importance",
    "init_network", "knockoff_statistic", "run_ensemble", "run_experiment",
    "sample_knockoffs", "select", "standardize", "threshold", "train",
]
