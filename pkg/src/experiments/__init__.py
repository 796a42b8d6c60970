"""
Experiments: estimators of the invariant densities, edge speeds,
extinction times, thermalization and decay of correlations.

Each experiment is a BaseExperiment subclass registered in EXPERIMENTS under
its name; the functional entry points are exported for library use.
"""
from .config import ExperimentConfig
from .estimators import EstimateResult, FitResult, KSReport, Estimators, Z_95
from .base_experiment import (
    BaseExperiment,
    ExperimentResult,
    STREAM_LAYERS,
    replica_key,
    serial_map,
)
from .density import (
    estimate_rho,
    estimate_dual_rho,
    margin_self_test,
    RhoExperiment,
    DualRhoExperiment,
    MarginExperiment,
)
from .edges import (
    estimate_alpha,
    superlinearity_check,
    edge_identity_check,
    edge_gap_experiment,
    edge_deviation_tail,
    AlphaExperiment,
    SuperlinearityExperiment,
    EdgeIdentityExperiment,
    EdgeGapExperiment,
    EdgeTailExperiment,
)
from .extinction import (
    sample_extinction_times,
    extinction_law_experiment,
    superlinear_mean_growth,
    ExtinctionLawExperiment,
    MeanGrowthExperiment,
)
from .thermalization import (
    concentration_report,
    spike_average,
    site_sum,
    time_average,
    thermalization_experiment,
    ThermalizationExperiment,
)
from .correlations import site_indicator, covariance_decay, sigma_tail, CovarianceExperiment, SigmaTailExperiment
from .phase import gamma_sweep, survival_bracket, SweepExperiment

EXPERIMENTS = {
    cls.name: cls
    for cls in (
        RhoExperiment,
        DualRhoExperiment,
        MarginExperiment,
        AlphaExperiment,
        SuperlinearityExperiment,
        EdgeIdentityExperiment,
        EdgeGapExperiment,
        EdgeTailExperiment,
        ExtinctionLawExperiment,
        MeanGrowthExperiment,
        ThermalizationExperiment,
        CovarianceExperiment,
        SigmaTailExperiment,
        SweepExperiment,
    )
}

__all__ = [
    'ExperimentConfig',
    'EstimateResult',
    'FitResult',
    'KSReport',
    'Estimators',
    'Z_95',
    'BaseExperiment',
    'ExperimentResult',
    'STREAM_LAYERS',
    'replica_key',
    'serial_map',
    'estimate_rho',
    'estimate_dual_rho',
    'margin_self_test',
    'estimate_alpha',
    'superlinearity_check',
    'edge_identity_check',
    'edge_gap_experiment',
    'edge_deviation_tail',
    'sample_extinction_times',
    'extinction_law_experiment',
    'superlinear_mean_growth',
    'concentration_report',
    'spike_average',
    'site_sum',
    'time_average',
    'thermalization_experiment',
    'site_indicator',
    'covariance_decay',
    'sigma_tail',
    'gamma_sweep',
    'survival_bracket',
    'EXPERIMENTS',
    'RhoExperiment',
    'DualRhoExperiment',
    'MarginExperiment',
    'AlphaExperiment',
    'SuperlinearityExperiment',
    'EdgeIdentityExperiment',
    'EdgeGapExperiment',
    'EdgeTailExperiment',
    'ExtinctionLawExperiment',
    'MeanGrowthExperiment',
    'ThermalizationExperiment',
    'CovarianceExperiment',
    'SigmaTailExperiment',
    'SweepExperiment'
]
