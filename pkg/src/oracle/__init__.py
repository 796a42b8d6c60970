"""
Exact finite-state computations on tiny windows.
"""
from .generator import RateMatrix, build_generator, dump_matrix, MAX_SITES
from .solvers import (
    Predicate,
    IsEmpty,
    SiteActive,
    is_empty,
    site_active,
    predicate_mask,
    mean_extinction_exact,
    mean_extinction_uniformized,
    truncation_terms,
    transient_distribution,
    transient_event_probability,
    extinction_cdf_expm,
)

__all__ = [
    'RateMatrix',
    'build_generator',
    'dump_matrix',
    'MAX_SITES',
    'Predicate',
    'IsEmpty',
    'SiteActive',
    'is_empty',
    'site_active',
    'predicate_mask',
    'mean_extinction_exact',
    'mean_extinction_uniformized',
    'truncation_terms',
    'transient_distribution',
    'transient_event_probability',
    'extinction_cdf_expm'
]
