"""
Deterministic random streams and Poisson marks.
"""
from .streams import StreamKey, StreamRole, derive_stream, site_stream, UniformBuffer
from .marks import MarkKind, MarkSequence, poisson_marks, lazy_marks
from .accumulators import ReplicaAccumulator

__all__ = [
    'StreamKey',
    'StreamRole',
    'derive_stream',
    'site_stream',
    'UniformBuffer',
    'MarkKind',
    'MarkSequence',
    'poisson_marks',
    'lazy_marks',
    'ReplicaAccumulator'
]
