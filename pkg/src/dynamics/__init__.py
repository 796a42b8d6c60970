"""
Event-driven simulators: auxiliary process, membrane model, windowed
approximations and the dual.
"""
from .window import Window, WindowKind, required_margin, DEFAULT_SPEED
from .records import RunStatus, SpikeLog, ObservedTrajectory, EdgeTrack
from .auxiliary import (
    AuxiliaryEvent,
    AuxiliaryProcess,
    AuxiliaryStep,
    ExtinctionRun,
    step_auxiliary,
    simulate_extinction,
    replay_skeleton,
)
from .membrane import MembraneState, MembraneProcess, MembraneRun, simulate_membrane
from .windowed import WindowedRun, simulate_windowed, simulate_windowed_infinite
from .dual import (
    CoupledDualEngine,
    CoupledEdges,
    DualTrajectory,
    IndexedSet,
    simulate_dual,
    simulate_dual_halfline_edge,
    simulate_dual_coupled,
    simulate_dual_family,
    simulate_dual_gamma_grid,
    replay_dual_skeleton,
)

__all__ = [
    'Window',
    'WindowKind',
    'required_margin',
    'DEFAULT_SPEED',
    'RunStatus',
    'SpikeLog',
    'ObservedTrajectory',
    'EdgeTrack',
    'AuxiliaryEvent',
    'AuxiliaryProcess',
    'AuxiliaryStep',
    'ExtinctionRun',
    'step_auxiliary',
    'simulate_extinction',
    'replay_skeleton',
    'MembraneState',
    'MembraneProcess',
    'MembraneRun',
    'simulate_membrane',
    'WindowedRun',
    'simulate_windowed',
    'simulate_windowed_infinite',
    'CoupledDualEngine',
    'CoupledEdges',
    'DualTrajectory',
    'IndexedSet',
    'simulate_dual',
    'simulate_dual_halfline_edge',
    'simulate_dual_coupled',
    'simulate_dual_family',
    'simulate_dual_gamma_grid',
    'replay_dual_skeleton'
]
