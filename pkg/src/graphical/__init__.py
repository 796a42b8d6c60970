"""
Graphical construction: diagrams, sweeps and path reachability.
"""
from .configuration import Configuration
from .diagram import Diagram, build_diagram, mirror_diagram, shift_diagram
from .sweeps import forward_state, forward_trajectory, backward_dual_state, dual_forward_state
from .paths import enumerate_valid_paths
from .io import dump_diagram, load_diagram, format_diagram, parse_diagram

__all__ = [
    'Configuration',
    'Diagram',
    'build_diagram',
    'mirror_diagram',
    'shift_diagram',
    'forward_state',
    'forward_trajectory',
    'backward_dual_state',
    'dual_forward_state',
    'enumerate_valid_paths',
    'dump_diagram',
    'load_diagram',
    'format_diagram',
    'parse_diagram'
]
