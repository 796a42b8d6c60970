"""
glspike: simulator, exact small-window oracle and experiment harness for the
nearest-neighbor spiking system with hard threshold, its auxiliary particle
system and its dual.
"""
__version__ = "1.0.0"
