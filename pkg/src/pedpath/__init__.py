"""Pedestrian corridor path-planning lab.

Trains a small stochastic policy to plan 10-node corridor paths under
a six-term human-comfort reward, and compares it against a social
force baseline and a derivative-free reference optimizer.
"""

__version__ = "0.1.0"
