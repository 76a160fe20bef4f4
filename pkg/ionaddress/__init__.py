"""
Ionaddress
==========

Composite microwave pulse sequences that drive different single-qubit
gates on ions sharing one control field, and the tools to check them:
a noisy qubit simulator, randomized benchmarking and simulated
calibration.

Licensed under the Apache License, Version 2.0.
"""
from importlib.metadata import PackageNotFoundError, version

from ionaddress.rotor import Rotation, TargetGate, compose, distance_hs, rot_from_axis_angle

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    __version__ = "0.0.0"
