"""Desk-scale closed-loop VRU test simulator.

Synthesizes pedestrian/cyclist skeletal motion, emulates a monocular 3D pose
sensor, closes the loop through a track-and-follow vehicle controller, and
computes the stability metrics used to compare real-world and cyber-physical
runs of the same test catalog.
"""

__version__ = "0.1.0"
