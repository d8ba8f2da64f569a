"""Worst-case to average-case reduction for the Sherrington-Kirkpatrick partition function.

Exact finite-field and rational pipelines, simulated faulty oracles, and
brute-force ground truth at desk scale.
"""

__version__ = "0.1.0"
