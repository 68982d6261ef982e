"""Quantum-regression workbench.

Two small quantum neural-network regressors — one built on truncated-Fock
continuous-variable simulation, one on phase-rotation qubit arithmetic —
plus the data preparation, statistics, and CLI plumbing to train and compare
them on epidemic time series.
"""

__version__ = "0.1.0"
