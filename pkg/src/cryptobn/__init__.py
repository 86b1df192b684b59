"""Discrete Bayesian networks for tracing what drives altcoin price moves.

Pipeline: ingest daily series, discretise them into Down/Up style states,
learn structure and CPTs, pick a model by cross-validation, then run
inference and sensitivity reports on the winner.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
