"""Constructive robustness certificates for data near unions of subspaces.

The package builds a classifier from the dual solution of an l1
reconstruction problem, attaches to every prediction a polyhedral
region on which that prediction is provably constant, and provides
randomized-smoothing and attack baselines plus closed-form analytic
examples for comparison.
"""

from . import analytic, attacks, bpdn, certificate, classifier, data, numerics, smoothing
from .errors import (
    ArgumentError,
    CertificateUndefinedError,
    ConvergenceError,
    ModelError,
    ParseError,
    PolycertError,
    SizeError,
)

__version__ = "0.1.0"

__all__ = [
    "analytic",
    "attacks",
    "bpdn",
    "certificate",
    "classifier",
    "data",
    "numerics",
    "smoothing",
    "ArgumentError",
    "CertificateUndefinedError",
    "ConvergenceError",
    "ModelError",
    "ParseError",
    "PolycertError",
    "SizeError",
    "__version__",
]
