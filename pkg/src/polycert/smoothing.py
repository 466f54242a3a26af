"""Randomized smoothing over an arbitrary base classifier.

Smoothing evaluates the base classifier under Gaussian input noise and
takes a majority vote. The certified radius comes from a one-sided
binomial confidence bound on the top-class probability: with lower
bound p > 1/2 the smoothed prediction cannot change within l2 radius
sigma * PhiInverse(p). Selection and estimation use disjoint noise
batches so the confidence bound stays valid.

A base classifier is any deterministic callable mapping a point to a
class id, or to None to abstain. Factories for the two bases used
throughout the package (the dual classifier and the nearest-subspace
baseline) are provided.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .classifier import AggregationRule, predict_dual, predict_nearest_subspace
from .data import Dictionary, LabeledDataset, SubspaceModel
from .errors import ArgumentError, ModelError
from .numerics import clopper_pearson_lower, inv_norm_cdf, make_rng, spawn_seeds

DEFAULT_SIGMA = 0.02
DEFAULT_SAMPLES = 100
DEFAULT_CONFIDENCE = 0.999


@dataclass
class SmoothingConfig:
    sigma: float = DEFAULT_SIGMA
    n0: int = DEFAULT_SAMPLES  # selection samples
    n: int = DEFAULT_SAMPLES  # estimation samples
    confidence: float = DEFAULT_CONFIDENCE
    seed: int = 0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ArgumentError(f"sigma must be positive, got {self.sigma}")
        if self.n0 < 1 or self.n < 1:
            raise ArgumentError("n0 and n must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise ArgumentError(
                f"confidence must lie in (0, 1), got {self.confidence}"
            )


@dataclass
class SmoothingCertificate:
    """Smoothed prediction with its certified l2 radius.

    ``predicted`` is None (abstain) whenever the lower confidence bound
    on the top-class probability fails to clear 1/2, in which case the
    radius is 0.
    """

    predicted: int | None
    p_lower: float
    radius: float


def make_dual_base(dictionary: Dictionary, lam: float,
                   rule: AggregationRule = AggregationRule.MAJORITY):
    """Base-classifier closure around the dual active-set classifier."""

    def base(x):
        pred, _ = predict_dual(dictionary, x, lam, rule, with_certificate=False)
        return pred.label

    return base


def make_nearest_subspace_base(model: SubspaceModel):
    """Base-classifier closure around the nearest-subspace baseline."""

    def base(x):
        return predict_nearest_subspace(model, x)

    return base


def _vote(base, x, sigma, count, seed):
    rng = make_rng(seed)
    noise = rng.normal(0.0, sigma, size=(count, x.shape[0]))
    tally: Counter = Counter()
    for row in noise:
        tally[base(x + row)] += 1
    tally.pop(None, None)
    return tally


def _top_class(tally) -> int | None:
    if not tally:
        return None
    best = max(tally.values())
    return min(k for k, c in tally.items() if c == best)


def smooth_predict(base, x: np.ndarray, cfg: SmoothingConfig) -> int | None:
    """Majority class of the base classifier over n0 noisy evaluations.

    Ties break to the lowest class id; None when every evaluation
    abstained. Deterministic given cfg.seed.
    """
    x = np.asarray(x, dtype=float)
    select_seed, _ = spawn_seeds(cfg.seed, 2)
    return _top_class(_vote(base, x, cfg.sigma, cfg.n0, select_seed))


def smooth_certify(base, x: np.ndarray, cfg: SmoothingConfig) -> SmoothingCertificate:
    """Smoothed prediction plus a certified l2 radius.

    The class is selected on n0 samples, its probability lower-bounded
    on n fresh samples at the configured confidence, and the radius is
    sigma * PhiInverse(p_lower) when that bound exceeds 1/2 (abstain
    with radius 0 otherwise).
    """
    x = np.asarray(x, dtype=float)
    select_seed, estimate_seed = spawn_seeds(cfg.seed, 2)
    candidate = _top_class(_vote(base, x, cfg.sigma, cfg.n0, select_seed))
    if candidate is None:
        return SmoothingCertificate(predicted=None, p_lower=0.0, radius=0.0)

    rng = make_rng(estimate_seed)
    noise = rng.normal(0.0, cfg.sigma, size=(cfg.n, x.shape[0]))
    hits = sum(1 for row in noise if base(x + row) == candidate)
    p_lower = clopper_pearson_lower(hits, cfg.n, cfg.confidence)
    if p_lower <= 0.5:
        return SmoothingCertificate(predicted=None, p_lower=p_lower, radius=0.0)
    return SmoothingCertificate(
        predicted=candidate,
        p_lower=p_lower,
        radius=cfg.sigma * inv_norm_cdf(p_lower),
    )


def certified_accuracy_curve(base, dataset: LabeledDataset, cfg: SmoothingConfig,
                             radii_grid) -> list[tuple[float, float]]:
    """Certified accuracy at each radius in the grid.

    A point counts at radius eps when its smoothed prediction matches
    the true label and its certified radius is at least eps; abstains
    count as wrong. Per-point noise seeds derive from cfg.seed, so the
    curve is reproducible and insensitive to evaluation order.
    """
    if dataset.count == 0:
        raise ModelError("dataset is empty")
    seeds = spawn_seeds(cfg.seed, dataset.count)
    correct = np.zeros(dataset.count, dtype=bool)
    radii = np.zeros(dataset.count)
    for i in range(dataset.count):
        point_cfg = SmoothingConfig(
            sigma=cfg.sigma, n0=cfg.n0, n=cfg.n,
            confidence=cfg.confidence, seed=seeds[i],
        )
        cert = smooth_certify(base, dataset.point(i), point_cfg)
        correct[i] = cert.predicted == int(dataset.labels[i])
        radii[i] = cert.radius
    return [
        (float(eps), float(np.mean(correct & (radii >= float(eps)))))
        for eps in radii_grid
    ]
