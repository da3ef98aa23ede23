"""Shared helpers: deterministic random-model corpora and affine transforms."""

from __future__ import annotations

import itertools

import numpy as np

from crowdwise.model import CrowdModel
from crowdwise.montecarlo import random_model

# Parameter cycle used to build varied but reproducible model corpora.
_SIZES = (1, 2, 3, 4, 5, 6, 7, 8)
_BIAS_SCALES = (0.0, 0.5, 2.0)
_CORR_RANGES = ((-0.3, 0.8), (-0.9, 0.2), (0.0, 0.0), (-0.5, -0.1))
_CRITERION_VARS = (0.0, 0.5, 1.0, 4.0)


def model_corpus(
    count: int,
    base_seed: int = 0,
    sizes: tuple[int, ...] = _SIZES,
    criterion_vars: tuple[float, ...] = _CRITERION_VARS,
) -> list[CrowdModel]:
    """``count`` validated models cycling sizes, biases, correlations, criteria."""
    combos = list(itertools.product(sizes, _BIAS_SCALES, _CORR_RANGES, criterion_vars))
    models = []
    for k in range(count):
        n, bias, corr, cv = combos[k % len(combos)]
        models.append(
            random_model(
                n,
                seed=base_seed * 1_000_003 + k,
                bias_scale=bias,
                correlation_range=corr,
                criterion_var=cv,
            )
        )
    return models


def affine_model(model: CrowdModel, a: float, b: float) -> CrowdModel:
    """Apply v -> a*v + b to every judgment and criterion value."""
    return CrowdModel(
        judge_means=a * model.judge_means + b,
        judge_cov=a * a * model.judge_cov,
        criterion_mean=a * model.criterion_mean + b,
        criterion_var=a * a * model.criterion_var,
        cross_cov=a * a * model.cross_cov,
        judge_labels=model.judge_labels,
    )


def random_simplex_points(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """``count`` points drawn uniformly from the (n-1)-simplex."""
    return rng.dirichlet(np.ones(n), size=count)
