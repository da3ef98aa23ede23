"""Expected squared error of a weighted crowd versus a selected individual.

For weights w on the simplex, the crowd aggregate C = sum_i w_i X_i has

    E[(C - Y)^2] = (mu_x' w - mu_y)^2 + w' Sigma w - 2 w' sigma_xy + sigma_y^2

and a judge drawn with probabilities p has

    E[(P - Y)^2] = sum_i p_i [ (mu_xi - mu_y)^2 + sigma_xi^2
                               - 2 sigma_yxi + sigma_y^2 ].

The crowd is wise when the first quantity does not exceed the second.  Both
sides are evaluated exactly from a CrowdModel; the N-term reductions use
compensated summation (math.fsum) so that placing all weight on judge i
reproduces that judge's own expected squared error bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch, ValidationFailed
from .model import CrowdModel, _readonly


def _cdot(a: np.ndarray, b: np.ndarray) -> float:
    """Compensated dot product: fsum of the elementwise products."""
    return math.fsum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float))


def _cquad(m: np.ndarray, w: np.ndarray) -> float:
    """Compensated quadratic form w' M w, one fsum per N-term reduction."""
    return math.fsum(w[i] * _cdot(m[i], w) for i in range(len(w)))


def _simplex_point(values, kind: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(values, dtype=float))
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValidationFailed([f"{kind} must be a nonempty vector"])
    if np.any(v < -1e-12) or np.any(~np.isfinite(v)):
        raise ValidationFailed(
            [f"{kind} entries must be nonnegative and finite, got {v.tolist()}"]
        )
    v = np.maximum(v, 0.0)
    total = math.fsum(v)
    if total <= 0.0:
        raise ValidationFailed([f"{kind} entries sum to zero"])
    if total != 1.0:
        v = v / total
    return v


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative aggregation weights summing to one (normalized on construction)."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "weights", _readonly(_simplex_point(self.weights, "weights"))
        )

    def __len__(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def point_mass(cls, index: int, n: int) -> "WeightVector":
        v = np.zeros(n)
        v[index] = 1.0
        return cls(v)


@dataclass(frozen=True)
class SelectionDistribution:
    """Probabilities of selecting each judge (normalized on construction)."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "probs", _readonly(_simplex_point(self.probs, "probs"))
        )

    def __len__(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def point_mass(cls, index: int, n: int) -> "SelectionDistribution":
        v = np.zeros(n)
        v[index] = 1.0
        return cls(v)


@dataclass(frozen=True)
class CrowdMse:
    """Crowd expected squared error and its four addends."""

    total: float
    bias_sq: float
    variance: float
    cross_term: float
    criterion_var: float


@dataclass(frozen=True)
class IndividualMse:
    """Selection-weighted expected squared error and the per-judge terms."""

    total: float
    per_judge: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "per_judge", _readonly(self.per_judge))


@dataclass(frozen=True)
class WisdomReport:
    """Both sides of the comparison, their gap, and the verdict.

    ``crowd_mse`` always equals ``crowd_bias_sq + crowd_variance +
    crowd_cross_term + criterion_var`` by construction, and
    ``individual_mse`` is the ``p``-weighted sum of ``per_judge_mse``.
    """

    crowd_mse: float
    individual_mse: float
    wisdom_gap: float
    is_wise: bool
    crowd_bias_sq: float
    crowd_variance: float
    crowd_cross_term: float
    criterion_var: float
    per_judge_mse: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "per_judge_mse", _readonly(self.per_judge_mse))


def _check_length(n: int, got: int, what: str) -> None:
    if got != n:
        raise ShapeMismatch(f"{what} has length {got} for {n} judges")


def crowd_mse(model: CrowdModel, w: WeightVector) -> CrowdMse:
    """Expected squared error of the aggregate defined by ``w``, decomposed.

    Returns the total alongside its addends: squared bias of the aggregate
    mean, aggregate variance w' Sigma w, the criterion cross term
    -2 w' sigma_xy, and the criterion variance.
    """
    _check_length(model.n_judges, len(w), "weight vector")
    wv = w.weights
    bias = _cdot(model.judge_means, wv) - model.criterion_mean
    bias_sq = bias * bias
    variance = _cquad(model.judge_cov, wv)
    cross_term = -2.0 * _cdot(model.cross_cov, wv)
    total = bias_sq + variance + cross_term + model.criterion_var
    return CrowdMse(
        total=total,
        bias_sq=bias_sq,
        variance=variance,
        cross_term=cross_term,
        criterion_var=model.criterion_var,
    )


def per_judge_mse(model: CrowdModel) -> np.ndarray:
    """Expected squared error of each judge alone.

    Entry i is computed with the identical arithmetic as ``crowd_mse`` at the
    point-mass weight on judge i, so the two paths agree exactly.
    """
    out = np.empty(model.n_judges)
    for i in range(model.n_judges):
        bias = model.judge_means[i] - model.criterion_mean
        bias_sq = bias * bias
        variance = model.judge_cov[i, i]
        cross_term = -2.0 * model.cross_cov[i]
        out[i] = bias_sq + variance + cross_term + model.criterion_var
    return out


def individual_mse(model: CrowdModel, p: SelectionDistribution) -> IndividualMse:
    """Expected squared error of a judge selected with probabilities ``p``."""
    _check_length(model.n_judges, len(p), "selection distribution")
    per_judge = per_judge_mse(model)
    total = _cdot(p.probs, per_judge)
    return IndividualMse(total=total, per_judge=per_judge)


def evaluate(
    model: CrowdModel, w: WeightVector, p: SelectionDistribution
) -> WisdomReport:
    """Assemble the full report; ties (zero gap) count as wise."""
    crowd = crowd_mse(model, w)
    individual = individual_mse(model, p)
    gap = individual.total - crowd.total
    return WisdomReport(
        crowd_mse=crowd.total,
        individual_mse=individual.total,
        wisdom_gap=gap,
        is_wise=gap >= 0.0,
        crowd_bias_sq=crowd.bias_sq,
        crowd_variance=crowd.variance,
        crowd_cross_term=crowd.cross_term,
        criterion_var=crowd.criterion_var,
        per_judge_mse=individual.per_judge,
    )
