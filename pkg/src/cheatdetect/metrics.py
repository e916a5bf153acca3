"""Recovery metrics: relative parameter errors, support TPR/TNR, ROC curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Collection, Mapping

import numpy as np

from .model import Pair, all_pairs, pair_key

if TYPE_CHECKING:
    from .decimation import DecimationTrajectory
    from .model import ModelParams


class UndefinedMetricError(ValueError):
    """The metric's denominator vanishes (e.g. an all-zero truth)."""


@dataclass(frozen=True)
class RecoveryMetrics:
    """Errors and support-recovery rates of one fit against the truth."""

    err_w: float | None
    err_theta: float
    err_d: float
    tpr: float
    tnr: float


def err_w(truth: Mapping[Pair, float], estimate: Mapping[Pair, float]) -> float:
    """Relative coupling error sqrt(sum (w - w*)^2 / sum w^2); absent pairs are 0."""
    truth = {pair_key(i, k): float(v) for (i, k), v in truth.items()}
    estimate = {pair_key(i, k): float(v) for (i, k), v in estimate.items()}
    denominator = sum(v * v for v in truth.values())
    if denominator == 0.0:
        raise UndefinedMetricError("coupling error is undefined for an all-zero truth")
    numerator = sum(
        (truth.get(p, 0.0) - estimate.get(p, 0.0)) ** 2
        for p in set(truth) | set(estimate)
    )
    return float(np.sqrt(numerator / denominator))


def _relative_vector_error(truth, estimate, name: str) -> float:
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape:
        raise ValueError(f"{name}: truth has shape {truth.shape}, estimate {estimate.shape}")
    denominator = float((truth ** 2).sum())
    if denominator == 0.0:
        raise UndefinedMetricError(f"{name} error is undefined for an all-zero truth")
    return float(np.sqrt(((truth - estimate) ** 2).sum() / denominator))


def err_theta(truth, estimate) -> float:
    """Relative ability error sqrt(sum (theta - theta*)^2 / sum theta^2)."""
    return _relative_vector_error(truth, estimate, "ability")


def err_d(truth, estimate) -> float:
    """Relative difficulty error sqrt(sum (d - d*)^2 / sum d^2)."""
    return _relative_vector_error(truth, estimate, "difficulty")


def tpr_tnr(
    truth_support: Collection[Pair],
    est_support: Collection[Pair],
    universe: Collection[Pair],
) -> tuple[float, float]:
    """Fractions of true couplings kept and of true zeros rejected.

    Vacuous cases count as perfect: TPR is 1 for an empty truth, TNR is 1
    when every pair is truly coupled.
    """
    universe = frozenset(pair_key(i, k) for i, k in universe)
    truth = frozenset(pair_key(i, k) for i, k in truth_support)
    est = frozenset(pair_key(i, k) for i, k in est_support)
    if not truth <= universe or not est <= universe:
        raise ValueError("supports must be subsets of the pair universe")
    negatives = universe - truth
    tpr = 1.0 if not truth else len(truth & est) / len(truth)
    tnr = 1.0 if not negatives else len(negatives - est) / len(negatives)
    return tpr, tnr


@dataclass(frozen=True)
class RocCurve:
    """Per-step (TNR, TPR) points of a decimation run, terminal step marked."""

    points: tuple[tuple[float, float], ...]
    terminal_index: int

    @property
    def terminal_point(self) -> tuple[float, float]:
        return self.points[self.terminal_index]


def roc_from_trajectory(
    traj: "DecimationTrajectory", truth_support: Collection[Pair]
) -> RocCurve:
    """One (TNR, TPR) point per decimation step, the active set as the estimate."""
    if not traj.steps:
        raise ValueError("trajectory has no steps")
    universe = all_pairs(traj.steps[0].params.n_examinees)
    points = []
    for step in traj.steps:
        tpr, tnr = tpr_tnr(truth_support, step.active_pairs, universe)
        points.append((tnr, tpr))
    return RocCurve(tuple(points), traj.terminal_index)


def recovery_metrics(
    truth: "ModelParams",
    estimate: "ModelParams",
    est_support: Collection[Pair],
) -> RecoveryMetrics:
    """Bundle all metrics of one estimate; err_w is None for an all-zero truth."""
    universe = all_pairs(truth.n_examinees)
    try:
        coupling_error = err_w(truth.w, estimate.w)
    except UndefinedMetricError:
        coupling_error = None
    tpr, tnr = tpr_tnr(truth.support(), est_support, universe)
    return RecoveryMetrics(
        err_w=coupling_error,
        err_theta=err_theta(truth.theta, estimate.theta),
        err_d=err_d(truth.d, estimate.d),
        tpr=tpr,
        tnr=tnr,
    )
