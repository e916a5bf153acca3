"""Pseudo-likelihood maximization over abilities, difficulties and couplings.

The pseudo log-likelihood of an (I, J) score matrix r is

    PL = sum_ij (theta_i - d_j) r_ij
       + sum_ij sum_{k in nbr(i)} w_ik r_ij r_kj          (each pair twice)
       - sum_ij log 2 cosh(theta_i - d_j + sum_k w_ik r_kj)
       - sum_j (d_j - mu)^2 / (2 sigma^2),

equivalently the sum of log single-site conditionals plus a Gaussian prior
on the difficulties (which also pins the common shift of theta and d).
PL is concave; it is maximized by fixed-step gradient ascent.  Steps are
scaled per block by the number of terms each gradient sums over (1/J for
theta and w, 1/I for d) so that one learning rate works at every data size.
An optional L1 penalty on the couplings is handled by a proximal
(soft-threshold) step, which produces exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Mapping

import numpy as np

from .model import (
    ModelParams,
    Pair,
    all_pairs,
    coupling_matrix,
    pair_key,
    validate_score_matrix,
)


class FitDivergedError(RuntimeError):
    """The objective became non-finite or decreased: the learning rate is too large."""


@dataclass(frozen=True)
class PriorConfig:
    """Gaussian prior N(mu, sigma2) on every difficulty d_j."""

    mu: float = 0.0
    sigma2: float = 0.5

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError(f"prior variance must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class FitOptions:
    learning_rate: float = 0.01
    max_iterations: int = 1000
    gradient_tolerance: float = 1e-5

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.max_iterations < 1:
            raise ValueError(f"need at least 1 iteration, got {self.max_iterations}")
        if self.gradient_tolerance < 0.0:
            raise ValueError(f"gradient tolerance must be >= 0, got {self.gradient_tolerance}")


@dataclass(frozen=True)
class PLGradient:
    """Analytic gradient of PL: per-ability, per-difficulty, per free pair."""

    theta: np.ndarray
    d: np.ndarray
    w: dict[Pair, float]


def _log2cosh(h: np.ndarray) -> np.ndarray:
    # log(2 cosh h) = |h| + log(1 + exp(-2|h|)), overflow-safe
    a = np.abs(h)
    return a + np.log1p(np.exp(-2.0 * a))


def _field_matrix(theta, d, w_matrix, r):
    return theta[:, None] - d[None, :] + w_matrix @ r


def _check_dimensions(params: ModelParams, r: np.ndarray):
    if params.n_examinees != r.shape[0] or params.n_problems != r.shape[1]:
        raise ValueError(
            f"params are ({params.n_examinees}, {params.n_problems}), "
            f"scores are {r.shape}"
        )


def pseudo_log_likelihood(params: ModelParams, data: np.ndarray, prior: PriorConfig) -> float:
    """PL of the data under the parameters, including the difficulty prior."""
    r = validate_score_matrix(data).astype(np.float64)
    _check_dimensions(params, r)
    fields = _field_matrix(params.theta, params.d, params.coupling_matrix(), r)
    value = float((fields * r).sum() - _log2cosh(fields).sum())
    value -= float(((params.d - prior.mu) ** 2).sum()) / (2.0 * prior.sigma2)
    return value


def _raw_gradient(theta, d, w_matrix, r, prior):
    """Gradient arrays; the (I, I) matrix holds pair gradients off-diagonal."""
    fields = _field_matrix(theta, d, w_matrix, r)
    tanh_fields = np.tanh(fields)
    g_theta = r.sum(axis=1) - tanh_fields.sum(axis=1)
    g_d = -r.sum(axis=0) + tanh_fields.sum(axis=0) - (d - prior.mu) / prior.sigma2
    g_w = 2.0 * (r @ r.T) - tanh_fields @ r.T - r @ tanh_fields.T
    return g_theta, g_d, g_w


def plm_gradient(
    params: ModelParams,
    data: np.ndarray,
    prior: PriorConfig,
    mask: Collection[Pair],
) -> PLGradient:
    """Analytic PL gradient; coupling entries only for the free pairs in ``mask``."""
    r = validate_score_matrix(data).astype(np.float64)
    _check_dimensions(params, r)
    g_theta, g_d, g_w = _raw_gradient(
        params.theta, params.d, params.coupling_matrix(), r, prior
    )
    free = sorted(pair_key(i, k) for i, k in mask)
    return PLGradient(g_theta, g_d, {(i, k): float(g_w[i, k]) for i, k in free})


def _soft_threshold(values: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(values) * np.maximum(np.abs(values) - threshold, 0.0)


def _free_matrix(mask: Collection[Pair], n: int) -> np.ndarray:
    free = np.zeros((n, n), dtype=bool)
    for i, k in mask:
        i, k = pair_key(i, k)
        if k >= n:
            raise ValueError(f"mask pair ({i}, {k}) out of range for I={n}")
        free[i, k] = True
        free[k, i] = True
    return free


def _ascend(r, prior, free, theta, d, w_matrix, opts, l1_penalty=0.0,
            pl_ceiling=None, pl_floor=None):
    """Fixed-step (block-scaled) gradient ascent; prox step on w when penalized.

    Returns updated arrays plus the number of iterations run.  Stops early
    when the max-norm of the gradient (for w under L1: of the generalized
    gradient, i.e. the prox step length in gradient units) falls below the
    tolerance.

    ``pl_ceiling`` and ``pl_floor`` serve the decimation driver, which must
    honour the nested-model ordering of pseudo-likelihood values: with a
    ceiling, ascent returns the last iterate whose PL is strictly below it;
    with a floor, the tolerance exit is deferred until PL has reached it.
    """
    I, J = r.shape
    step_theta = opts.learning_rate / J
    step_d = opts.learning_rate / I
    any_free = bool(free.any())
    track_pl = pl_ceiling is not None or pl_floor is not None
    row_sums = r.sum(axis=1)
    col_sums = r.sum(axis=0)
    overlap2 = 2.0 * (r @ r.T)
    previous = (theta, d, w_matrix)
    pl_now = None
    iterations = 0
    # overflow on divergence is expected and handled via FitDivergedError
    with np.errstate(over="ignore", invalid="ignore"):
        for iterations in range(1, opts.max_iterations + 1):
            fields = _field_matrix(theta, d, w_matrix, r)
            if track_pl:
                pl_now = float((fields * r).sum() - _log2cosh(fields).sum())
                pl_now -= float(((d - prior.mu) ** 2).sum()) / (2.0 * prior.sigma2)
                if pl_ceiling is not None and pl_now >= pl_ceiling:
                    theta, d, w_matrix = previous
                    iterations -= 1
                    break
            tanh_fields = np.tanh(fields)
            g_theta = row_sums - tanh_fields.sum(axis=1)
            g_d = -col_sums + tanh_fields.sum(axis=0) - (d - prior.mu) / prior.sigma2
            if any_free:
                g_w = overlap2 - tanh_fields @ r.T - r @ tanh_fields.T
                proposed = w_matrix + step_theta * g_w
                if l1_penalty > 0.0:
                    proposed = _soft_threshold(proposed, step_theta * l1_penalty)
                proposed[~free] = 0.0
                residual_w = float(np.abs(proposed - w_matrix).max()) / step_theta
            else:
                proposed = w_matrix
                residual_w = 0.0
            residual = max(
                float(np.abs(g_theta).max()), float(np.abs(g_d).max()), residual_w
            )
            if residual < opts.gradient_tolerance and (
                pl_floor is None or pl_now >= pl_floor
            ):
                iterations -= 1
                break
            previous = (theta, d, w_matrix)
            theta = theta + step_theta * g_theta
            d = d + step_d * g_d
            w_matrix = proposed
            if not (
                np.isfinite(theta).all()
                and np.isfinite(d).all()
                and (not any_free or np.isfinite(w_matrix).all())
            ):
                raise FitDivergedError(
                    f"parameters became non-finite after {iterations} iterations; "
                    f"reduce the learning rate (currently {opts.learning_rate})"
                )
    return theta, d, w_matrix, iterations


def _params_from_arrays(theta, d, w_matrix, mask) -> ModelParams:
    pairs = sorted(pair_key(i, k) for i, k in mask)
    return ModelParams(theta, d, {(i, k): float(w_matrix[i, k]) for i, k in pairs})


def plm_maximize(
    data: np.ndarray,
    prior: PriorConfig,
    mask: Collection[Pair],
    init: ModelParams,
    opts: FitOptions,
    l1_penalty: float = 0.0,
    pl_ceiling: float | None = None,
    pl_floor: float | None = None,
) -> ModelParams:
    """Maximize PL over (theta, d) and the couplings in ``mask``; others stay 0.

    ``init`` must respect the mask (no nonzero coupling outside it); frozen
    couplings remain exactly zero in the result.  Raises
    :class:`FitDivergedError` when the objective degrades, which signals a
    learning rate too large for the data.  ``pl_ceiling``/``pl_floor`` bound
    the returned PL for callers that must respect nested-model orderings
    (see :func:`cheatdetect.decimation.run_decimation`).
    """
    r = validate_score_matrix(data).astype(np.float64)
    _check_dimensions(init, r)
    free_pairs = frozenset(pair_key(i, k) for i, k in mask)
    for pair, value in init.w.items():
        if value != 0.0 and pair not in free_pairs:
            raise ValueError(f"init has nonzero coupling {pair} outside the free mask")
    free = _free_matrix(free_pairs, init.n_examinees)
    w_matrix = coupling_matrix({p: init.w.get(p, 0.0) for p in free_pairs}, init.n_examinees)

    def objective(params: ModelParams) -> float:
        value = pseudo_log_likelihood(params, r, prior)
        if l1_penalty > 0.0:
            value -= l1_penalty * sum(abs(v) for v in params.w.values())
        return value

    obj_start = objective(init)
    theta, d, w_matrix, _ = _ascend(
        r, prior, free, init.theta.copy(), init.d.copy(), w_matrix, opts,
        l1_penalty=l1_penalty, pl_ceiling=pl_ceiling, pl_floor=pl_floor,
    )
    fitted = _params_from_arrays(theta, d, w_matrix, free_pairs)
    obj_end = objective(fitted)
    if not np.isfinite(obj_end) or obj_end < obj_start - 1e-6 * (1.0 + abs(obj_start)):
        raise FitDivergedError(
            f"objective degraded from {obj_start} to {obj_end}; "
            f"reduce the learning rate (currently {opts.learning_rate})"
        )
    return fitted


def zero_params(I: int, J: int, mask: Collection[Pair] = ()) -> ModelParams:
    """All-zero initialization honouring a coupling mask."""
    return ModelParams(
        np.zeros(I), np.zeros(J), {pair_key(i, k): 0.0 for i, k in mask}
    )


def full_mask(I: int) -> frozenset[Pair]:
    """Every unordered pair free: inference without support knowledge."""
    return frozenset(all_pairs(I))
