"""L1-penalized pseudo-likelihood baseline.

Maximizes PL(theta, d, w) - lambda * sum_{i<k} |w_ik| by proximal gradient:
plain ascent steps on theta and d, soft-threshold steps on the couplings.
The soft threshold prunes couplings to exact zeros, so the recovered support
is simply the nonzero set.  A sweep over a lambda grid, warm-started from
small to large, locates the empirical lambda_max (everything pruned) and,
when the truth is available, the oracle lambda minimizing the coupling
error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .metrics import UndefinedMetricError, err_w
from .model import ModelParams, Pair, pair_key, validate_score_matrix
from .plm import FitOptions, PriorConfig, full_mask, plm_maximize, pseudo_log_likelihood, zero_params


@dataclass(frozen=True)
class L1Record:
    """Fit at one penalty strength."""

    penalty: float
    params: ModelParams
    pl: float
    support_size: int
    err_w: float | None


@dataclass(frozen=True)
class L1SweepResult:
    records: tuple[L1Record, ...]
    oracle_index: int | None
    lambda_max: float | None

    @property
    def oracle_record(self) -> L1Record | None:
        return None if self.oracle_index is None else self.records[self.oracle_index]


def default_lambda_grid(J: int, count: int = 20, lo: float = 1e-4, hi: float = 1.0) -> np.ndarray:
    """Log-spaced penalties on a per-sample scale: lambda = c * J for c in [lo, hi]."""
    return J * np.logspace(np.log10(lo), np.log10(hi), count)


def plm_l1_maximize(
    data: np.ndarray,
    prior: PriorConfig,
    penalty: float,
    opts: FitOptions,
    init: ModelParams | None = None,
) -> ModelParams:
    """Penalized fit with every pair free; pruned couplings are exact zeros."""
    if penalty < 0.0:
        raise ValueError(f"penalty must be >= 0, got {penalty}")
    r = validate_score_matrix(data)
    I, J = r.shape
    mask = full_mask(I)
    if init is None:
        init = zero_params(I, J, mask)
    return plm_maximize(r, prior, mask, init, opts, l1_penalty=penalty)


def lambda_sweep(
    data: np.ndarray,
    prior: PriorConfig,
    lambdas: Sequence[float],
    truth: ModelParams | None,
    opts: FitOptions,
) -> L1SweepResult:
    """Fit every penalty in ascending order, warm-starting from the previous fit.

    When ``truth`` is given each record carries err_w and the oracle index
    marks its argmin (None when the error is undefined everywhere, e.g. an
    all-zero truth).  ``lambda_max`` is the smallest grid value that prunes
    every coupling, when one exists.
    """
    if len(lambdas) == 0:
        raise ValueError("need at least one penalty value")
    ordered = sorted(float(v) for v in lambdas)
    if any(v < 0.0 for v in ordered):
        raise ValueError("penalties must be non-negative")
    if len(set(ordered)) != len(ordered):
        raise ValueError("penalties must be distinct")
    records = []
    params = None
    for penalty in ordered:
        try:
            params = plm_l1_maximize(data, prior, penalty, opts, init=params)
        except Exception as exc:
            raise RuntimeError(f"penalized fit failed at lambda={penalty}") from exc
        error = None
        if truth is not None:
            try:
                error = err_w(truth.w, params.w)
            except UndefinedMetricError:
                error = None
        records.append(
            L1Record(
                penalty=penalty,
                params=params,
                pl=pseudo_log_likelihood(params, data, prior),
                support_size=len(params.support()),
                err_w=error,
            )
        )
    defined = [(rec.err_w, idx) for idx, rec in enumerate(records) if rec.err_w is not None]
    oracle_index = min(defined)[1] if defined else None
    lambda_max = next((rec.penalty for rec in records if rec.support_size == 0), None)
    return L1SweepResult(tuple(records), oracle_index, lambda_max)


def threshold_support(w: Mapping[Pair, float], tau: float) -> frozenset[Pair]:
    """Pairs with |w| strictly above tau."""
    if tau < 0.0:
        raise ValueError(f"threshold must be >= 0, got {tau}")
    return frozenset(pair_key(i, k) for (i, k), v in w.items() if abs(v) > tau)


def sorted_coupling_magnitudes(w: Mapping[Pair, float]) -> list[tuple[Pair, float]]:
    """(pair, value) sorted by descending |value|; useful to eyeball the support gap."""
    return sorted(
        ((pair_key(i, k), float(v)) for (i, k), v in w.items()),
        key=lambda item: (-abs(item[1]), item[0]),
    )
