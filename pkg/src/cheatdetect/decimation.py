"""Coupling support recovery by decimation with a tilted-likelihood stop rule.

Starting from a fit with every pair free, each step permanently freezes the
fraction ``rho`` (of all pairs) with the smallest fitted magnitude at zero
and re-maximizes the pseudo-likelihood, warm-started from the previous fit.
The tilted value

    PL_tilted(x) = PL - (1 - x) * PL_max - x * PL_min

measures how far PL sits above the straight line between the all-pairs-free
anchor PL_max (at decimated fraction x = 0) and the all-pairs-frozen anchor
PL_min (at x = 1); it vanishes at both ends, and the step where it peaks is
the terminal estimate of the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import ModelParams, Pair, all_pairs, pair_key, validate_score_matrix
from .plm import FitOptions, PriorConfig, plm_maximize, pseudo_log_likelihood, zero_params


@dataclass(frozen=True)
class DecimationStep:
    """One record of the trajectory: fit after decimating a fraction x of pairs."""

    x: float
    active_pairs: frozenset[Pair]
    params: ModelParams
    pl: float
    pl_tilted: float


@dataclass(frozen=True)
class DecimationTrajectory:
    steps: tuple[DecimationStep, ...]
    pl_max: float
    pl_min: float
    terminal_index: int

    @property
    def terminal_step(self) -> DecimationStep:
        return self.steps[self.terminal_index]


def tilted_pl(pl: float, pl_max: float, pl_min: float, x: float) -> float:
    """PL minus the chord between the anchors; zero at x = 0 and x = 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"decimated fraction must lie in [0, 1], got {x}")
    return pl - (1.0 - x) * pl_max - x * pl_min


def compute_anchors(
    data: np.ndarray,
    prior: PriorConfig,
    opts: FitOptions,
    return_params: bool = False,
):
    """Maximized PL with every pair free (PL_max) and with none free (PL_min).

    The free model nests the frozen one, so PL_min <= PL_max up to optimizer
    tolerance.
    """
    r = validate_score_matrix(data)
    I, J = r.shape
    mask_all = frozenset(all_pairs(I))
    params_max = plm_maximize(r, prior, mask_all, zero_params(I, J, mask_all), opts)
    params_min = plm_maximize(r, prior, frozenset(), zero_params(I, J), opts)
    pl_max = pseudo_log_likelihood(params_max, r, prior)
    pl_min = pseudo_log_likelihood(params_min, r, prior)
    if return_params:
        return (pl_max, params_max), (pl_min, params_min)
    return pl_max, pl_min


def select_decimation_set(
    w_estimates: Mapping[Pair, float], rho: float, total_pairs: int
) -> frozenset[Pair]:
    """The ceil(rho * total_pairs) active pairs of smallest |w|.

    Returns fewer when the active set is smaller.  Ties in |w| break toward
    the lexicographically smaller pair.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"decimation fraction must lie in (0, 1), got {rho}")
    if not w_estimates:
        raise ValueError("cannot decimate from an empty active set")
    count = math.ceil(rho * total_pairs)
    ordered = sorted(
        ((pair_key(i, k), v) for (i, k), v in w_estimates.items()),
        key=lambda item: (abs(item[1]), item[0]),
    )
    return frozenset(pair for pair, _ in ordered[:count])


def run_decimation(
    data: np.ndarray,
    prior: PriorConfig,
    rho: float,
    opts: FitOptions,
) -> DecimationTrajectory:
    """Full decimation trajectory from all pairs free down to none.

    The x = 0 record reuses the PL_max anchor fit and the x = 1 record the
    PL_min anchor fit; every intermediate step is warm-started from its
    predecessor with the newly frozen pairs zeroed.  Because each step's
    model nests the next one, true maxima are ordered, and the step fits
    enforce that ordering on the recorded values too: ascent never runs past
    the previous step's PL and never stops below the PL_min anchor, so

        pl_min <= pl(step) <= pl_max

    holds at every step by construction.  The terminal index marks the
    maximal PL_tilted.
    """
    r = validate_score_matrix(data)
    if not 0.0 < rho < 1.0:
        raise ValueError(f"decimation fraction must lie in (0, 1), got {rho}")
    (pl_max, params_max), (pl_min, params_min) = compute_anchors(
        r, prior, opts, return_params=True
    )
    total = len(all_pairs(r.shape[0]))
    active = frozenset(all_pairs(r.shape[0]))
    params = params_max
    pl = pl_max
    steps = []
    while True:
        x = 1.0 - len(active) / total
        steps.append(
            DecimationStep(x=x, active_pairs=active, params=params, pl=pl,
                           pl_tilted=tilted_pl(pl, pl_max, pl_min, x))
        )
        if not active:
            break
        doomed = select_decimation_set(
            {pair: params.w[pair] for pair in active}, rho, total
        )
        active = active - doomed
        if not active:
            # same model as the PL_min anchor; reuse that fit
            params, pl = params_min, pl_min
            continue
        warm = ModelParams(
            params.theta, params.d, {pair: params.w[pair] for pair in active}
        )
        try:
            params = plm_maximize(
                r, prior, active, warm, opts, pl_ceiling=pl, pl_floor=pl_min
            )
        except Exception as exc:
            raise RuntimeError(
                f"pseudo-likelihood fit failed at decimation step {len(steps)} "
                f"({len(active)} active pairs)"
            ) from exc
        pl = pseudo_log_likelihood(params, r, prior)
    tilted = np.array([s.pl_tilted for s in steps])
    return DecimationTrajectory(
        steps=tuple(steps),
        pl_max=pl_max,
        pl_min=pl_min,
        terminal_index=int(np.argmax(tilted)),
    )
