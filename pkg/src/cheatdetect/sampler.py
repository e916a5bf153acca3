"""Ground-truth generation and synthetic score sampling.

Columns of the score matrix are independent draws from the column
distribution, produced either by heat-bath MCMC (any system size) or by
exact inverse-CDF enumeration (small systems, used as the oracle in tests).

Randomness is organised as named streams derived from the configuration
seed, so that columns can be sampled in any order, in chunks, or in
parallel without changing a single bit of the output:

* stream ``(seed, 0)``      draws the ground-truth parameters, in the order
  theta, d, pair-inclusion uniforms;
* stream ``(seed, 1, j)``   drives column j. For Gibbs sampling it yields
  the I uniforms of the random initial state followed by ``sweeps * I``
  single-site update uniforms; for exact sampling it yields one uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import (
    ModelParams,
    all_pairs,
    column_energies_all,
    enumerate_states,
)

_TRUTH_STREAM = 0
_COLUMN_STREAM = 1

#: columns sampled per vectorized batch; output is chunk-size invariant
_CHUNK_COLUMNS = 1024

GIBBS = "gibbs"
EXACT = "exact"


@dataclass(frozen=True)
class GenerationConfig:
    """Settings for one synthetic data set.

    ``p`` is the probability that any of the I(I-1)/2 examinee pairs shares
    answers; shared pairs get coupling ``coupling_value``.  Abilities and
    difficulties are i.i.d. Gaussian with mean ``param_mean`` and variance
    ``param_variance`` (variance, not standard deviation).
    """

    I: int
    J: int
    p: float
    coupling_value: float = 1.0
    param_mean: float = 0.0
    param_variance: float = 0.5
    seed: int = 0
    mcmc_sweeps: int = 100
    mcmc_method: str = GIBBS

    def __post_init__(self):
        if self.I < 2:
            raise ValueError(f"need at least 2 examinees, got I={self.I}")
        if self.J < 1:
            raise ValueError(f"need at least 1 problem, got J={self.J}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"pair probability must lie in [0, 1], got {self.p}")
        if self.param_variance <= 0.0:
            raise ValueError(f"parameter variance must be positive, got {self.param_variance}")
        if self.mcmc_method not in (GIBBS, EXACT):
            raise ValueError(f"unknown sampling method {self.mcmc_method!r}")
        if self.mcmc_method == GIBBS and self.mcmc_sweeps < 1:
            raise ValueError(f"need at least 1 Gibbs sweep, got {self.mcmc_sweeps}")


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def truth_rng(config: GenerationConfig) -> np.random.Generator:
    return _stream(config.seed, _TRUTH_STREAM)


def column_rng(config: GenerationConfig, j: int) -> np.random.Generator:
    return _stream(config.seed, _COLUMN_STREAM, j)


def generate_truth(config: GenerationConfig, rng: np.random.Generator | None = None) -> ModelParams:
    """Draw ground-truth parameters: Gaussian fields, Bernoulli(p) pair support."""
    if rng is None:
        rng = truth_rng(config)
    std = np.sqrt(config.param_variance)
    theta = config.param_mean + std * rng.standard_normal(config.I)
    d = config.param_mean + std * rng.standard_normal(config.J)
    pairs = all_pairs(config.I)
    include = rng.random(len(pairs)) < config.p
    w = {pair: config.coupling_value for pair, hit in zip(pairs, include) if hit}
    return ModelParams(theta, d, w)


def _neighbor_lists(w_matrix: np.ndarray) -> list[list[tuple[int, float]]]:
    n = w_matrix.shape[0]
    return [
        [(k, float(w_matrix[i, k])) for k in range(n) if k != i and w_matrix[i, k] != 0.0]
        for i in range(n)
    ]


def _gibbs_kernel(theta, d_vec, neighbors, states, uniforms):
    """Sequential heat-bath sweeps, vectorized across columns.

    ``states`` is (I, m) and updated in place; ``uniforms`` is
    (sweeps, I, m).  The site-i acceptance probability is the conditional
    P(x_i = +1 | rest) = (1 + tanh(h_i)) / 2 with the cavity field h_i.
    Neighbor contributions accumulate in fixed k order so the result does
    not depend on how columns are batched.
    """
    sweeps = uniforms.shape[0]
    for t in range(sweeps):
        for i in range(len(theta)):
            h = theta[i] - d_vec
            for k, value in neighbors[i]:
                h = h + value * states[k]
            p_plus = 0.5 * (1.0 + np.tanh(h))
            states[i] = np.where(uniforms[t, i] < p_plus, 1.0, -1.0)


def gibbs_sample_column(
    params: ModelParams, j: int, sweeps: int, rng: np.random.Generator
) -> np.ndarray:
    """One column by heat-bath MCMC from a uniform random initial state."""
    if sweeps < 1:
        raise ValueError(f"need at least 1 sweep, got {sweeps}")
    I = params.n_examinees
    init = np.where(rng.random(I) < 0.5, 1.0, -1.0)
    uniforms = rng.random((sweeps, I))
    states = init[:, None].copy()
    neighbors = _neighbor_lists(params.coupling_matrix())
    _gibbs_kernel(params.theta, np.array([float(params.d[j])]), neighbors, states, uniforms[:, :, None])
    return states[:, 0].astype(np.int8)


def exact_sample_column(params: ModelParams, j: int, rng: np.random.Generator) -> np.ndarray:
    """One column drawn exactly by inverse CDF over all 2^I states (I <= 20)."""
    energies = column_energies_all(params.theta, float(params.d[j]), params.w)
    weights = np.exp(-(energies - energies.min()))
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    idx = min(idx, len(cdf) - 1)
    return enumerate_states(params.n_examinees)[idx].astype(np.int8)


def _gibbs_columns(params, config, columns):
    I = params.n_examinees
    sweeps = config.mcmc_sweeps
    m = len(columns)
    states = np.empty((I, m))
    uniforms = np.empty((sweeps, I, m))
    for c, j in enumerate(columns):
        rng = column_rng(config, j)
        states[:, c] = np.where(rng.random(I) < 0.5, 1.0, -1.0)
        uniforms[:, :, c] = rng.random((sweeps, I))
    neighbors = _neighbor_lists(params.coupling_matrix())
    d_vec = params.d[np.asarray(columns)]
    _gibbs_kernel(params.theta, d_vec, neighbors, states, uniforms)
    return states.astype(np.int8)


def _exact_columns(params, config, columns):
    I = params.n_examinees
    energies = column_energies_all(params.theta, 0.0, params.w)
    states = enumerate_states(I)
    site_sum = states.sum(axis=1)
    d_vec = params.d[np.asarray(columns)]
    logits = -energies[:, None] + site_sum[:, None] * (-d_vec[None, :])
    logits -= logits.max(axis=0, keepdims=True)
    cdf = np.cumsum(np.exp(logits), axis=0)
    cdf /= cdf[-1:, :]
    u = np.array([column_rng(config, j).random() for j in columns])
    idx = np.minimum((cdf < u[None, :]).sum(axis=0), len(states) - 1)
    return states[idx].T.astype(np.int8)


def generate_scores(params: ModelParams, config: GenerationConfig) -> np.ndarray:
    """Sample the (I, J) score matrix: J independent columns, one RNG stream each.

    Deterministic given (params, config); the per-column streams make the
    result independent of batching, so columns may also be produced in
    parallel.
    """
    if params.n_examinees != config.I or params.n_problems != config.J:
        raise ValueError(
            f"params are ({params.n_examinees}, {params.n_problems}), "
            f"config expects ({config.I}, {config.J})"
        )
    scores = np.empty((config.I, config.J), dtype=np.int8)
    if config.mcmc_method == EXACT:
        chunk = max(1, min(_CHUNK_COLUMNS, 2 ** 22 // (2 ** config.I)))
        sample = _exact_columns
    else:
        chunk = _CHUNK_COLUMNS
        sample = _gibbs_columns
    for start in range(0, config.J, chunk):
        columns = list(range(start, min(start + chunk, config.J)))
        scores[:, columns] = sample(params, config, columns)
    return scores


def generate_dataset(config: GenerationConfig) -> tuple[ModelParams, np.ndarray]:
    """Truth parameters plus a score matrix sampled from them."""
    truth = generate_truth(config)
    return truth, generate_scores(truth, config)


def with_seed(config: GenerationConfig, seed: int) -> GenerationConfig:
    return replace(config, seed=seed)
