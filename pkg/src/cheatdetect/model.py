"""Pairwise-coupled binary response model.

One test (a column of the score matrix) is a sign vector x in {-1,+1}^I over
the I examinees.  Its probability is a random-field, random-bond Ising
distribution

    P(x) = exp( sum_i (theta_i - d_j) x_i + sum_{i<k} w_ik x_i x_k ) / Z_j,

where theta_i is the ability of examinee i, d_j the difficulty of test j, and
w_ik a symmetric coupling between examinees that is positive when the pair
exchanges answers and zero otherwise.  Each unordered pair is stored once
(key ``(i, k)`` with ``i < k``) and contributes a single ``w_ik x_i x_k``
term to the exponent, so the conditional (cavity) field at site i is
``theta_i - d_j + sum_k w_ik x_k``.

Everything here is a pure function of its inputs; ``ModelParams`` arrays are
frozen read-only at construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy.special import logsumexp

#: Largest system size for which exact enumeration (2^I states) is allowed.
MAX_ENUMERATION_SITES = 20

Pair = tuple[int, int]


def pair_key(i: int, k: int) -> Pair:
    """Canonical storage key (min, max) for the unordered examinee pair {i, k}."""
    i, k = int(i), int(k)
    if i == k:
        raise ValueError(f"self-coupling {{{i},{k}}} is not allowed")
    if i < 0 or k < 0:
        raise ValueError(f"examinee indices must be non-negative, got ({i}, {k})")
    return (i, k) if i < k else (k, i)


def all_pairs(n_examinees: int) -> list[Pair]:
    """All n(n-1)/2 unordered pairs in lexicographic order."""
    return [(i, k) for i in range(n_examinees) for k in range(i + 1, n_examinees)]


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Abilities, difficulties and the sparse symmetric coupling map.

    ``w`` maps canonical pairs ``(i, k)`` with ``i < k`` to coupling values;
    a pair that is absent has coupling exactly 0.  Symmetry w_ik = w_ki is
    structural: both orders resolve to the same stored entry.
    """

    theta: np.ndarray
    d: np.ndarray
    w: Mapping[Pair, float]

    def __post_init__(self):
        theta = _frozen_array(np.atleast_1d(self.theta))
        d = _frozen_array(np.atleast_1d(self.d))
        if theta.ndim != 1 or theta.size < 1:
            raise ValueError("theta must be a non-empty 1-d vector")
        if d.ndim != 1 or d.size < 1:
            raise ValueError("d must be a non-empty 1-d vector")
        w = {}
        for (i, k), value in dict(self.w).items():
            key = pair_key(i, k)
            if key[1] >= theta.size:
                raise ValueError(f"coupling pair {key} out of range for I={theta.size}")
            if key in w:
                raise ValueError(f"pair {key} supplied twice")
            w[key] = float(value)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "w", dict(sorted(w.items())))

    @property
    def n_examinees(self) -> int:
        return self.theta.size

    @property
    def n_problems(self) -> int:
        return self.d.size

    def coupling(self, i: int, k: int) -> float:
        """Coupling for the unordered pair {i, k}; 0.0 when the pair is absent."""
        return self.w.get(pair_key(i, k), 0.0)

    def support(self) -> frozenset[Pair]:
        """Pairs with a nonzero stored coupling."""
        return frozenset(p for p, v in self.w.items() if v != 0.0)

    def coupling_matrix(self) -> np.ndarray:
        """Dense symmetric (I, I) coupling matrix with zero diagonal."""
        return coupling_matrix(self.w, self.n_examinees)

    def replace_couplings(self, w: Mapping[Pair, float]) -> "ModelParams":
        return ModelParams(self.theta, self.d, w)


def coupling_matrix(w: Mapping[Pair, float], n_examinees: int) -> np.ndarray:
    mat = np.zeros((n_examinees, n_examinees))
    for (i, k), value in w.items():
        i, k = pair_key(i, k)
        mat[i, k] = value
        mat[k, i] = value
    return mat


def validate_score_matrix(scores: np.ndarray) -> np.ndarray:
    """Check an (I, J) score matrix: every entry exactly -1 or +1."""
    scores = np.asarray(scores)
    if scores.ndim != 2 or scores.shape[0] < 1 or scores.shape[1] < 1:
        raise ValueError(f"score matrix must be 2-d and non-empty, got shape {scores.shape}")
    if not np.isin(scores, (-1, 1)).all():
        raise ValueError("score matrix entries must all be -1 or +1")
    return scores


def column_energy(x, theta, d_j: float, w: Mapping[Pair, float]) -> float:
    """Energy of one answer column: -sum_i (theta_i - d_j) x_i - sum_{i<k} w_ik x_i x_k."""
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if x.shape != theta.shape:
        raise ValueError(f"answer vector has shape {x.shape}, abilities have shape {theta.shape}")
    energy = -float((theta - d_j) @ x)
    for (i, k), value in w.items():
        i, k = pair_key(i, k)
        energy -= value * x[i] * x[k]
    return energy


def enumerate_states(n_sites: int) -> np.ndarray:
    """All 2^n sign vectors as a (2^n, n) float array, in binary-counting order.

    Row 0 is all -1, the last row all +1; bit b of the row index drives site
    n-1-b.  The fixed order is what makes inverse-CDF sampling reproducible.
    """
    if n_sites > MAX_ENUMERATION_SITES:
        raise ValueError(
            f"enumeration over 2^{n_sites} states refused (limit {MAX_ENUMERATION_SITES} sites)"
        )
    codes = np.arange(2 ** n_sites, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n_sites - 1, -1, -1)) & 1
    return 2.0 * bits - 1.0


def column_energies_all(theta, d_j: float, w: Mapping[Pair, float]) -> np.ndarray:
    """Energies of all 2^I states of one column, in ``enumerate_states`` order."""
    theta = np.asarray(theta, dtype=np.float64)
    states = enumerate_states(theta.size)
    energies = -(states @ (theta - d_j))
    for (i, k), value in w.items():
        i, k = pair_key(i, k)
        energies -= value * states[:, i] * states[:, k]
    return energies


def column_log_partition(theta, d_j: float, w: Mapping[Pair, float]) -> float:
    return float(logsumexp(-column_energies_all(theta, d_j, w)))


def column_log_prob_exact(x, params: ModelParams, j: int) -> float:
    """Exact log P(x) for column j by brute-force normalization (I <= 20)."""
    d_j = float(params.d[j])
    energy = column_energy(x, params.theta, d_j, params.w)
    return -energy - column_log_partition(params.theta, d_j, params.w)


def column_probabilities_exact(params: ModelParams, j: int) -> np.ndarray:
    """Exact probabilities of all 2^I states of column j, in enumeration order."""
    energies = column_energies_all(params.theta, float(params.d[j]), params.w)
    log_probs = -energies - logsumexp(-energies)
    return np.exp(log_probs)


def local_field(i: int, j: int, column, params: ModelParams) -> float:
    """Cavity field theta_i - d_j + sum_k w_ik x_kj acting on examinee i in column j."""
    column = np.asarray(column, dtype=np.float64)
    if column.shape != params.theta.shape:
        raise ValueError(
            f"column has shape {column.shape}, expected ({params.n_examinees},)"
        )
    h = float(params.theta[i]) - float(params.d[j])
    for (a, b), value in params.w.items():
        if a == i:
            h += value * column[b]
        elif b == i:
            h += value * column[a]
    return h


def conditional_prob(r_ij: float, i: int, j: int, column, params: ModelParams) -> float:
    """P(r_ij | rest of column j) = exp(h r_ij) / 2 cosh(h) = (1 + tanh(h r_ij)) / 2.

    Entry i of ``column`` is ignored; only the other sites condition the
    probability.
    """
    if r_ij not in (-1, 1):
        raise ValueError(f"answer value must be -1 or +1, got {r_ij}")
    h = local_field(i, j, column, params)
    return 0.5 * (1.0 + float(np.tanh(h * r_ij)))


def gauge_shift(params: ModelParams, eta: float) -> ModelParams:
    """Add a common constant to every ability and every difficulty.

    The shift cancels in every theta_i - d_j difference, so column energies
    and probabilities are unchanged.
    """
    return ModelParams(params.theta + eta, params.d + eta, params.w)


def iter_pairs(w: Mapping[Pair, float]) -> Iterator[tuple[Pair, float]]:
    """Couplings in canonical pair order (deterministic iteration)."""
    return iter(sorted(w.items()))


def support_of(w: Mapping[Pair, float]) -> frozenset[Pair]:
    """Pairs whose value is nonzero, under canonical keys."""
    return frozenset(pair_key(i, k) for (i, k), v in w.items() if v != 0.0)
