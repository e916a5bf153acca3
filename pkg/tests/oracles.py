"""Independent brute-force oracles for the test suite.

Everything here is deliberately written with plain Python loops and
``math`` so that it shares no code path with the package: term-by-term
energies, full-state enumeration, conditional ratios from enumerated joints,
a looped pseudo-log-likelihood, and central finite differences.
"""

import itertools
import math


def brute_energy(x, theta, d_j, pairs):
    """Term-by-term column energy; ``pairs`` maps (i, k) with i < k to w_ik."""
    total = 0.0
    for i in range(len(x)):
        total -= (theta[i] - d_j) * x[i]
    for (i, k), value in pairs.items():
        total -= value * x[i] * x[k]
    return total


def all_sign_vectors(n):
    """All sign vectors of length n, itertools order (first all -1)."""
    return [s for s in itertools.product((-1, 1), repeat=n)]


def brute_column_probs(theta, d_j, pairs):
    """Exact probability of every state of one column, as {state tuple: prob}."""
    weights = {}
    for state in all_sign_vectors(len(theta)):
        weights[state] = math.exp(-brute_energy(state, theta, d_j, pairs))
    z = sum(weights.values())
    return {state: value / z for state, value in weights.items()}


def brute_conditional(r, i, column, theta, d_j, pairs):
    """P(x_i = r | rest of column) from the enumerated joint."""
    probs = brute_column_probs(theta, d_j, pairs)
    column = list(column)
    column[i] = r
    num = probs[tuple(column)]
    column[i] = -r
    den = num + probs[tuple(column)]
    return num / den


def brute_pseudo_log_likelihood(theta, d, pairs, scores, mu, sigma2):
    """Looped pseudo log-likelihood: sum of log conditionals minus the d-prior."""
    n_examinees = len(theta)
    n_problems = len(d)
    total = 0.0
    for i in range(n_examinees):
        for j in range(n_problems):
            h = theta[i] - d[j]
            for (a, b), value in pairs.items():
                if a == i:
                    h += value * scores[b][j]
                elif b == i:
                    h += value * scores[a][j]
            total += h * scores[i][j] - math.log(2.0 * math.cosh(h))
    for j in range(n_problems):
        total -= (d[j] - mu) ** 2 / (2.0 * sigma2)
    return total


def central_difference(f, x0, h=1e-5):
    """Symmetric finite-difference derivative of a scalar function."""
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h)


def total_variation(p, q):
    """TV distance between two distributions given as aligned sequences."""
    return 0.5 * sum(abs(a - b) for a, b in zip(p, q))
