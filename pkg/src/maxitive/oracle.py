"""Brute-force reference computations used to cross-check the library.

Deliberately naive: plain loops over outcomes with an explicit running
best, sharing no code with :mod:`maxitive.core`.
"""

from __future__ import annotations


def naive_expectation(values, weights):
    best = None
    for i in range(len(values)):
        cand = values[i] * weights[i]
        if best is None or cand > best:
            best = cand
    return best


def naive_variance(values, weights):
    centre = naive_expectation(values, weights)
    best = None
    for i in range(len(values)):
        d = values[i] - centre
        cand = d * d * weights[i]
        if best is None or cand > best:
            best = cand
    return best


def naive_measure(labels, weights, members):
    best = 0.0
    for i in range(len(labels)):
        if labels[i] in members and weights[i] > best:
            best = weights[i]
    return best


def naive_running_max(rows, n):
    out = list(rows[0])
    for k in range(1, n):
        for i in range(len(out)):
            if rows[k][i] > out[i]:
                out[i] = rows[k][i]
    return out


def oracle_moments(scenario, k=None, event=None):
    """(E_sup(X_k), Var_sup(X_k), P(event)) by enumeration; None where not asked."""
    labels = list(scenario.space.outcomes)
    weights = list(scenario.distribution.weights)
    e = var = p = None
    if k is not None:
        values = list(scenario.variable(k).values)
        e = naive_expectation(values, weights)
        var = naive_variance(values, weights)
    if event is not None:
        members = set(event.members if hasattr(event, "members") else event)
        p = naive_measure(labels, weights, members)
    return e, var, p
