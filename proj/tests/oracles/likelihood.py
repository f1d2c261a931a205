"""Ordered-pair DC-SBM log-likelihood and the closed-form M-step."""

import numpy as np


def log_likelihood(n, edges, labels, omega):
    omega = np.asarray(omega, dtype=float)
    a = np.zeros((n, n))
    for u, v in edges:
        a[u, v] = a[v, u] = 1
    d = a.sum(axis=1)
    c = np.asarray(labels)
    w = omega[np.ix_(c, c)]
    return float(np.sum(a * np.log(w)) - np.sum(np.outer(d, d) * w))


def m_step_hard(n, edges, labels, k):
    """gamma and omega when q1/q2 put all mass on one partition."""
    c = np.asarray(labels)
    d = np.zeros(n)
    for u, v in edges:
        d[u] += 1
        d[v] += 1
    gamma = np.bincount(c, minlength=k) / n
    big_d = np.array([d[c == r].sum() for r in range(k)])
    counts = np.zeros((k, k))
    for u, v in edges:
        counts[c[u], c[v]] += 1
        counts[c[v], c[u]] += 1
    omega = counts / np.outer(big_d, big_d)
    return gamma.tolist(), omega.tolist()


SIX = {"n": 6, "edges": [[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [2, 3], [1, 4]], "labels": [0, 0, 0, 1, 1, 1]}


def compute():
    omega = [[0.2, 0.03], [0.03, 0.15]]
    gamma, m_omega = m_step_hard(SIX["n"], SIX["edges"], SIX["labels"], 2)
    return {
        "six": dict(SIX, omega=omega,
                    loglike=log_likelihood(SIX["n"], SIX["edges"], SIX["labels"], omega),
                    m_step={"gamma": gamma, "omega": m_omega}),
    }
