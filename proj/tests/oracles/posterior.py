"""Exact block-model posteriors on small graphs by brute-force enumeration."""

import itertools

import numpy as np


def _degrees(n, edges):
    d = np.zeros(n)
    for u, v in edges:
        d[u] += 1
        d[v] += 1
    return d


def joint(n, edges, gamma, omega):
    """Weight exp(L(c)) prod gamma, L summed over ordered pairs with the diagonal."""
    gamma = np.asarray(gamma)
    omega = np.asarray(omega)
    k = len(gamma)
    d = _degrees(n, edges)
    a = np.zeros((n, n))
    for u, v in edges:
        a[u, v] = a[v, u] = 1
    weights = {}
    for c in itertools.product(range(k), repeat=n):
        w = omega[np.ix_(c, c)]
        with np.errstate(divide="ignore"):
            ll = np.sum(a * np.log(w)) - np.sum(np.outer(d, d) * w)
        weights[c] = np.exp(ll) * np.prod(gamma[list(c)])
    return _marginals(n, k, edges, weights)


def tree_fixed_point(n, edges, gamma, omega, tol=1e-14, damping=0.5, max_iter=5000):
    """prod gamma exp(-d_i h_{c_i}) prod_edges omega, with h solved self-consistently."""
    gamma = np.asarray(gamma)
    omega = np.asarray(omega)
    k = len(gamma)
    d = _degrees(n, edges)
    q = np.tile(gamma, (n, 1))
    for _ in range(max_iter):
        h = omega @ (d @ q)
        weights = {}
        for c in itertools.product(range(k), repeat=n):
            w = np.prod(gamma[list(c)]) * np.exp(-sum(d[i] * h[c[i]] for i in range(n)))
            for u, v in edges:
                w *= omega[c[u], c[v]]
            weights[c] = w
        q1, q2 = _marginals(n, k, edges, weights)
        change = np.max(np.abs(q1 - q))
        if change < tol:
            return q1, q2
        q = damping * q + (1 - damping) * q1
    raise RuntimeError("field iteration did not converge")


def _marginals(n, k, edges, weights):
    total = sum(weights.values())
    q1 = np.zeros((n, k))
    q2 = np.zeros((len(edges), k, k))
    for c, w in weights.items():
        p = w / total
        for i in range(n):
            q1[i, c[i]] += p
        for e, (u, v) in enumerate(edges):
            q2[e, c[u], c[v]] += p
    return q1, q2


PATH3 = {
    "nodes": ["a", "b", "c"],
    "edges": [[0, 1], [1, 2]],
    "gamma": [0.6, 0.4],
    "omega": [[0.3, 0.1], [0.1, 0.2]],
}

STAR4 = {
    "nodes": ["0", "1", "2", "3"],
    "edges": [[0, 1], [0, 2], [0, 3]],
    "gamma": [0.5, 0.3, 0.2],
    "omega": [[0.25, 0.05, 0.1], [0.05, 0.2, 0.15], [0.1, 0.15, 0.3]],
}


def compute():
    out = {}
    for name, g in (("path3", PATH3), ("star4", STAR4)):
        n = len(g["nodes"])
        jq1, jq2 = joint(n, g["edges"], g["gamma"], g["omega"])
        tq1, tq2 = tree_fixed_point(n, g["edges"], g["gamma"], g["omega"])
        out[name] = dict(g, joint={"q1": jq1.tolist(), "q2": jq2.tolist()},
                         tree={"q1": tq1.tolist(), "q2": tq2.tolist()})
    return out
