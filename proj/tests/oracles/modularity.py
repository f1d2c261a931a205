"""Modularity values and exhaustive maxima from networkx."""

import networkx as nx
from networkx.algorithms.community import modularity as nx_modularity


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _graph(spec):
    g = nx.Graph()
    g.add_nodes_from(range(spec["n"]))
    for u, v, w in spec["edges"]:
        g.add_edge(u, v, weight=w)
    for i, w in spec.get("internal", []):
        g.add_edge(i, i, weight=w)
    return g


GRAPHS = {
    "two_triangles": {"n": 6, "edges": [[0, 1, 1], [1, 2, 1], [0, 2, 1], [3, 4, 1], [4, 5, 1], [3, 5, 1]],
                      "partition": [0, 0, 0, 1, 1, 1]},
    "bridged_triangles": {"n": 6, "edges": [[0, 1, 1], [1, 2, 1], [0, 2, 1], [3, 4, 1], [4, 5, 1], [3, 5, 1],
                                            [2, 3, 1]],
                          "partition": [0, 0, 0, 1, 1, 1]},
    "weighted_regions": {"n": 5, "edges": [[0, 1, 4], [1, 2, 1], [2, 3, 3], [3, 4, 2], [0, 4, 0.5]],
                         "internal": [[0, 2], [3, 1.5]], "partition": [0, 0, 1, 1, 1]},
    "path5": {"n": 5, "edges": [[0, 1, 1], [1, 2, 1], [2, 3, 1], [3, 4, 1]], "partition": [0, 0, 1, 1, 2]},
}


def compute():
    out = {}
    for name, spec in GRAPHS.items():
        g = _graph(spec)
        comms = {}
        for i, c in enumerate(spec["partition"]):
            comms.setdefault(c, set()).add(i)
        entry = dict(spec)
        entry["q"] = {}
        entry["max_q"] = {}
        for res in (1.0, 0.65, 1.5):
            key = repr(res)
            entry["q"][key] = nx_modularity(g, list(comms.values()), weight="weight", resolution=res)
            entry["max_q"][key] = max(
                nx_modularity(g, [set(p) for p in part], weight="weight", resolution=res)
                for part in _set_partitions(list(range(spec["n"]))))
        out[name] = entry
    return out
