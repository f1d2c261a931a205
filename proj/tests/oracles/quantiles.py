"""Quantiles by linear interpolation at position 1 + (n - 1) p (numpy's default rule)."""

import numpy as np

PROBS = [0.09, 0.25, 0.5, 0.75, 0.91]
SAMPLES = {
    "one_to_hundred": list(range(1, 101)),
    "five": [20, 21, 22, 23, 24],
    "uneven": [18.5, 19.0, 23.25, 31.0, 31.0, 44.75, 60.0],
    "single": [42.0],
}


def compute():
    return {name: {"values": v, "probs": PROBS, "quantiles": np.quantile(np.asarray(v, float), PROBS).tolist()}
            for name, v in SAMPLES.items()}
