"""Writes the oracle fixtures, or with --check verifies the frozen copies."""

import argparse
import json
import math
import pathlib
import sys

import likelihood
import modularity
import posterior
import quantiles

ORACLES = {
    "posterior.json": posterior,
    "modularity.json": modularity,
    "likelihood.json": likelihood,
    "quantiles.json": quantiles,
}


def same(a, b, tol):
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(same(a[k], b[k], tol) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(same(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
    return a == b


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "fixtures"))
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args()
    out_dir = pathlib.Path(args.dir)
    failed = 0
    for name, module in ORACLES.items():
        value = json.loads(json.dumps(module.compute()))
        path = out_dir / name
        if args.check:
            frozen = json.loads(path.read_text())
            ok = same(value, frozen, 1e-12)
            print(("ok      " if ok else "MISMATCH ") + name)
            failed += not ok
        else:
            path.write_text(json.dumps(value, indent=1, sort_keys=True) + "\n")
            print("wrote", path)
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
