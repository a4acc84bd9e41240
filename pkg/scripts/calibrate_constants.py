"""Measure the QSearch mean-iteration constant and freeze it in constants.py.

    python3 scripts/calibrate_constants.py [--seeds 1000] [--write]

For each (N, t) cell the mean number of Grover iterations until success is
divided by sqrt(N/t); the worst cell (rounded up to two decimals) becomes
``QSEARCH_D``.  Without ``--write`` the value is only printed.
"""
import argparse
import math
import re
from pathlib import Path

import numpy as np

from qcycle.search import qsearch

CONSTANTS = Path(__file__).resolve().parents[1] / "src" / "qcycle" / "constants.py"


def measure(seeds: int) -> tuple[float, list]:
    rows = []
    for N in (16, 64, 256, 1024):
        for t in sorted({1, 2, 4, N // 16, N // 4}):
            f = np.zeros(N, dtype=bool)
            f[:t] = True
            its = [qsearch(f, N, seed=s).iterations for s in range(seeds)]
            rows.append((N, t, float(np.mean(its)) / math.sqrt(N / t)))
    return max(r[2] for r in rows), rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--write", action="store_true")
    args = ap.parse_args()
    worst, rows = measure(args.seeds)
    for N, t, r in rows:
        print(f"N={N:5d} t={t:4d}  mean/sqrt(N/t) = {r:.3f}")
    value = math.ceil(worst * 100) / 100
    print(f"QSEARCH_D = {value}")
    if args.write:
        text = CONSTANTS.read_text()
        text, count = re.subn(r'("QSEARCH_D": )[0-9.]+', rf"\g<1>{value}", text)
        if count != 1:
            raise SystemExit("QSEARCH_D entry not found in constants.py")
        CONSTANTS.write_text(text)
        print(f"wrote {CONSTANTS}")


if __name__ == "__main__":
    main()
