"""Shooting against the Fourier-Galerkin oracle on random trig polynomials.

    python scripts/oracle_check.py --samples 50 --seed 3
"""
import argparse
import cmath
import math
from dataclasses import dataclass

import numpy as np

from sturmbasis.floquet import find_pair, galerkin_pair
from sturmbasis.potential import trig_polynomial


@dataclass
class OracleConfig:
    samples: int = 50
    n_max: int = 12
    max_band: int = 8
    cmax: float = 0.5
    seed: int = 3


def main(cfg: OracleConfig):
    rng = np.random.default_rng(cfg.seed)
    errs = []
    for i in range(cfg.samples):
        K = int(rng.integers(1, cfg.max_band + 1))
        q = trig_polynomial({k: cfg.cmax * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
                             for k in range(-K, K + 1)})
        case = 1 + i % 2
        for n in range(1, cfg.n_max + 1):
            p = find_pair(q, case, n)
            g = galerkin_pair(q, case, n, n + 16)[0]
            a, b = p.lambda_minus, p.lambda_plus
            e = min(max(abs(a - g[0]), abs(b - g[1])), max(abs(a - g[1]), abs(b - g[0]))) / abs(g[0])
            errs.append(e)
    errs = np.array(errs)
    print(f"{errs.size} pairs: median {np.median(errs):.2e}, 99% {np.quantile(errs, 0.99):.2e}, max {errs.max():.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=3)
    a = ap.parse_args()
    main(OracleConfig(samples=a.samples, seed=a.seed))
