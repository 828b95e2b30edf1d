"""Monte-Carlo check of the random-symbol similarity spread.

The mean cosine of n independent uniform phase differences has variance
1/(2n), so 4/sqrt(2n) is a four-sigma band.  This draws pairs with plain
numpy (not hdosc) and reports the empirical spread per dimension.
"""

import argparse

import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=4000)
    parser.add_argument("--dims", type=int, nargs="+", default=[64, 256, 1024, 4096])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    gen = np.random.default_rng(args.seed)
    print(f"{'n':>6}{'std':>10}{'1/sqrt(2n)':>12}{'inside 4σ':>11}")
    for n in args.dims:
        d = gen.uniform(0, 2 * np.pi, (args.pairs, n)) - gen.uniform(0, 2 * np.pi, (args.pairs, n))
        sims = np.cos(d).mean(axis=1)
        bound = 4 / np.sqrt(2 * n)
        print(f"{n:>6}{sims.std():>10.5f}{1 / np.sqrt(2 * n):>12.5f}{np.mean(np.abs(sims) < bound):>11.4f}")


if __name__ == "__main__":
    main()
