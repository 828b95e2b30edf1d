"""Pilot runs behind the tolerances stored in configs/.

Runs each op-error sweep with checks disabled, plus the spike-driven
unbundle roundtrip and a small graph sweep, and prints the observed error
alongside a suggested tolerance: the stated target when the pilot sits under
it, otherwise the observed value rounded up to the next 0.01.
"""

import argparse
import math

import numpy as np

from hdosc import experiments, fhrr
from hdosc import oscillator as osc


TARGETS = {"similarity": 0.01, "bundle": 0.05, "bind": 0.05, "unbind": 0.05, "unbundle": 0.08}


def suggest(x: float, target: float) -> float:
    return target if x < target else math.ceil(x * 100) / 100


def op_pilot(op: str, grid: int, periods: int):
    cfg = experiments.load_config({"experiment": "op-error", "op": op, "grid": grid, "periods": periods})
    rows = [line.split(",") for line in experiments.run(cfg).files["main"].splitlines()[2:]]
    return [float(r[3]) for r in rows], float(rows[-1][6])


def unbundle_pilot(dim: int, trials: int):
    params = osc.OscillatorParams()
    ref = osc.settle_reference(params, 10)
    errs = []
    for rng in fhrr.spawn(0, trials):
        phases = fhrr.random_codebook(3, dim, rng)
        banks = [osc.OscillatorBank(osc.settle(p, params, 10), params, 10.0) for p in phases]
        out = osc.osc_unbundle(osc.osc_bundle(banks), banks[1:], 3)
        errs.append(np.mean(np.abs(fhrr.wrap(osc.decode_phase(out, ref) - phases[0]))))
    return float(np.mean(errs)), float(np.max(errs))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=32)
    parser.add_argument("--periods", type=int, default=10)
    parser.add_argument("--dim", type=int, default=1024)
    parser.add_argument("--trials", type=int, default=20)
    args = parser.parse_args()

    print(f"{'op':<12}{'period 1':>12}{'final':>12}{'median':>12}{'suggested':>12}")
    for op in experiments.OPS:
        means, median = op_pilot(op, args.grid, args.periods)
        print(f"{op:<12}{means[0]:>12.4g}{means[-1]:>12.4g}{median:>12.3g}{suggest(means[-1], TARGETS[op]):>12.3g}")

    mean, worst = unbundle_pilot(args.dim, args.trials)
    print(f"\nunbundle (3 inputs, d={args.dim}): mean |error| {mean:.4g}, worst trial {worst:.4g}, suggested {suggest(worst, TARGETS['unbundle']):.3g}")

    cfg = experiments.load_config({"experiment": "graph", "p_list": [0.02, 0.05], "seeds": 5, "backend": "phase"})
    rows = [line.split(",") for line in experiments.run(cfg).files["main"].splitlines()[2:]]
    for p in cfg.p_list:
        vals = [float(r[5]) for r in rows if float(r[1]) == p]
        print(f"graph AUROC at p={p}: mean {np.mean(vals):.4f}, min {np.min(vals):.4f}")


if __name__ == "__main__":
    main()
