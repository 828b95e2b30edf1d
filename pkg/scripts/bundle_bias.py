"""Why the settled oscillator bundle is biased against the phase bundle.

Each channel is kicked once per period at a phase-dependent offset, then
decays until the sampling instant.  The channel kicked most recently is the
strongest, so (Z_a + Z_b)/2 leans toward whichever input fired last.  This
script sweeps the sampling instant within the final period and reports the
median signed error and mean |error| on the op-error grid, then repeats the
sweep with unit-normalised inputs, which removes the bias.
"""

import argparse

import numpy as np

from hdosc import fhrr
from hdosc import oscillator as osc


def grid(resolution):
    g = np.arange(resolution) * (2 * np.pi / resolution)
    a, b = np.meshgrid(g, g, indexing="ij")
    a, b = fhrr.wrap(a.ravel()), fhrr.wrap(b.ravel())
    keep = np.abs(np.exp(1j * a) + np.exp(1j * b)) > 1e-9
    return a[keep], b[keep]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=32)
    parser.add_argument("--periods", type=int, default=10)
    parser.add_argument("--offsets", type=int, default=8, help="sampling instants per period")
    args = parser.parse_args()

    params = osc.OscillatorParams.with_periods(args.periods)
    a, b = grid(args.grid)
    want = fhrr.bundle([a, b])
    bank = osc.OscillatorBank.zeros(a.size, params)
    drive_a = osc.encode_spikes(a, params, args.periods)
    drive_b = osc.encode_spikes(b, params, args.periods)
    ref = osc.OscillatorBank(np.ones(1), params)

    print(f"{'t':>8}{'median':>12}{'mean|e|':>10}{'norm median':>13}{'norm mean|e|':>14}")
    for k in range(args.offsets):
        t = (args.periods - 1) * params.period + (k + 1) * params.period / args.offsets
        za, zb = osc.state_at(bank, drive_a, t), osc.state_at(bank, drive_b, t)
        zr = osc.state_at(ref, None, t)[0]
        raw = fhrr.wrap(osc.decode_states((za + zb) / 2, zr) - want)
        unit = fhrr.wrap(osc.decode_states(za / np.abs(za) + zb / np.abs(zb), zr) - want)
        print(f"{t:>8.3f}{np.median(raw):>12.3g}{np.mean(np.abs(raw)):>10.4f}{np.median(unit):>13.3g}{np.mean(np.abs(unit)):>14.3g}")


if __name__ == "__main__":
    main()
