"""Two interchangeable executors for HD operations.

Algorithms work on opaque handles obtained from ``backend.encode`` and only
look at phases through ``decode``/``similarity``.  The phase backend's handle
is the phase array itself.  The oscillator backend supports two disciplines:

``reencode`` (default)
    handles are phases; every op spike-encodes its inputs, settles fresh
    zero-initialised banks, applies the oscillator-domain op to the settled
    states and decodes the result against a simulated reference.
``chained``
    handles are settled complex states; op outputs feed the next op directly
    without decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fhrr
from . import oscillator as osc


class PhaseBackend:
    name = "phase"

    def encode(self, phases):
        return np.asarray(phases, dtype=float)

    def decode(self, h):
        return h

    def similarity(self, a, b):
        return fhrr.similarity(a, b)

    def bundle(self, items):
        return fhrr.bundle(list(items))

    def weighted_bundle(self, items, weights):
        return fhrr.weighted_bundle(np.asarray(items), weights)

    def linear(self, x, w):
        """Per-row weighted bundle: arg(W @ e^{ix}); ``x`` may be batched (..., n)."""
        return fhrr.from_complex(fhrr.to_complex(x) @ np.asarray(w).T)

    def bind(self, a, b):
        return fhrr.bind(a, b)

    def unbind(self, c, b):
        return fhrr.unbind(c, b)


@dataclass
class OscillatorBackend:
    params: osc.OscillatorParams = field(default_factory=osc.OscillatorParams)
    cycles: int = 10
    mode: str = "reencode"
    drive: float = 1.0
    name: str = "osc"

    def __post_init__(self):
        if self.mode not in ("reencode", "chained"):
            raise ValueError(f"unknown oscillator mode {self.mode!r}")
        self._ref = osc.settle_reference(self.params, self.cycles).state

    def _states(self, h):
        if self.mode == "chained":
            return h
        return osc.settle(h, self.params, self.cycles, self.drive)

    def _out(self, states):
        if self.mode == "chained":
            return states
        return osc.decode_states(states, self._ref)

    def encode(self, phases):
        phases = np.asarray(phases, dtype=float)
        if self.mode == "chained":
            return osc.settle(phases, self.params, self.cycles, self.drive)
        return phases

    def decode(self, h):
        if self.mode == "chained":
            return osc.decode_states(h, self._ref)
        return h

    def similarity(self, a, b):
        return osc.similarity_states(self._states(a), self._states(b))

    def bundle(self, items):
        z = np.stack([self._states(x) for x in items])
        return self._out(z.sum(axis=0) / z.shape[0])

    def weighted_bundle(self, items, weights):
        return self._out(np.asarray(weights, dtype=float) @ self._states(np.asarray(items)))

    def linear(self, x, w):
        return self._out(self._states(x) @ np.asarray(w, dtype=float).T)

    def bind(self, a, b):
        return self._out(osc.bind_states(self._states(a), self._states(b), self._ref))

    def unbind(self, c, b):
        return self._out(osc.unbind_states(self._states(c), self._states(b), self._ref))


def make_backend(name: str, **kwargs):
    if name == "phase":
        return PhaseBackend()
    if name in ("osc", "oscillator"):
        return OscillatorBackend(**kwargs)
    raise ValueError(f"unknown backend {name!r}")
