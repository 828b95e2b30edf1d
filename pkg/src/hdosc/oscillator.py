"""Damped complex oscillators driven by phase-coded spikes.

Each channel obeys dZ/dt = (b + i omega) Z + I(t).  Spikes are real-valued
impulses added to Z at their event times.  Between events the system is
linear time-invariant, so the default integrator propagates exactly with
exp((b + i omega) dt); a fixed-step RK4 stepper is kept as an independent
check of that path.

Phase convention: a channel carrying phase phi fires when a phase-phi source
oscillator crosses arg 0, i.e. at times where omega t = -phi (mod 2 pi).  A
bank driven by such a train rotates as exp(i (omega t + phi)), so decoding
against a phase-0 reference returns phi.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DegeneratePhaseError, DimensionError, IntegrationDivergedError
from .fhrr import EPS_MAG, wrap

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class OscillatorParams:
    b: float = -0.2
    omega: float = TWO_PI
    dt: float = 1.0 / 256
    t_end: float = 10.0

    def __post_init__(self):
        if not self.b < 0:
            raise ValueError("damping b must be negative")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not 0 < self.dt < self.period / 20:
            raise ValueError("dt must lie in (0, period/20)")
        if self.t_end < self.period * (1 - 1e-12):
            raise ValueError("t_end must cover at least one period")

    @property
    def period(self) -> float:
        return TWO_PI / self.omega

    @property
    def rate(self) -> complex:
        return complex(self.b, self.omega)

    @classmethod
    def with_periods(cls, periods: float, b: float = -0.2, omega: float = TWO_PI, steps_per_period: int = 256):
        period = TWO_PI / omega
        return cls(b=b, omega=omega, dt=period / steps_per_period, t_end=periods * period)


@dataclass(frozen=True)
class OscillatorBank:
    states: np.ndarray
    params: OscillatorParams = field(default_factory=OscillatorParams)
    t: float = 0.0

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        if states.ndim < 1:
            raise DimensionError("bank states must be a vector")
        object.__setattr__(self, "states", states)

    @property
    def n(self) -> int:
        return self.states.shape[-1]

    @classmethod
    def from_phases(cls, phases, params: OscillatorParams | None = None, t: float = 0.0, amplitude: float = 1.0):
        """Analytic unit-circle bank: amplitude * exp(i (omega t + phi))."""
        params = params or OscillatorParams()
        phases = np.asarray(phases, dtype=float)
        return cls(amplitude * np.exp(1j * (params.omega * t + phases)), params, t)

    @classmethod
    def zeros(cls, n: int, params: OscillatorParams | None = None):
        return cls(np.zeros(n, dtype=complex), params or OscillatorParams(), 0.0)


@dataclass(frozen=True)
class ReferenceOscillator:
    """Undriven phase-0 channel; defines which state currently means angle 0."""

    state: complex
    t: float = 0.0

    @classmethod
    def analytic(cls, params: OscillatorParams, t: float) -> "ReferenceOscillator":
        return cls(complex(np.exp(1j * params.omega * t)), t)

    @classmethod
    def simulated(cls, params: OscillatorParams, t: float) -> "ReferenceOscillator":
        """Integrate an undriven channel seeded at phase 0, amplitude 1."""
        bank = OscillatorBank(np.ones(1, dtype=complex), params, 0.0)
        return cls(complex(state_at(bank, None, t)[0]), t)


@dataclass(frozen=True)
class SpikeTrain:
    """Per-channel sorted event times with weights."""

    times: tuple
    weights: tuple
    omega: float = TWO_PI

    def __post_init__(self):
        times = tuple(np.asarray(t, dtype=float) for t in self.times)
        weights = tuple(np.asarray(w, dtype=float) for w in self.weights)
        if len(times) != len(weights):
            raise DimensionError("times and weights disagree on channel count")
        for t, w in zip(times, weights):
            if t.shape != w.shape:
                raise DimensionError("one weight per event required")
            if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0):
                raise ValueError("event times must be non-negative and strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "weights", weights)

    @property
    def channels(self) -> int:
        return len(self.times)

    def padded(self) -> tuple[np.ndarray, np.ndarray]:
        """(channels, max_events) arrays; missing events get time +inf, weight 0."""
        width = max((t.size for t in self.times), default=0)
        times = np.full((self.channels, width), np.inf)
        weights = np.zeros((self.channels, width))
        for k, (t, w) in enumerate(zip(self.times, self.weights)):
            times[k, : t.size] = t
            weights[k, : w.size] = w
        return times, weights

    def to_json(self) -> str:
        return json.dumps(
            {
                "channels": self.channels,
                "omega": self.omega,
                "events": [
                    [[float(t), float(w)] for t, w in zip(ts, ws)]
                    for ts, ws in zip(self.times, self.weights)
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SpikeTrain":
        data = json.loads(text)
        events = data["events"]
        if len(events) != data["channels"]:
            raise DimensionError("channel count does not match event lists")
        times = [np.array([e[0] for e in ch], dtype=float) for ch in events]
        weights = [np.array([e[1] if len(e) > 1 else 1.0 for e in ch], dtype=float) for ch in events]
        return cls(tuple(times), tuple(weights), float(data["omega"]))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    params: OscillatorParams

    def bank(self, index: int = -1) -> OscillatorBank:
        return OscillatorBank(self.states[index], self.params, float(self.times[index]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        n = self.states.shape[1]
        header = ["t"]
        for k in range(n):
            header += [f"re_{k}", f"im_{k}"]
        writer.writerow(header)
        for t, row in zip(self.times, self.states):
            out = [repr(float(t))]
            for z in row:
                out += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(out)
        return buf.getvalue()


# --- spike encoding --------------------------------------------------------


def spike_offsets(phases, omega: float) -> np.ndarray:
    """First firing time in [0, period) for each phase."""
    period = TWO_PI / omega
    offsets = np.mod(-np.asarray(phases, dtype=float), TWO_PI) / omega
    # mod can round up to exactly one period
    return np.where(offsets >= period, 0.0, offsets)


def encode_spikes(phases, params: OscillatorParams, cycles: int, weight: float = 1.0) -> SpikeTrain:
    """One impulse per period per channel, for ``cycles`` periods."""
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    offsets = spike_offsets(phases, params.omega)
    grid = offsets[:, None] + params.period * np.arange(cycles)[None, :]
    w = np.full(cycles, float(weight))
    return SpikeTrain(tuple(grid), tuple(w for _ in range(grid.shape[0])), params.omega)


# --- integration -----------------------------------------------------------


def _check_finite(states):
    if not np.all(np.isfinite(states)):
        raise IntegrationDivergedError("oscillator state became non-finite")


def state_at(bank: OscillatorBank, drive: SpikeTrain | None, t) -> np.ndarray:
    """Exact state at time(s) ``t`` (events at times <= t are included).

    Returns shape (n,) for scalar t or (len(t), n) for a vector of times.
    """
    lam = bank.params.rate
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < bank.t - 1e-15):
        raise ValueError("cannot integrate backwards in time")
    out = bank.states[None, :] * np.exp(lam * (ts[:, None] - bank.t))
    if drive is not None:
        if drive.channels != bank.n:
            raise DimensionError(f"drive has {drive.channels} channels, bank has {bank.n}")
        times, weights = drive.padded()
        live = times >= bank.t
        for i, ti in enumerate(ts):
            mask = live & (times <= ti)
            age = np.where(mask, ti - times, 0.0)
            out[i] += np.sum(np.where(mask, weights * np.exp(lam * age), 0.0), axis=1)
    _check_finite(out)
    return out[0] if np.ndim(t) == 0 else out


def sample_times(bank: OscillatorBank, t_end: float | None = None) -> np.ndarray:
    p = bank.params
    t_end = p.t_end if t_end is None else t_end
    steps = int(round((t_end - bank.t) / p.dt))
    return bank.t + p.dt * np.arange(steps + 1)


def _rk4_poly(x):
    return 1 + x + x**2 / 2 + x**3 / 6 + x**4 / 24


def integrate(
    bank: OscillatorBank,
    drive: SpikeTrain | None = None,
    t_end: float | None = None,
    method: str = "exact",
) -> Trajectory:
    """Solve the driven oscillator ODE, sampling every ``dt``.

    ``method="exact"`` uses the exponential propagator; ``"rk4"`` steps the
    linear ODE with classical RK4 and splits steps at event times.
    """
    times = sample_times(bank, t_end)
    if method == "exact":
        return Trajectory(times, state_at(bank, drive, times), bank.params)
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")

    lam = bank.params.rate
    if drive is not None and drive.channels != bank.n:
        raise DimensionError(f"drive has {drive.channels} channels, bank has {bank.n}")
    ev_t, ev_w = drive.padded() if drive is not None else (np.zeros((bank.n, 0)), np.zeros((bank.n, 0)))
    states = np.empty((times.size, bank.n), dtype=complex)
    z = bank.states.copy()
    # events exactly at the start time count as already applied at sample 0
    start = (ev_t <= times[0]) & (ev_t >= bank.t)
    z = z + np.sum(np.where(start, ev_w, 0.0), axis=1)
    states[0] = z
    for i in range(1, times.size):
        t0, t1 = times[i - 1], times[i]
        h = t1 - t0
        z = z * _rk4_poly(lam * h)
        inside = (ev_t > t0) & (ev_t <= t1)
        if np.any(inside):
            # jump at the event, then RK4 over the remainder of the step
            rem = np.where(inside, t1 - ev_t, 0.0)
            z = z + np.sum(np.where(inside, ev_w * _rk4_poly(lam * rem), 0.0), axis=1)
        states[i] = z
    _check_finite(states)
    return Trajectory(times, states, bank.params)


def integrate_current(
    bank: OscillatorBank,
    current: Callable[[float], np.ndarray | float],
    t_end: float | None = None,
) -> Trajectory:
    """RK4 for a continuous real current I(t) injected into every channel."""
    times = sample_times(bank, t_end)
    lam = bank.params.rate
    h = bank.params.dt
    states = np.empty((times.size, bank.n), dtype=complex)
    z = bank.states.copy()
    states[0] = z

    def f(t, y):
        return lam * y + np.asarray(current(t), dtype=float)

    for i in range(1, times.size):
        t = times[i - 1]
        k1 = f(t, z)
        k2 = f(t + h / 2, z + h / 2 * k1)
        k3 = f(t + h / 2, z + h / 2 * k2)
        k4 = f(t + h, z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i] = z
    _check_finite(states)
    return Trajectory(times, states, bank.params)


def gaussian_pulse(mu: float, sigma: float, amplitude: float = 1.0) -> Callable[[float], float]:
    """Timing pulse exp(-((t - mu) / (2 sigma))^2)."""

    def pulse(t):
        return amplitude * math.exp(-(((t - mu) / (2 * sigma)) ** 2))

    return pulse


def settle(phases, params: OscillatorParams, cycles: int | None = None, weight: float = 1.0) -> np.ndarray:
    """State at ``cycles`` periods of a zero-initialised bank driven by encode_spikes.

    Closed-form geometric sum of the exact propagator; equal to
    ``state_at(OscillatorBank.zeros(n), encode_spikes(...), cycles * period)``
    but vectorised over any array shape.
    """
    if cycles is None:
        cycles = max(1, int(round(params.t_end / params.period)))
    lam = params.rate
    t_end = cycles * params.period
    offsets = spike_offsets(phases, params.omega)
    decay = math.exp(params.b * params.period)
    # e^{i omega T} = 1, so the spike contributions share a phase
    gain = weight * (1 - decay**cycles) / (1 - decay)
    return gain * np.exp(lam * (t_end - (cycles - 1) * params.period - offsets))


def settle_reference(params: OscillatorParams, cycles: int | None = None) -> ReferenceOscillator:
    if cycles is None:
        cycles = max(1, int(round(params.t_end / params.period)))
    t = cycles * params.period
    return ReferenceOscillator(complex(np.exp(params.rate * t)), t)


# --- decoding and oscillator-domain HD ops ---------------------------------


def _unit(z, eps: float = EPS_MAG) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    if np.any(mag < eps):
        raise DegeneratePhaseError(f"{int(np.sum(mag < eps))} state(s) below magnitude {eps:g}")
    return z / mag


def decode_states(states, ref_state: complex, eps: float = EPS_MAG) -> np.ndarray:
    states = np.asarray(states, dtype=complex)
    if np.any(np.abs(states) < eps) or abs(ref_state) < eps:
        raise DegeneratePhaseError("state magnitude below threshold; phase undefined")
    return wrap(np.angle(states) - np.angle(ref_state))


def decode_phase(bank: OscillatorBank, ref: ReferenceOscillator) -> np.ndarray:
    """Phase of each channel relative to the reference oscillator."""
    return decode_states(bank.states, ref.state)


def similarity_states(z0, z1) -> np.ndarray:
    """Superposition similarity on the last axis, states unit-normalised first."""
    u = np.abs(_unit(z0) + _unit(z1)) / 2
    return np.mean(np.cos(2 * np.arccos(np.clip(u, 0.0, 1.0))), axis=-1)


def bind_states(z0, z1, zref, normalize: bool = True):
    if normalize:
        z0, z1, zref = _unit(z0), _unit(z1), _unit(zref)
    return z0 + z0 * (z1 - zref) * np.conj(zref)


def unbind_states(z0, z1, zref, normalize: bool = True):
    if normalize:
        z0, z1, zref = _unit(z0), _unit(z1), _unit(zref)
    return z0 + z0 * np.conj(z1 - zref) * zref


def _check_banks(banks: Sequence[OscillatorBank]):
    if len(banks) == 0:
        raise DimensionError("need at least one bank")
    if len({b.n for b in banks}) != 1:
        raise DimensionError("banks differ in dimension")
    if len({b.params for b in banks}) != 1:
        raise ValueError("banks differ in oscillator parameters")


def osc_similarity(z0: OscillatorBank, z1: OscillatorBank) -> float:
    _check_banks([z0, z1])
    return float(similarity_states(z0.states, z1.states))


def osc_bundle(banks: Sequence[OscillatorBank], eps: float = EPS_MAG) -> OscillatorBank:
    _check_banks(banks)
    out = sum(b.states for b in banks) / len(banks)
    if np.any(np.abs(out) < eps):
        raise DegeneratePhaseError("bundle cancelled to (near) zero")
    return replace(banks[0], states=out)


def osc_bind(z0: OscillatorBank, z1: OscillatorBank, ref: ReferenceOscillator, normalize: bool = True) -> OscillatorBank:
    _check_banks([z0, z1])
    return replace(z0, states=bind_states(z0.states, z1.states, ref.state, normalize))


def osc_unbind(z0: OscillatorBank, z1: OscillatorBank, ref: ReferenceOscillator, normalize: bool = True) -> OscillatorBank:
    _check_banks([z0, z1])
    return replace(z0, states=unbind_states(z0.states, z1.states, ref.state, normalize))


def osc_negate(z: OscillatorBank) -> OscillatorBank:
    return replace(z, states=-z.states)


def conjugate(z: OscillatorBank) -> OscillatorBank:
    return replace(z, states=np.conj(z.states))


def osc_unbundle(z0: OscillatorBank, others: Sequence[OscillatorBank], m: int, eps: float = EPS_MAG) -> OscillatorBank:
    if m != 1 + len(others):
        raise DimensionError(f"m={m} but {len(others)} other bank(s) given")
    _check_banks([z0, *others])
    out = m * z0.states - sum((o.states for o in others), np.zeros_like(z0.states))
    if np.any(np.abs(out) < eps):
        raise DegeneratePhaseError("unbundle cancelled to (near) zero")
    return replace(z0, states=out)


def emit_spikes(traj: Trajectory, eps: float = EPS_MAG) -> SpikeTrain:
    """Output spikes where each channel's arg crosses 0 from below.

    Crossing times are linearly interpolated between samples.  A channel that
    wakes from rest straight onto the positive half-plane (the jump of an
    input impulse) fires at ``t - arg/omega``, and one already on the crossing
    at the first sample fires there.  Channels that stay below
    ``eps`` for a whole period emit nothing and trigger a warning.
    """
    p = traj.params
    arg = np.angle(traj.states)
    mag = np.abs(traj.states)
    active = mag >= eps
    t = traj.times
    steps_per_period = max(1, int(round(p.period / p.dt)))
    times_out, weights_out, silent = [], [], []
    for k in range(traj.states.shape[1]):
        a0, a1 = arg[:-1, k], arg[1:, k]
        on0, on1 = active[:-1, k], active[1:, k]
        rising = on0 & on1 & (a0 < 0) & (a1 >= 0) & (a1 - a0 < math.pi)
        idx = np.nonzero(rising)[0]
        crossings = list(t[idx] + (t[idx + 1] - t[idx]) * (-a0[idx]) / (a1[idx] - a0[idx]))
        wake = np.nonzero(~on0 & on1 & (a1 >= 0) & (a1 <= p.omega * p.dt))[0]
        crossings += list(t[wake + 1] - a1[wake] / p.omega)
        if active[0, k] and 0 <= arg[0, k] < p.omega * p.dt / 2:
            # starts on the crossing
            crossings.append(t[0])
        ev = np.unique(np.asarray(crossings, dtype=float))
        times_out.append(ev)
        weights_out.append(np.ones_like(ev))
        run = np.convolve(~active[:, k], np.ones(steps_per_period, dtype=int), mode="valid")
        if run.size and run.max() >= steps_per_period:
            silent.append(k)
    if silent:
        warnings.warn(f"silent channel(s) with no output spikes: {silent[:10]}", RuntimeWarning, stacklevel=2)
    return SpikeTrain(tuple(times_out), tuple(weights_out), p.omega)
