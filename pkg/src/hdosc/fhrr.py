"""Phase-domain FHRR algebra.

A symbol is a 1-D float array of angles in the canonical range (-pi, pi].
Every operation accepts stacked symbols (leading axes) where that makes sense,
so a codebook is simply a ``(K, n)`` array.
"""

from __future__ import annotations

import json
import struct
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DegeneratePhaseError, DimensionError

PhaseSymbol = np.ndarray

EPS_MAG = 1e-12

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Counter-based (Philox) generator; identical streams on every platform."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn(seed: SeedLike, n: int) -> list[np.random.Generator]:
    """Split ``seed`` into ``n`` independent generators."""
    if isinstance(seed, np.random.Generator):
        children = seed.bit_generator.seed_seq.spawn(n)
    elif isinstance(seed, np.random.SeedSequence):
        children = seed.spawn(n)
    else:
        children = np.random.SeedSequence(seed).spawn(n)
    return [make_rng(c) for c in children]


def wrap(phases) -> np.ndarray:
    """Map angles onto (-pi, pi]."""
    phases = np.asarray(phases, dtype=float)
    return np.pi - np.mod(np.pi - phases, 2 * np.pi)


def to_complex(phases) -> np.ndarray:
    return np.exp(1j * np.asarray(phases, dtype=float))


def from_complex(z, eps: float = EPS_MAG) -> np.ndarray:
    """Angles of complex values; raises if any magnitude is below ``eps``."""
    z = np.asarray(z)
    if np.any(np.abs(z) < eps):
        raise DegeneratePhaseError(
            f"{int(np.sum(np.abs(z) < eps))} element(s) with magnitude below {eps:g}"
        )
    return wrap(np.angle(z))


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1:] != b.shape[-1:]:
        raise DimensionError(f"dimension mismatch: {a.shape[-1:]} vs {b.shape[-1:]}")
    return a, b


def _stack(inputs: Sequence) -> np.ndarray:
    if len(inputs) == 0:
        raise DimensionError("cannot bundle an empty list of symbols")
    dims = {np.shape(x)[-1] for x in inputs}
    if len(dims) != 1:
        raise DimensionError(f"mixed dimensionalities in bundle: {sorted(dims)}")
    return np.stack([np.asarray(x, dtype=float) for x in inputs])


def random_symbol(n: int, seed: SeedLike = None) -> PhaseSymbol:
    """``n`` i.i.d. phases uniform on the circle."""
    if n < 1:
        raise DimensionError("symbol dimension must be >= 1")
    rng = make_rng(seed)
    return wrap(rng.uniform(-np.pi, np.pi, size=n))


def random_codebook(k: int, n: int, seed: SeedLike = None) -> np.ndarray:
    if n < 1 or k < 1:
        raise DimensionError("codebook needs k >= 1 symbols of dimension >= 1")
    rng = make_rng(seed)
    return wrap(rng.uniform(-np.pi, np.pi, size=(k, n)))


def similarity(a, b):
    """Mean cosine of elementwise phase differences, in [-1, 1]."""
    a, b = _check_pair(a, b)
    if a.shape[-1] == 0:
        raise DimensionError("empty symbols")
    return np.mean(np.cos(a - b), axis=-1)


def distance(a, b):
    return 1.0 - similarity(a, b)


def bundle(inputs: Sequence) -> PhaseSymbol:
    """Superpose symbols: elementwise arg of the sum of unit phasors."""
    stacked = _stack(inputs)
    return from_complex(np.sum(to_complex(stacked), axis=0))


def weighted_bundle(inputs, weights) -> PhaseSymbol:
    """arg(sum_k w_k e^{i phi_k}); negative weights flip the phasor.

    ``inputs`` may be a list of symbols or a ``(K, n)`` array.
    """
    stacked = _stack(list(inputs)) if not isinstance(inputs, np.ndarray) else inputs
    weights = np.asarray(weights, dtype=float)
    if stacked.ndim != 2 or weights.shape != (stacked.shape[0],):
        raise DimensionError("need one weight per input symbol")
    return from_complex(weights @ to_complex(stacked))


def unbundle(bundled, others: Sequence, m: int) -> PhaseSymbol:
    """Remove ``others`` from an ``m``-way bundle.

    arg(m e^{i phi'} - sum_k e^{i phi_k}); exact for m = 2, and for larger m
    whenever the magnitude of the original complex sum was close to m.
    """
    bundled = np.asarray(bundled, dtype=float)
    if m != 1 + len(others):
        raise DimensionError(f"m={m} but {len(others)} other symbol(s) given")
    total = m * to_complex(bundled)
    if others:
        stacked = _stack(others)
        _check_pair(bundled, stacked[0])
        total = total - np.sum(to_complex(stacked), axis=0)
    return from_complex(total)


def bind(a, b) -> PhaseSymbol:
    a, b = _check_pair(a, b)
    return wrap(a + b)


def unbind(c, b) -> PhaseSymbol:
    c, b = _check_pair(c, b)
    return wrap(c - b)


def zero_symbol(n: int) -> PhaseSymbol:
    return np.zeros(n)


# --- serialization -------------------------------------------------------


def to_bytes(sym) -> bytes:
    """u32 LE dimension followed by float64 LE radians."""
    sym = np.asarray(sym, dtype="<f8")
    if sym.ndim != 1:
        raise DimensionError("only single symbols serialize to the flat record")
    return struct.pack("<I", sym.shape[0]) + sym.tobytes()


def from_bytes(data: bytes) -> PhaseSymbol:
    if len(data) < 4:
        raise ValueError("truncated symbol record")
    (n,) = struct.unpack_from("<I", data)
    if len(data) != 4 + 8 * n:
        raise ValueError(f"record length {len(data)} does not match dimension {n}")
    return np.frombuffer(data, dtype="<f8", offset=4).astype(float)


def to_json(sym) -> str:
    return json.dumps([float(x) for x in np.asarray(sym, dtype=float)])


def from_json(text: str | Iterable[float]) -> PhaseSymbol:
    values = json.loads(text) if isinstance(text, str) else list(text)
    return np.asarray(values, dtype=float)
