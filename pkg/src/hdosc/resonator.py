"""Resonator-network factorisation of bound composite symbols."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import fhrr
from .backends import PhaseBackend
from .errors import DimensionError


@dataclass(frozen=True)
class FactorProblem:
    factor_sets: tuple  # F arrays of shape (K, d)
    composite: np.ndarray
    truth: tuple = ()

    @classmethod
    def random(cls, n_factors: int, k: int, d: int, seed: fhrr.SeedLike = None) -> "FactorProblem":
        rngs = fhrr.spawn(seed, n_factors + 1)
        sets = tuple(fhrr.random_codebook(k, d, r) for r in rngs[:n_factors])
        truth = tuple(int(i) for i in rngs[-1].integers(0, k, size=n_factors))
        return cls(sets, compose(sets, truth), truth)


@dataclass
class ResonatorState:
    guesses: list
    iteration: int = 0


@dataclass
class ResonatorResult:
    indices: list
    iterations: int
    reconstruction: list = field(default_factory=list)  # sim(reconstruction, composite)
    factor: list = field(default_factory=list)  # mean sim(guess_f, true factor)
    non_factor: list = field(default_factory=list)  # mean sim(guess_f, other codebook entries)
    ties: list = field(default_factory=list)  # iterations where an argmax tie was broken


def compose(factor_sets, indices) -> np.ndarray:
    """Left-fold of bind over the selected codebook entries."""
    if len(indices) != len(factor_sets):
        raise DimensionError("need one index per factor set")
    picked = []
    for cb, i in zip(factor_sets, indices):
        if not 0 <= i < len(cb):
            raise IndexError(f"index {i} outside codebook of size {len(cb)}")
        picked.append(cb[i])
    return reduce(fhrr.bind, picked)


def _argmax(sims) -> tuple[int, bool]:
    best = int(np.argmax(sims))  # lowest index on ties
    return best, bool(np.sum(sims == sims[best]) > 1)


def resonator_factor(
    composite,
    factor_sets,
    max_iter: int = 20,
    backend=None,
    truth=None,
    initial=None,
    early_exit: bool = True,
    readout: str = "abs",
) -> ResonatorResult:
    """Iteratively refine one superposed guess per codebook.

    Updates are synchronous: every new guess is computed from the previous
    iteration's guesses.  ``truth`` only feeds the diagnostic traces.

    With real similarity weights the network has equivalent fixed points in
    which an even number of guesses sit at pi-shifted codebook entries (their
    shifts cancel under binding).  ``readout="abs"`` ranks candidates by
    |similarity| so those solutions decode correctly; ``"signed"`` uses the
    plain argmax.
    """
    if readout not in ("abs", "signed"):
        raise ValueError(f"unknown readout {readout!r}")
    backend = backend or PhaseBackend()
    n_f = len(factor_sets)
    if n_f < 2:
        raise DimensionError("need at least two factor sets")
    d = np.shape(composite)[-1]
    if any(np.shape(cb)[-1] != d for cb in factor_sets):
        raise DimensionError("all codebooks must match the composite dimension")

    books = [backend.encode(np.asarray(cb)) for cb in factor_sets]
    target = backend.encode(composite)
    if initial is None:
        guesses = [backend.bundle(list(b)) for b in books]
    else:
        guesses = [backend.encode(g) for g in initial]
    state = ResonatorState(guesses)
    result = ResonatorResult([], 0)
    prev, stable = None, 0

    for it in range(max_iter):
        new = []
        for f in range(n_f):
            others = [state.guesses[g] for g in range(n_f) if g != f]
            estimate = reduce(backend.unbind, others, target)
            weights = backend.similarity(books[f], estimate[None, :])
            new.append(backend.weighted_bundle(books[f], weights))
        state = ResonatorState(new, it + 1)

        recon = reduce(backend.bind, state.guesses)
        result.reconstruction.append(float(backend.similarity(recon, target)))
        indices, tie_now = [], False
        fac, non = [], []
        for f in range(n_f):
            sims = np.asarray(backend.similarity(books[f], state.guesses[f][None, :]))
            if readout == "abs":
                sims = np.abs(sims)
            idx, tie = _argmax(sims)
            indices.append(idx)
            tie_now |= tie
            if truth is not None:
                fac.append(sims[truth[f]])
                non.append(np.delete(sims, truth[f]).mean() if sims.size > 1 else np.nan)
        if tie_now:
            result.ties.append(it + 1)
        if truth is not None:
            result.factor.append(float(np.mean(fac)))
            result.non_factor.append(float(np.mean(non)))
        result.indices = indices
        result.iterations = it + 1

        stable = stable + 1 if indices == prev else 0
        prev = indices
        if early_exit and stable >= 2:
            break
    return result
