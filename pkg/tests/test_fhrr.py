import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hdosc import fhrr
from hdosc.errors import DegeneratePhaseError, DimensionError

from conftest import angdiff

PI = np.pi

angles = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)


def phase_arrays(n=16):
    return arrays(float, n, elements=angles)


# Monte-Carlo oracle, independent of hdosc: the mean cosine of n uniform
# phase differences has variance E[cos^2]/n = 1/(2n).  Established with
# 4000 plain-numpy pairs at n=1024: empirical std 0.02204 vs 1/sqrt(2048)
# = 0.02210, and no draw beyond 4/sqrt(2n).
N = 1024
BOUND = 4 / np.sqrt(2 * N)


def test_montecarlo_oracle_spread():
    gen = np.random.default_rng(99)
    d = gen.uniform(0, 2 * PI, size=(2000, N)) - gen.uniform(0, 2 * PI, size=(2000, N))
    sims = np.cos(d).mean(axis=1)
    assert abs(sims.std() - 1 / np.sqrt(2 * N)) < 0.002
    assert np.mean(np.abs(sims) < BOUND) >= 0.999


class TestRandomSymbol:
    def test_deterministic(self):
        assert np.array_equal(fhrr.random_symbol(4, 7), fhrr.random_symbol(4, 7))

    def test_seeds_differ(self):
        assert not np.array_equal(fhrr.random_symbol(4, 7), fhrr.random_symbol(4, 8))

    def test_zero_dim(self):
        with pytest.raises(DimensionError):
            fhrr.random_symbol(0, 1)

    def test_range_and_uniformity(self):
        s = fhrr.random_symbol(200_000, 3)
        assert np.all(s > -PI) and np.all(s <= PI)
        hist, _ = np.histogram(s, bins=8, range=(-PI, PI))
        assert np.all(np.abs(hist / s.size - 1 / 8) < 0.005)

    def test_quasi_orthogonality(self):
        rngs = fhrr.spawn(2024, 1000)
        sims = np.array([fhrr.similarity(fhrr.random_symbol(N, r), fhrr.random_symbol(N, r)) for r in rngs])
        assert np.mean(np.abs(sims) < BOUND) >= 0.99
        assert abs(np.mean(1 - sims) - 1) < BOUND

    def test_spawn_independent_streams(self):
        a, b = fhrr.spawn(5, 2)
        assert abs(fhrr.similarity(fhrr.random_symbol(N, a), fhrr.random_symbol(N, b))) < BOUND
        c, _ = fhrr.spawn(5, 2)
        assert np.array_equal(fhrr.random_symbol(8, c), fhrr.random_symbol(8, fhrr.spawn(5, 2)[0]))


class TestSimilarity:
    def test_identity(self):
        phi = fhrr.random_symbol(64, 0)
        assert fhrr.similarity(phi, phi) == pytest.approx(1.0)
        assert fhrr.distance(phi, phi) == pytest.approx(0.0)

    def test_antiphase(self):
        phi = fhrr.random_symbol(64, 0)
        opp = fhrr.wrap(phi + PI)
        assert fhrr.similarity(phi, opp) == pytest.approx(-1.0)
        assert fhrr.distance(phi, opp) == pytest.approx(2.0)

    def test_two_element_case(self):
        assert fhrr.similarity([0, PI / 2], [0, -PI / 2]) == pytest.approx(0.0, abs=1e-15)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            fhrr.similarity(np.zeros(3), np.zeros(4))

    @given(phase_arrays(), phase_arrays())
    def test_symmetric_and_bounded(self, a, b):
        s = fhrr.similarity(a, b)
        assert s == pytest.approx(fhrr.similarity(b, a), abs=1e-12)
        assert -1 - 1e-12 <= s <= 1 + 1e-12
        assert 0 - 1e-12 <= fhrr.distance(a, b) <= 2 + 1e-12

    def test_stacked(self):
        cb = fhrr.random_codebook(5, 32, 1)
        sims = fhrr.similarity(cb, cb[2])
        assert sims.shape == (5,)
        assert sims[2] == pytest.approx(1.0)


class TestBundle:
    def test_single_identity(self):
        phi = fhrr.random_symbol(32, 1)
        assert np.allclose(fhrr.bundle([phi]), phi, atol=1e-12)

    def test_duplicates(self):
        phi = fhrr.random_symbol(32, 1)
        assert np.allclose(angdiff(fhrr.bundle([phi, phi]), phi), 0, atol=1e-12)

    def test_bisector(self):
        assert fhrr.bundle([[0.0], [PI / 2]])[0] == pytest.approx(PI / 4)

    def test_empty(self):
        with pytest.raises(DimensionError):
            fhrr.bundle([])

    def test_mixed_dims(self):
        with pytest.raises(DimensionError):
            fhrr.bundle([np.zeros(3), np.zeros(4)])

    def test_degenerate_antiphase(self):
        with pytest.raises(DegeneratePhaseError):
            fhrr.bundle([[0.0], [PI]])

    @given(st.lists(phase_arrays(8), min_size=1, max_size=6), st.randoms())
    def test_order_invariant(self, items, rnd):
        try:
            ref = fhrr.bundle(items)
        except DegeneratePhaseError:
            return
        shuffled = list(items)
        rnd.shuffle(shuffled)
        assert np.allclose(angdiff(fhrr.bundle(shuffled), ref), 0, atol=1e-9)

    def test_similarity_dominance(self):
        rngs = fhrr.spawn(77, 200)
        wins = 0
        total = 0
        for r in rngs:
            m = int(r.integers(2, 11))
            items = fhrr.random_codebook(m, N, r)
            probe = fhrr.random_symbol(N, r)
            out = fhrr.bundle(list(items))
            for s in items:
                total += 1
                wins += fhrr.similarity(out, s) > fhrr.similarity(probe, s)
        assert wins / total >= 0.99

    def test_weighted_bundle(self):
        # negative weight flips the phasor
        assert fhrr.weighted_bundle(np.array([[0.0]]), [-1.0])[0] == pytest.approx(PI)
        cb = fhrr.random_codebook(3, 16, 2)
        assert np.allclose(fhrr.weighted_bundle(cb, [1, 1, 1]), fhrr.bundle(list(cb)))
        assert np.allclose(fhrr.weighted_bundle(cb, [2, 0, 0]), cb[0])


class TestUnbundle:
    def test_trivial(self):
        phi = fhrr.random_symbol(16, 3)
        assert np.allclose(fhrr.unbundle(phi, [], 1), phi)

    def test_matches_complex_oracle(self):
        a, b, c = fhrr.random_codebook(3, N, 4)
        s = np.exp(1j * a) + np.exp(1j * b) + np.exp(1j * c)
        expected = np.angle(3 * s / np.abs(s) - np.exp(1j * b) - np.exp(1j * c))
        got = fhrr.unbundle(fhrr.bundle([a, b, c]), [b, c], 3)
        assert np.allclose(angdiff(got, expected), 0, atol=1e-12)

    def test_moves_toward_removed_input(self):
        # arg() drops the bundle's magnitude, so the inverse is approximate:
        # the result is closer to a than the bundle, but not equal to it
        rngs = fhrr.spawn(8, 20)
        for r in rngs:
            a, b, c = fhrr.random_codebook(3, N, r)
            out = fhrr.unbundle(fhrr.bundle([a, b, c]), [b, c], 3)
            assert fhrr.similarity(out, a) > fhrr.similarity(fhrr.bundle([a, b, c]), a) + 0.1
            assert fhrr.similarity(out, a) > fhrr.similarity(out, b)

    def test_exact_when_inputs_aligned(self):
        a = fhrr.random_symbol(32, 5)
        assert np.allclose(angdiff(fhrr.unbundle(fhrr.bundle([a, a]), [a], 2), a), 0, atol=1e-12)

    def test_count_mismatch(self):
        with pytest.raises(DimensionError):
            fhrr.unbundle(np.zeros(3), [np.zeros(3)], 3)


class TestBind:
    def test_identity(self):
        phi = fhrr.random_symbol(16, 1)
        assert np.array_equal(fhrr.bind(phi, fhrr.zero_symbol(16)), phi)

    def test_wrap(self):
        assert fhrr.bind([PI / 2], [3 * PI / 4])[0] == pytest.approx(-3 * PI / 4)
        assert fhrr.unbind([-3 * PI / 4], [3 * PI / 4])[0] == pytest.approx(PI / 2)

    def test_self_unbind(self):
        phi = fhrr.random_symbol(16, 1)
        assert np.allclose(fhrr.unbind(phi, phi), 0)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            fhrr.bind(np.zeros(2), np.zeros(3))
        with pytest.raises(DimensionError):
            fhrr.unbind(np.zeros(2), np.zeros(3))

    @given(phase_arrays(), phase_arrays(), phase_arrays())
    def test_shift_invariance(self, a, b, c):
        lhs = fhrr.similarity(fhrr.bind(a, c), fhrr.bind(b, c))
        assert lhs == pytest.approx(fhrr.similarity(a, b), abs=1e-12)

    @given(phase_arrays(), phase_arrays())
    def test_commutes_and_inverts(self, a, b):
        assert np.allclose(angdiff(fhrr.bind(a, b), fhrr.bind(b, a)), 0, atol=1e-12)
        assert np.allclose(angdiff(fhrr.unbind(fhrr.bind(a, b), b), a), 0, atol=1e-12)

    def test_argmax_isometry(self):
        cb = fhrr.random_codebook(30, 256, 11)
        a = fhrr.random_symbol(256, 12)
        c = fhrr.random_symbol(256, 13)
        plain = np.argmax(fhrr.similarity(cb, a))
        bound = np.argmax(fhrr.similarity(fhrr.bind(cb, c), fhrr.bind(a, c)))
        assert plain == bound


@given(phase_arrays(32))
def test_wrap_canonical(x):
    w = fhrr.wrap(x)
    assert np.all(w > -PI) and np.all(w <= PI)
    assert np.allclose(np.exp(1j * w), np.exp(1j * x), atol=1e-9)


def test_wrap_endpoints():
    assert fhrr.wrap(PI) == PI
    assert fhrr.wrap(-PI) == PI
    assert fhrr.wrap(0.0) == 0.0


class TestSerialization:
    def test_binary_roundtrip(self):
        s = fhrr.random_symbol(10, 1)
        data = fhrr.to_bytes(s)
        assert len(data) == 4 + 80
        assert data[:4] == (10).to_bytes(4, "little")
        assert np.array_equal(fhrr.from_bytes(data), s)

    def test_binary_layout_is_little_endian(self):
        data = fhrr.to_bytes(np.array([1.0]))
        assert data == b"\x01\x00\x00\x00" + b"\x00\x00\x00\x00\x00\x00\xf0\x3f"

    def test_truncated(self):
        with pytest.raises(ValueError):
            fhrr.from_bytes(fhrr.to_bytes(np.zeros(3))[:-1])

    def test_json_roundtrip(self):
        s = fhrr.random_symbol(5, 2)
        text = fhrr.to_json(s)
        assert isinstance(json.loads(text), list)
        assert np.array_equal(fhrr.from_json(text), s)
