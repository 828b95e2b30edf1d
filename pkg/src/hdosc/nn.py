"""HD multilayer perceptron with bundling activations and quadrature targets."""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fhrr
from .backends import PhaseBackend
from .errors import DegeneratePhaseError, DimensionError

GRAD_EPS = 1e-6


@dataclass(frozen=True)
class QuadratureTarget:
    phases: np.ndarray
    c: int


@dataclass
class TrainConfig:
    hidden: int = 64
    lr: float = 0.05
    epochs: int = 200


@dataclass
class TrainResult:
    w1: np.ndarray
    w2: np.ndarray
    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)
    skipped: int = 0


def _rows(x, w):
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape[-1] != w.shape[1]:
        raise DimensionError(f"input dimension {x.shape[-1]} vs weight columns {w.shape[1]}")
    return fhrr.to_complex(x) @ w.T


def hd_layer(x, w) -> np.ndarray:
    """Output j = arg(sum_k W[j, k] e^{i x_k}); ``x`` may be batched (..., n)."""
    return fhrr.from_complex(_rows(x, w))


def hd_mlp(x, w1, w2) -> np.ndarray:
    return hd_layer(hd_layer(x, w1), w2)


def quadrature_target(c: int, n_c: int) -> QuadratureTarget:
    if not 0 <= c < n_c:
        raise IndexError(f"class {c} outside [0, {n_c})")
    phases = np.zeros(n_c)
    phases[c] = np.pi / 2
    return QuadratureTarget(phases, c)


def target_matrix(n_c: int) -> np.ndarray:
    return np.eye(n_c) * (np.pi / 2)


def loss(y, target) -> float:
    phases = target.phases if isinstance(target, QuadratureTarget) else target
    return float(1.0 - fhrr.similarity(y, phases))


def predict_class(y) -> int | np.ndarray:
    """Argmax similarity to each class's quadrature target (lowest index on ties)."""
    y = np.asarray(y, dtype=float)
    sims = fhrr.similarity(y[..., None, :], target_matrix(y.shape[-1]))
    return np.argmax(sims, axis=-1)


def init_weights(shape: tuple[int, int], rng) -> np.ndarray:
    m, n = shape
    return rng.normal(0.0, 1.0 / np.sqrt(n), size=(m, n))


def _forward(x, w1, w2):
    u0 = fhrr.to_complex(x)
    s1 = u0 @ w1.T
    h = np.angle(s1)
    u1 = np.exp(1j * h)
    s2 = u1 @ w2.T
    y = np.angle(s2)
    return u0, s1, u1, s2, y


def _back_layer(g, u, s, w):
    """Gradients of a weighted-bundle layer given dL/d(output phase) ``g``."""
    mag = np.abs(s)
    q = np.where(mag < GRAD_EPS, 0.0, g / np.where(mag < GRAD_EPS, 1.0, s))
    gw = np.imag(q.T @ u)
    gx = np.real(u * (q @ w))
    return gw, gx


def loss_and_grad(x, labels, w1, w2):
    """Mean loss over a batch and its analytic gradients w.r.t. both layers."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    labels = np.atleast_1d(labels)
    n_c = w2.shape[0]
    t = target_matrix(n_c)[labels]
    u0, s1, u1, s2, y = _forward(x, w1, w2)
    diff = y - t
    per_sample = 1.0 - np.mean(np.cos(diff), axis=1)
    batch = x.shape[0]
    g_y = np.sin(diff) / (n_c * batch)
    g_w2, g_h = _back_layer(g_y, u1, s2, w2)
    g_w1, _ = _back_layer(g_h, u0, s1, w1)
    return float(per_sample.mean()), g_w1, g_w2


def _usable(x, w1, w2):
    s1 = fhrr.to_complex(x) @ w1.T
    ok = np.all(np.abs(s1) >= fhrr.EPS_MAG, axis=1)
    s2 = np.exp(1j * np.angle(s1)) @ w2.T
    return ok & np.all(np.abs(s2) >= fhrr.EPS_MAG, axis=1)


def accuracy(x, labels, w1, w2, backend=None) -> float:
    return float(np.mean(forward_classes(x, w1, w2, backend) == np.asarray(labels)))


def forward_classes(x, w1, w2, backend=None) -> np.ndarray:
    backend = backend or PhaseBackend()
    h = backend.linear(backend.encode(x), w1)
    y = backend.decode(backend.linear(h, w2))
    return predict_class(y)


def train(x, labels, n_classes: int, config: TrainConfig, seed: fhrr.SeedLike = None) -> TrainResult:
    """Full-batch gradient descent on the mean similarity loss."""
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 2:
        raise ValueError("training needs at least two classes")
    rng = fhrr.make_rng(seed)
    w1 = init_weights((config.hidden, x.shape[1]), rng)
    w2 = init_weights((n_classes, config.hidden), rng)
    result = TrainResult(w1, w2)
    for _ in range(config.epochs + 1):
        ok = _usable(x, w1, w2)
        if not ok.any():
            raise DegeneratePhaseError("every sample in the batch is degenerate")
        if not ok.all():
            warnings.warn(f"skipping {int((~ok).sum())} degenerate sample(s)", RuntimeWarning, stacklevel=2)
            result.skipped += int((~ok).sum())
        value, g1, g2 = loss_and_grad(x[ok], labels[ok], w1, w2)
        result.loss.append(value)
        result.accuracy.append(accuracy(x[ok], labels[ok], w1, w2))
        if len(result.loss) > config.epochs:
            break
        w1 = w1 - config.lr * g1
        w2 = w2 - config.lr * g2
    result.w1, result.w2 = w1, w2
    return result


def synthetic_task(n_train: int = 600, n_test: int = 300, dim: int = 8, n_classes: int = 3, sigma: float = 0.5, seed: fhrr.SeedLike = None):
    """Noisy quadrature prototypes: class k has phase pi/2 where index % n_classes == k."""
    rng = fhrr.make_rng(seed)
    protos = np.where(np.arange(dim)[None, :] % n_classes == np.arange(n_classes)[:, None], np.pi / 2, 0.0)

    def draw(n):
        y = rng.integers(0, n_classes, size=n)
        x = fhrr.wrap(protos[y] + rng.normal(0.0, sigma, size=(n, dim)))
        return x, y

    return draw(n_train), draw(n_test)


# --- weight files -----------------------------------------------------------


def weights_to_bytes(w1, w2, header: dict | None = None) -> bytes:
    """u32 LE header length, UTF-8 JSON header, then float64 LE W1 and W2."""
    meta = dict(header or {})
    meta["shapes"] = [list(w1.shape), list(w2.shape)]
    blob = json.dumps(meta, sort_keys=True).encode()
    payload = np.concatenate([np.ravel(w1), np.ravel(w2)]).astype("<f8").tobytes()
    return struct.pack("<I", len(blob)) + blob + payload


def weights_from_bytes(data: bytes):
    (size,) = struct.unpack_from("<I", data)
    meta = json.loads(data[4 : 4 + size])
    flat = np.frombuffer(data, dtype="<f8", offset=4 + size).astype(float)
    (a, b), (c, d) = meta["shapes"]
    if flat.size != a * b + c * d:
        raise ValueError("weight payload does not match header shapes")
    return flat[: a * b].reshape(a, b), flat[a * b :].reshape(c, d), meta


def save_weights(path, w1, w2, header: dict | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(weights_to_bytes(w1, w2, header))


def load_weights(path):
    with open(path, "rb") as fh:
        return weights_from_bytes(fh.read())


