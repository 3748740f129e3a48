"""Loss, exact gradients, AdamW, and the two-stage train/deploy loop.

Loss is a cross-entropy over normalized received powers,

    p_k = (|y_k|^2 + eps) / sum_i (|y_i|^2 + eps),   loss = -ln p_label,

which is invariant to uniform power scaling, matching the argmax readout.

The backward pass is reverse-mode through the cached fields. Adjoint
convention: for every complex intermediate v we carry a_v defined by
d(loss) = 2 Re{ a_v^H dv }. From d|y_k|^2 = 2 Re{ conj(y_k) dy_k }:

    a_y,k   = (dloss/d|y_k|^2) y_k,  dloss/d|y_k|^2 = 1/S - 1{k=label}/(|y_label|^2+eps)
    a_uL    = H^H a_y
    theta:    dloss/dtheta_m = 2 Re{ conj(a_u,m) j e^{j theta_m} t_m }
    digital:  (d/dRe + j d/dIm) w_m = 2 a_u,m conj(t_m)
    a_t     = conj(response) * a_u,   a_u(lower) = W^H a_t

The sampled noise is treated as an additive constant. Every formula below
is gate-checked against central finite differences in the test suite.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelState
from .data import EncodedDataset
from .errors import ConfigurationError, ShapeError
from .geometry import SimGeometry
from .network import (
    SIM,
    DigitalParams,
    ForwardCache,
    PhaseParams,
    classify_batch,
    forward_batch,
    init_params,
)
from .propagation import Propagation, build_propagation
from . import seeding


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 60
    batch_size: int = 64
    learning_rate: float = 0.01
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    sample_rate: float = 0.10
    master_seed: int = 0
    train_noise: bool = True
    softmax_epsilon: float = 1e-12

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.sample_rate <= 1.0:
            raise ConfigurationError(f"sample_rate must be in (0, 1], got {self.sample_rate}")
        if self.learning_rate <= 0.0:
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")


def loss(y: np.ndarray, label: int, eps: float = 1e-12) -> float:
    """Normalized-power cross-entropy of one received vector."""
    if not 0 <= label < y.shape[0]:
        raise ShapeError(f"label {label} outside the {y.shape[0]} receive antennas")
    q = np.abs(y) ** 2 + eps
    return float(-np.log(q[label] / q.sum()))


def _power_grad(y: np.ndarray, labels: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample losses and dloss/d|y_k|^2 for a (K, B) batch."""
    q = np.abs(y) ** 2 + eps
    s = q.sum(axis=0)
    cols = np.arange(y.shape[1])
    losses = -np.log(q[labels, cols] / s)
    g = np.full_like(q, 1.0) / s
    g[labels, cols] -= 1.0 / q[labels, cols]
    return losses, g


def backward_batch(
    cache: ForwardCache,
    params: PhaseParams | DigitalParams,
    propagation: Propagation,
    h_matrix: np.ndarray,
    y: np.ndarray,
    labels: np.ndarray,
    eps: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample losses and the batch-mean parameter gradient.

    Returns (losses (B,), grad) with grad shaped like theta for the
    metasurface model and like the complex weights for the digital one.
    """
    resp = params.layer_responses()
    n_layers, m = resp.shape
    if cache.u.shape[:2] != (n_layers + 1, m):
        raise ShapeError(f"cache shape {cache.u.shape} does not match ({n_layers + 1}, {m}, B)")
    batch = y.shape[1]
    losses, g = _power_grad(y, labels, eps)
    a_u = h_matrix.conj().T @ (g * y)
    if params.kind == SIM:
        grad = np.empty((n_layers, m), dtype=np.float64)
    else:
        grad = np.empty((n_layers, m), dtype=np.complex128)
    for l in range(n_layers, 0, -1):
        t = cache.t[l - 1]
        if params.kind == SIM:
            grad[l - 1] = (
                2.0 * np.real(np.conj(a_u) * (1j * resp[l - 1][:, None]) * t).sum(axis=1) / batch
            )
        else:
            grad[l - 1] = 2.0 * (a_u * np.conj(t)).sum(axis=1) / batch
        a_t = np.conj(resp[l - 1])[:, None] * a_u
        a_u = propagation.w_matrix.conj().T @ a_t
    return losses, grad


def backward(
    cache: ForwardCache,
    params: PhaseParams | DigitalParams,
    propagation: Propagation,
    h_matrix: np.ndarray,
    y: np.ndarray,
    label: int,
    eps: float = 1e-12,
) -> np.ndarray:
    """Single-patch gradient of the loss with respect to the parameters."""
    batched = ForwardCache(u=cache.u[:, :, None], t=cache.t[:, :, None], z=cache.z[:, None])
    _, grad = backward_batch(
        batched, params, propagation, h_matrix, y[:, None], np.array([label]), eps
    )
    return grad


@dataclass
class OptimizerState:
    """AdamW first/second moment accumulators over the real parameter view."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def for_params(cls, params: PhaseParams | DigitalParams) -> "OptimizerState":
        values = _real_view(params)
        return cls(m=np.zeros_like(values), v=np.zeros_like(values))


def _real_view(params: PhaseParams | DigitalParams) -> np.ndarray:
    """Writable float64 view: theta directly, or interleaved re/im pairs."""
    if params.kind == SIM:
        return params.theta
    return params.weights.view(np.float64)


def _grad_real_view(grad: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(grad):
        return grad.view(np.float64)
    return grad


def adamw_step(
    params: PhaseParams | DigitalParams,
    grad: np.ndarray,
    state: OptimizerState,
    cfg: TrainConfig,
) -> OptimizerState:
    """One decoupled-weight-decay Adam update, in place on the parameters."""
    values = _real_view(params)
    g = _grad_real_view(grad)
    if g.shape != values.shape:
        raise ShapeError(f"gradient shape {g.shape} != parameter shape {values.shape}")
    state.step += 1
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    m_hat = state.m / (1.0 - cfg.beta1 ** state.step)
    v_hat = state.v / (1.0 - cfg.beta2 ** state.step)
    values -= cfg.learning_rate * (m_hat / (np.sqrt(v_hat) + cfg.eps) + cfg.weight_decay * values)
    return state


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def _noise_streams(cfg: TrainConfig, purpose: int, indices, *path) -> list[np.random.Generator]:
    return [seeding.stream(cfg.master_seed, purpose, *path, int(j)) for j in indices]


def train(
    dataset: EncodedDataset,
    geometry: SimGeometry,
    channel: ChannelState,
    cfg: TrainConfig,
    kind: str = SIM,
) -> tuple[PhaseParams | DigitalParams, list[EpochStats]]:
    """Stage 1: sample a training split and fit the layer parameters.

    Deterministic given cfg.master_seed: the split, epoch shuffles, noise
    draws, and init all come from derived streams keyed by stable patch
    indices, so batch-level parallelism cannot change the result.
    """
    cfg.validate()
    n_total = len(dataset)
    if n_total == 0:
        raise ConfigurationError("dataset is empty")
    n_train = math.ceil(cfg.sample_rate * n_total)
    picker = seeding.stream(cfg.master_seed, seeding.SAMPLE)
    train_idx = np.sort(picker.choice(n_total, size=n_train, replace=False))
    train_labels = dataset.labels[train_idx]
    if (train_labels < 0).any():
        raise ConfigurationError("training split contains unlabeled patches")
    if np.unique(train_labels).size < 2:
        raise ConfigurationError(
            "training split covers fewer than two classes; enlarge the sample or reseed"
        )

    params = init_params(geometry, kind, seeding.stream(cfg.master_seed, seeding.PARAM_INIT))
    state = OptimizerState.for_params(params)
    prop = build_propagation(geometry)
    history: list[EpochStats] = []
    for epoch in range(1, cfg.epochs + 1):
        order = seeding.stream(cfg.master_seed, seeding.SHUFFLE, epoch).permutation(n_train)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n_train, cfg.batch_size):
            batch_idx = train_idx[order[start : start + cfg.batch_size]]
            feats = dataset.features[batch_idx].T
            labels = dataset.labels[batch_idx]
            rngs = None
            if cfg.train_noise:
                rngs = _noise_streams(cfg, seeding.TRAIN_NOISE, batch_idx, epoch)
            y, cache = forward_batch(
                params, feats, prop, channel.realization, channel.tx_amplitude, rngs
            )
            losses, grad = backward_batch(
                cache, params, prop, channel.realization.h_matrix, y, labels, cfg.softmax_epsilon
            )
            epoch_loss += float(losses.sum())
            epoch_correct += int((classify_batch(y) == labels).sum())
            state = adamw_step(params, grad, state, cfg)
        history.append(
            EpochStats(epoch=epoch, loss=epoch_loss / n_train, accuracy=epoch_correct / n_train)
        )
    return params, history


def predict(
    params: PhaseParams | DigitalParams,
    dataset: EncodedDataset,
    geometry: SimGeometry,
    channel: ChannelState,
    cfg: TrainConfig,
    batch_size: int = 256,
) -> np.ndarray:
    """Stage 2: classify every patch with fresh evaluation-noise draws."""
    prop = build_propagation(geometry)
    preds = np.empty(len(dataset), dtype=np.int64)
    for start in range(0, len(dataset), batch_size):
        idx = np.arange(start, min(start + batch_size, len(dataset)))
        rngs = _noise_streams(cfg, seeding.EVAL_NOISE, idx)
        y, _ = forward_batch(
            params, dataset.features[idx].T, prop, channel.realization, channel.tx_amplitude, rngs
        )
        preds[idx] = classify_batch(y)
    return preds


def evaluate(
    params: PhaseParams | DigitalParams,
    dataset: EncodedDataset,
    geometry: SimGeometry,
    channel: ChannelState,
    cfg: TrainConfig,
):
    """Predictions plus the metrics bundle over a labeled dataset."""
    from .metrics import compute_metrics

    preds = predict(params, dataset, geometry, channel, cfg)
    return preds, compute_metrics(preds, dataset.labels, num_classes=channel.cfg.num_rx_antennas)


def save_history(path: str, history: list[EpochStats]) -> None:
    with open(path, "w") as fh:
        for row in history:
            fh.write(f"{row.epoch} {row.loss:.10f} {row.accuracy:.6f}\n")
