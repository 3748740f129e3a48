"""Forward model of the stacked-metasurface classifier.

A patch's feature vector sits on the diagonal of layer 0; the wave then
alternates fixed free-space coupling with element-wise trainable layer
responses (unit-modulus phasors for the metasurface, unconstrained complex
weights for the digital baseline), crosses the downlink channel, and is
classified by the receive antenna with the highest power.

Everything here is linear in the input field, so the whole pass equals a
single dense matrix product; the cached layer-by-layer path exists because
the backward pass consumes the intermediate fields.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, add_awgn
from .errors import EncodingError, FormatError, ShapeError
from .geometry import SimGeometry
from .propagation import Propagation

SIM = "sim"
DIGITAL = "digital"

PARAMS_MAGIC = b"SIMTH1"


@dataclass
class PhaseParams:
    """Trainable per-layer, per-atom phase shifts, radians, shape (L, M)."""

    theta: np.ndarray

    kind = SIM

    def layer_responses(self) -> np.ndarray:
        return np.exp(1j * self.theta)


@dataclass
class DigitalParams:
    """Unconstrained complex diagonal layer weights, shape (L, M)."""

    weights: np.ndarray

    kind = DIGITAL

    def layer_responses(self) -> np.ndarray:
        return self.weights


@dataclass(frozen=True)
class EncodedInput:
    """Diagonal of the layer-0 response: the augmented normalized features."""

    phi0_diag: np.ndarray


def encode_input(features: np.ndarray, m_atoms: int | None = None) -> EncodedInput:
    features = np.asarray(features, dtype=np.complex128)
    if features.ndim != 1:
        raise ShapeError(f"features must be 1-D, got shape {features.shape}")
    if m_atoms is not None and features.shape[0] != m_atoms:
        raise ShapeError(f"feature length {features.shape[0]} != atom count {m_atoms}")
    peak = np.abs(features).max(initial=0.0)
    if peak > 1.0 + 1e-9:
        raise EncodingError(f"feature modulus {peak} exceeds the unit transmission ceiling")
    return EncodedInput(phi0_diag=features)


@dataclass
class ForwardCache:
    """Intermediate wavefields of one pass, consumed by the backward pass.

    u[l] is the field leaving layer l (u[0] includes the input encoding);
    t[l-1] = W u[l-1] is the field arriving at layer l before its response.
    Batched caches carry a trailing batch axis.
    """

    u: np.ndarray  # (L+1, M) or (L+1, M, B)
    t: np.ndarray  # (L, M) or (L, M, B)
    z: np.ndarray  # (K,) or (K, B), pre-noise output


def forward_batch(
    params: PhaseParams | DigitalParams,
    features: np.ndarray,
    propagation: Propagation,
    realization: ChannelRealization,
    tx_amplitude: float,
    noise_rngs: list[np.random.Generator] | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Run a (M, B) batch of encoded columns; noise_rngs gives one stream per column."""
    resp = params.layer_responses()
    n_layers, m = resp.shape
    if features.ndim != 2 or features.shape[0] != m:
        raise ShapeError(f"batch features must be ({m}, B), got {features.shape}")
    if propagation.w_matrix.shape != (m, m) or propagation.w0.shape != (m,):
        raise ShapeError("propagation shapes inconsistent with parameters")
    if realization.h_matrix.shape[1] != m:
        raise ShapeError(
            f"channel expects {realization.h_matrix.shape[1]} atoms, model has {m}"
        )
    batch = features.shape[1]
    u = np.empty((n_layers + 1, m, batch), dtype=np.complex128)
    t = np.empty((n_layers, m, batch), dtype=np.complex128)
    u[0] = features * (tx_amplitude * propagation.w0)[:, None]
    for l in range(1, n_layers + 1):
        t[l - 1] = propagation.w_matrix @ u[l - 1]
        u[l] = resp[l - 1][:, None] * t[l - 1]
    z = realization.h_matrix @ u[n_layers]
    y = z.copy()
    if noise_rngs is not None:
        if len(noise_rngs) != batch:
            raise ShapeError(f"need {batch} noise streams, got {len(noise_rngs)}")
        for b, rng in enumerate(noise_rngs):
            y[:, b] = add_awgn(z[:, b], realization.noise_sigma, rng)
    return y, ForwardCache(u=u, t=t, z=z)


def forward(
    params: PhaseParams | DigitalParams,
    encoded: EncodedInput,
    propagation: Propagation,
    realization: ChannelRealization,
    tx_amplitude: float,
    noise_rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Single-patch forward pass; noise_rng None disables the AWGN term."""
    rngs = [noise_rng] if noise_rng is not None else None
    y, cache = forward_batch(
        params, encoded.phi0_diag[:, None], propagation, realization, tx_amplitude, rngs
    )
    return y[:, 0], ForwardCache(u=cache.u[:, :, 0], t=cache.t[:, :, 0], z=cache.z[:, 0])


def classify(y: np.ndarray) -> int:
    """Index of the antenna with the highest power; ties go to the lowest index."""
    if y.size == 0:
        raise ShapeError("cannot classify an empty received vector")
    return int(np.argmax(np.abs(y) ** 2))


def classify_batch(y: np.ndarray) -> np.ndarray:
    if y.ndim != 2 or y.shape[0] == 0:
        raise ShapeError(f"batched receive vector must be (K, B) with K >= 1, got {y.shape}")
    return np.argmax(np.abs(y) ** 2, axis=0)


def init_params(
    geometry: SimGeometry, kind: str, rng: np.random.Generator
) -> PhaseParams | DigitalParams:
    """Uniform random phases; the digital model starts at the same phasors."""
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(geometry.num_layers, geometry.atoms_per_layer))
    if kind == SIM:
        return PhaseParams(theta=theta)
    if kind == DIGITAL:
        return DigitalParams(weights=np.exp(1j * theta))
    raise ShapeError(f"unknown parameter kind {kind!r}")


def save_params(path: str, params: PhaseParams | DigitalParams) -> None:
    if params.kind == SIM:
        values, kind_byte = params.theta, 0
    else:
        values, kind_byte = params.weights, 1
    n_layers, m = values.shape
    with open(path, "wb") as fh:
        fh.write(PARAMS_MAGIC)
        fh.write(struct.pack("<IIB", n_layers, m, kind_byte))
        if kind_byte == 0:
            fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
        else:
            fh.write(np.ascontiguousarray(values, dtype="<c16").tobytes())


def load_params(path: str) -> PhaseParams | DigitalParams:
    with open(path, "rb") as fh:
        header = fh.read(6 + 9)
        if len(header) < 15:
            raise FormatError(f"truncated parameter file: header needs 15 bytes, got {len(header)}")
        if header[:6] != PARAMS_MAGIC:
            raise FormatError(f"bad magic {header[:6]!r} at byte offset 0, expected {PARAMS_MAGIC!r}")
        n_layers, m, kind_byte = struct.unpack("<IIB", header[6:])
        count = n_layers * m * (2 if kind_byte else 1)
        raw = fh.read(count * 8)
        if len(raw) != count * 8:
            raise FormatError(
                f"truncated parameter file: needed {count * 8} payload bytes at byte offset 15"
            )
        if kind_byte == 0:
            return PhaseParams(theta=np.frombuffer(raw, dtype="<f8").reshape(n_layers, m).copy())
        if kind_byte == 1:
            return DigitalParams(weights=np.frombuffer(raw, dtype="<c16").reshape(n_layers, m).copy())
        raise FormatError(f"unknown parameter kind byte {kind_byte} at byte offset 14")
