"""Fixed free-space coupling between adjacent layers and from the feed.

The coefficient for one atom pair is

    w = (d_x d_y cos(chi) / d) * (1/(2 pi d) - j/lambda) * exp(j 2 pi d / lambda)

with d the pair distance and chi the angle from the layer normal. All
matrices depend only on geometry and are constants during training; with
uniform spacing every inter-layer matrix is identical, so it is built once
and shared.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BoundsError, DomainError
from .geometry import SimGeometry, layer_positions, tx_position

_TWO_PI = 2.0 * np.pi


def diffraction_coefficient(
    distance: float, cos_angle: float, pitch_x: float, pitch_y: float, wavelength: float
) -> complex:
    """Field-transfer coefficient for a single source/destination pair."""
    if distance <= 0.0:
        raise DomainError(f"distance must be positive, got {distance}")
    if wavelength <= 0.0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    amp = (pitch_x * pitch_y) * cos_angle / distance
    radial = amp / (_TWO_PI * distance) - 1j * (amp / wavelength)
    return complex(radial * np.exp(1j * (_TWO_PI * distance / wavelength)))


@dataclass(frozen=True)
class TransmissionMatrix:
    """Coupling from layer ``from_layer`` to layer ``from_layer + 1``.

    entries[m, m'] couples source atom m' to destination atom m, so the
    forward pass is entries @ field.
    """

    entries: np.ndarray
    from_layer: int


def build_transmission_matrix(geometry: SimGeometry, to_layer: int) -> TransmissionMatrix:
    if not 1 <= to_layer <= geometry.num_layers:
        raise BoundsError(f"to_layer {to_layer} outside [1, {geometry.num_layers}]")
    src = layer_positions(geometry, to_layer - 1)
    dst = layer_positions(geometry, to_layer)
    entries = kernels.coupling_matrix(
        src, dst, geometry.atom_pitch_x, geometry.atom_pitch_y, geometry.wavelength
    )
    return TransmissionMatrix(entries=entries, from_layer=to_layer - 1)


def build_input_vector(geometry: SimGeometry) -> np.ndarray:
    """Coupling from the transmit antenna to every layer-0 atom, shape (M,)."""
    src = tx_position(geometry)[None, :]
    dst = layer_positions(geometry, 0)
    return kernels.coupling_matrix(
        src, dst, geometry.atom_pitch_x, geometry.atom_pitch_y, geometry.wavelength
    )[:, 0]


@dataclass(frozen=True)
class Propagation:
    """All fixed couplings one forward pass needs."""

    w0: np.ndarray        # (M,) antenna -> layer 0
    w_matrix: np.ndarray  # (M, M) layer l-1 -> layer l, shared across l


def build_propagation(geometry: SimGeometry) -> Propagation:
    """Build the feed vector and the (shared) inter-layer matrix once."""
    return Propagation(
        w0=build_input_vector(geometry),
        w_matrix=build_transmission_matrix(geometry, 1).entries,
    )


def dump_matrix_text(entries: np.ndarray, path: str) -> None:
    """Write a matrix as ``row col re im`` lines for inspection."""
    with open(path, "w") as fh:
        for r in range(entries.shape[0]):
            for c in range(entries.shape[1]):
                v = entries[r, c]
                fh.write(f"{r} {c} {float(v.real)!r} {float(v.imag)!r}\n")
