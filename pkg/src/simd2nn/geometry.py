"""Physical layout of the stacked metasurface.

Layer 0 is the data-encoding layer; layers 1..L carry the trainable phase
shifts. Atom grids are identical on every layer, centered on the optical
axis, with the transmit antenna on axis in front of layer 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ConfigurationError

# Pseudo layer index addressing the transmit antenna in pair queries.
TX_ANTENNA = -1


@dataclass(frozen=True)
class GeometryConfig:
    """User-facing geometry knobs; lengths in meters.

    Pitches default to wavelength/2 and the feed distance defaults to the
    inter-layer spacing when left as None.
    """

    wavelength: float = 0.025
    num_layers: int = 4
    atoms_rows: int = 32
    atoms_cols: int = 64
    sim_thickness: float = 0.05
    atom_pitch_x: float | None = None
    atom_pitch_y: float | None = None
    tx_antenna_distance: float | None = None

    @classmethod
    def square_grid(cls, atoms_per_layer: int, **kwargs) -> "GeometryConfig":
        """Config for a square grid; atoms_per_layer must be a perfect square."""
        side = math.isqrt(int(atoms_per_layer))
        if side * side != atoms_per_layer:
            raise ConfigurationError(
                f"atoms_per_layer={atoms_per_layer} is not a perfect square; "
                "pass atoms_rows/atoms_cols for a rectangular grid"
            )
        return cls(atoms_rows=side, atoms_cols=side, **kwargs)


@dataclass(frozen=True)
class SimGeometry:
    wavelength: float
    num_layers: int
    atoms_rows: int
    atoms_cols: int
    sim_thickness: float
    layer_spacing: float
    atom_pitch_x: float
    atom_pitch_y: float
    tx_antenna_distance: float

    @property
    def atoms_per_layer(self) -> int:
        return self.atoms_rows * self.atoms_cols


def build_geometry(config: GeometryConfig = GeometryConfig()) -> SimGeometry:
    """Validate a config and derive the spacing and pitch defaults."""
    pitch_x = config.atom_pitch_x if config.atom_pitch_x is not None else config.wavelength / 2.0
    pitch_y = config.atom_pitch_y if config.atom_pitch_y is not None else config.wavelength / 2.0
    if config.num_layers < 1:
        raise ConfigurationError(f"num_layers must be >= 1, got {config.num_layers}")
    if config.atoms_rows < 1 or config.atoms_cols < 1:
        raise ConfigurationError(
            f"atom grid must be positive, got {config.atoms_rows}x{config.atoms_cols}"
        )
    layer_spacing = config.sim_thickness / config.num_layers
    tx_distance = (
        config.tx_antenna_distance if config.tx_antenna_distance is not None else layer_spacing
    )
    for name, value in (
        ("wavelength", config.wavelength),
        ("sim_thickness", config.sim_thickness),
        ("atom_pitch_x", pitch_x),
        ("atom_pitch_y", pitch_y),
        ("tx_antenna_distance", tx_distance),
    ):
        if not (value > 0.0) or not math.isfinite(value):
            raise ConfigurationError(f"{name} must be a positive finite length, got {value}")
    return SimGeometry(
        wavelength=config.wavelength,
        num_layers=config.num_layers,
        atoms_rows=config.atoms_rows,
        atoms_cols=config.atoms_cols,
        sim_thickness=config.sim_thickness,
        layer_spacing=layer_spacing,
        atom_pitch_x=pitch_x,
        atom_pitch_y=pitch_y,
        tx_antenna_distance=tx_distance,
    )


def _check_layer(geometry: SimGeometry, layer: int) -> None:
    if not 0 <= layer <= geometry.num_layers:
        raise BoundsError(f"layer {layer} outside [0, {geometry.num_layers}]")


def atom_position(geometry: SimGeometry, layer: int, index: int) -> np.ndarray:
    """Center of one meta-atom, meters, row-major grid centered on the axis."""
    _check_layer(geometry, layer)
    m = geometry.atoms_per_layer
    if not 0 <= index < m:
        raise BoundsError(f"atom index {index} outside [0, {m})")
    row, col = divmod(index, geometry.atoms_cols)
    x = (col - (geometry.atoms_cols - 1) / 2.0) * geometry.atom_pitch_x
    y = (row - (geometry.atoms_rows - 1) / 2.0) * geometry.atom_pitch_y
    return np.array([x, y, layer * geometry.layer_spacing])


def layer_positions(geometry: SimGeometry, layer: int) -> np.ndarray:
    """All atom centers of one layer as an (M, 3) array in index order."""
    _check_layer(geometry, layer)
    cols = np.arange(geometry.atoms_cols) - (geometry.atoms_cols - 1) / 2.0
    rows = np.arange(geometry.atoms_rows) - (geometry.atoms_rows - 1) / 2.0
    xs = np.tile(cols * geometry.atom_pitch_x, geometry.atoms_rows)
    ys = np.repeat(rows * geometry.atom_pitch_y, geometry.atoms_cols)
    zs = np.full(geometry.atoms_per_layer, layer * geometry.layer_spacing)
    return np.stack([xs, ys, zs], axis=1)


def tx_position(geometry: SimGeometry) -> np.ndarray:
    """Transmit antenna location: on axis, in front of layer 0."""
    return np.array([0.0, 0.0, -geometry.tx_antenna_distance])


def pair_distance_angle(
    geometry: SimGeometry, from_layer: int, from_index: int, to_index: int
) -> tuple[float, float]:
    """Distance and cos(propagation angle) for one adjacent-layer atom pair.

    from_layer may be TX_ANTENNA (-1) to measure from the feed antenna to a
    layer-0 atom; the angle is measured from the layer normal.
    """
    if from_layer == TX_ANTENNA:
        if from_index != 0:
            raise BoundsError("the transmit antenna has a single element (index 0)")
        src = tx_position(geometry)
        dst = atom_position(geometry, 0, to_index)
    else:
        if not 0 <= from_layer < geometry.num_layers:
            raise BoundsError(
                f"from_layer {from_layer} has no successor layer (L={geometry.num_layers})"
            )
        src = atom_position(geometry, from_layer, from_index)
        dst = atom_position(geometry, from_layer + 1, to_index)
    diff = dst - src
    distance = float(np.sqrt(diff @ diff))
    return distance, float(abs(diff[2]) / distance)
