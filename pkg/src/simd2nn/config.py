"""Experiment configuration: defaults, config-file parsing, and overrides.

Config files are flat ``key = value`` lines under ``[section]`` headers
('#' starts a comment). Resolution order is built-in defaults, then the
file, then command-line overrides; unknown sections or keys are rejected
with the offending line number.
"""

import math
from dataclasses import dataclass, field, replace

from .channel import ChannelConfig
from .errors import ConfigurationError
from .geometry import GeometryConfig
from .training import TrainConfig


@dataclass(frozen=True)
class SynthConfig:
    height: int = 1600
    width: int = 1600
    layout: str = "half-split"
    ocean_sigma: float = 0.3
    land_sigma: float = 1.0
    phase_texture: bool = True


@dataclass(frozen=True)
class DataConfig:
    scene_path: str | None = None
    dataset_path: str | None = None
    synth: SynthConfig = field(default_factory=SynthConfig)
    patch_side: int = 128
    stride: int = 32
    phase_rotation: bool = True
    rotation_angle_deg: float = 90.0

    @property
    def rotation_angle_rad(self) -> float:
        return math.radians(self.rotation_angle_deg)


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model_kind: str = "sim"
    output_dir: str = "out"
    master_seed: int = 0
    channel_seed: int | None = None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _parse_int(text: str) -> int:
    return int(text.strip(), 10)


def _parse_float(text: str) -> float:
    return float(text.strip())


def _parse_str(text: str) -> str:
    return text.strip()


# (section, key) -> parser. The key names are the file-format contract.
_SCHEMA = {
    ("geometry", "lambda_m"): _parse_float,
    ("geometry", "t_sim_m"): _parse_float,
    ("geometry", "layers"): _parse_int,
    ("geometry", "atoms_rows"): _parse_int,
    ("geometry", "atoms_cols"): _parse_int,
    ("geometry", "tx_distance_m"): _parse_float,
    ("channel", "freq_hz"): _parse_float,
    ("channel", "link_distance_m"): _parse_float,
    ("channel", "rician_k_db"): _parse_float,
    ("channel", "la_db"): _parse_float,
    ("channel", "le_db"): _parse_float,
    ("channel", "noise_dbm"): _parse_float,
    ("channel", "tx_power_dbm"): _parse_float,
    ("channel", "rx_antennas"): _parse_int,
    ("channel", "channel_seed"): _parse_int,
    ("training", "epochs"): _parse_int,
    ("training", "batch"): _parse_int,
    ("training", "lr"): _parse_float,
    ("training", "weight_decay"): _parse_float,
    ("training", "sample_rate"): _parse_float,
    ("training", "train_noise"): _parse_bool,
    ("data", "scene"): _parse_str,
    ("data", "dataset"): _parse_str,
    ("data", "synth_height"): _parse_int,
    ("data", "synth_width"): _parse_int,
    ("data", "synth_layout"): _parse_str,
    ("data", "ocean_sigma"): _parse_float,
    ("data", "land_sigma"): _parse_float,
    ("data", "phase_texture"): _parse_bool,
    ("data", "patch_side"): _parse_int,
    ("data", "stride"): _parse_int,
    ("data", "phase_rotation"): _parse_bool,
    ("data", "rotation_angle_deg"): _parse_float,
    ("experiment", "seed"): _parse_int,
    ("experiment", "out_dir"): _parse_str,
    ("experiment", "model"): _parse_str,
}


def parse_config_file(path: str) -> dict:
    """Read a config file into {(section, key): value} with full validation."""
    values: dict = {}
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if not any(s == section for s, _ in _SCHEMA):
                    raise ConfigurationError(f"{path}:{lineno}: unknown section [{section}]")
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            if section is None:
                raise ConfigurationError(f"{path}:{lineno}: key outside any [section]")
            key, text = (part.strip() for part in line.split("=", 1))
            parser = _SCHEMA.get((section, key))
            if parser is None:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r} in section [{section}]")
            try:
                values[(section, key)] = parser(text)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return values


def apply_values(base: ExperimentConfig, values: dict) -> ExperimentConfig:
    """Overlay {(section, key): value} entries onto a config."""
    for section_key in values:
        if section_key not in _SCHEMA:
            section, key = section_key
            raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
    g, c, t, d, synth = base.geometry, base.channel, base.training, base.data, base.data.synth

    def val(section, key, fallback):
        return values.get((section, key), fallback)

    g = replace(
        g,
        wavelength=val("geometry", "lambda_m", g.wavelength),
        sim_thickness=val("geometry", "t_sim_m", g.sim_thickness),
        num_layers=val("geometry", "layers", g.num_layers),
        atoms_rows=val("geometry", "atoms_rows", g.atoms_rows),
        atoms_cols=val("geometry", "atoms_cols", g.atoms_cols),
        tx_antenna_distance=val("geometry", "tx_distance_m", g.tx_antenna_distance),
    )
    c = replace(
        c,
        carrier_freq=val("channel", "freq_hz", c.carrier_freq),
        distance=val("channel", "link_distance_m", c.distance),
        rician_k_db=val("channel", "rician_k_db", c.rician_k_db),
        atmospheric_loss_db=val("channel", "la_db", c.atmospheric_loss_db),
        environment_loss_db=val("channel", "le_db", c.environment_loss_db),
        noise_power_dbm=val("channel", "noise_dbm", c.noise_power_dbm),
        tx_power_dbm=val("channel", "tx_power_dbm", c.tx_power_dbm),
        num_rx_antennas=val("channel", "rx_antennas", c.num_rx_antennas),
    )
    master_seed = val("experiment", "seed", base.master_seed)
    t = replace(
        t,
        epochs=val("training", "epochs", t.epochs),
        batch_size=val("training", "batch", t.batch_size),
        learning_rate=val("training", "lr", t.learning_rate),
        weight_decay=val("training", "weight_decay", t.weight_decay),
        sample_rate=val("training", "sample_rate", t.sample_rate),
        train_noise=val("training", "train_noise", t.train_noise),
        master_seed=master_seed,
    )
    synth = replace(
        synth,
        height=val("data", "synth_height", synth.height),
        width=val("data", "synth_width", synth.width),
        layout=val("data", "synth_layout", synth.layout),
        ocean_sigma=val("data", "ocean_sigma", synth.ocean_sigma),
        land_sigma=val("data", "land_sigma", synth.land_sigma),
        phase_texture=val("data", "phase_texture", synth.phase_texture),
    )
    d = replace(
        d,
        scene_path=val("data", "scene", d.scene_path),
        dataset_path=val("data", "dataset", d.dataset_path),
        synth=synth,
        patch_side=val("data", "patch_side", d.patch_side),
        stride=val("data", "stride", d.stride),
        phase_rotation=val("data", "phase_rotation", d.phase_rotation),
        rotation_angle_deg=val("data", "rotation_angle_deg", d.rotation_angle_deg),
    )
    model_kind = val("experiment", "model", base.model_kind)
    if model_kind not in ("sim", "digital"):
        raise ConfigurationError(f"model must be sim or digital, got {model_kind!r}")
    return ExperimentConfig(
        geometry=g,
        channel=c,
        training=t,
        data=d,
        model_kind=model_kind,
        output_dir=val("experiment", "out_dir", base.output_dir),
        master_seed=master_seed,
        channel_seed=val("channel", "channel_seed", base.channel_seed),
    )


def resolve_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults <- config file <- explicit overrides, in that order."""
    cfg = ExperimentConfig()
    if path is not None:
        cfg = apply_values(cfg, parse_config_file(path))
    if overrides:
        cfg = apply_values(cfg, overrides)
    return cfg
