import numpy as np
import pytest

from simd2nn.config import ExperimentConfig, apply_values, parse_config_file, resolve_config
from simd2nn.errors import ConfigurationError

FULL = """
# experiment configuration
[geometry]
lambda_m = 0.025
t_sim_m = 0.05
layers = 6
atoms_rows = 8
atoms_cols = 16
tx_distance_m = 0.01

[channel]
freq_hz = 12e9
link_distance_m = 500
rician_k_db = 10
la_db = 1.5
le_db = 0.5
noise_dbm = -100
tx_power_dbm = 15
rx_antennas = 2
channel_seed = 77

[training]
epochs = 5
batch = 8
lr = 0.02
weight_decay = 0.0
sample_rate = 0.5
train_noise = off

[data]
synth_height = 256
synth_width = 256
synth_layout = blobs
ocean_sigma = 0.4
land_sigma = 0.9
phase_texture = on
patch_side = 64
stride = 16
phase_rotation = off
rotation_angle_deg = 45

[experiment]
seed = 123
out_dir = results
model = digital
"""


def test_empty_file_yields_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    cfg = resolve_config(str(path))
    assert cfg.geometry.num_layers == 4
    assert cfg.geometry.atoms_rows * cfg.geometry.atoms_cols == 2048
    assert cfg.geometry.wavelength == 0.025
    assert cfg.geometry.sim_thickness == 0.05
    assert cfg.channel.num_rx_antennas == 2
    assert cfg.channel.noise_power_dbm == -104.0
    assert cfg.channel.tx_power_dbm == 20.0
    assert cfg.channel.rician_k_db == 20.0
    assert cfg.training.epochs == 60
    assert cfg.training.batch_size == 64
    assert cfg.training.learning_rate == 0.01
    assert cfg.training.sample_rate == 0.10
    assert cfg.data.patch_side == 128
    assert cfg.data.stride == 32
    assert cfg.model_kind == "sim"


def test_full_file_parses(tmp_path):
    path = tmp_path / "full.cfg"
    path.write_text(FULL)
    cfg = resolve_config(str(path))
    assert cfg.geometry.num_layers == 6
    assert cfg.geometry.tx_antenna_distance == 0.01
    assert cfg.channel.carrier_freq == 12e9
    assert cfg.channel.distance == 500
    assert cfg.channel_seed == 77
    assert cfg.training.epochs == 5
    assert cfg.training.train_noise is False
    assert cfg.training.master_seed == 123
    assert cfg.data.synth.layout == "blobs"
    assert cfg.data.phase_rotation is False
    assert cfg.data.rotation_angle_rad == pytest.approx(np.pi / 4)
    assert cfg.model_kind == "digital"
    assert cfg.output_dir == "results"


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[geometry]\nlayers = 4\n")
    cfg = resolve_config(str(path), {("geometry", "layers"): 6})
    assert cfg.geometry.num_layers == 6


def test_unknown_key_names_line(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[geometry]\nlayers = 4\nbogus = 1\n")
    with pytest.raises(ConfigurationError, match=r":3: unknown key 'bogus'"):
        resolve_config(str(path))


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[nonsense]\nx = 1\n")
    with pytest.raises(ConfigurationError, match=r"unknown section"):
        resolve_config(str(path))


def test_bad_value_names_key_and_line(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[geometry]\nlayers = zero\n")
    with pytest.raises(ConfigurationError, match=r":2: bad value for 'layers'"):
        resolve_config(str(path))


def test_key_outside_section_rejected(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("layers = 4\n")
    with pytest.raises(ConfigurationError, match="outside"):
        resolve_config(str(path))


def test_bad_model_rejected():
    with pytest.raises(ConfigurationError, match="model"):
        apply_values(ExperimentConfig(), {("experiment", "model"): "quantum"})


def test_comments_and_blanks_ignored(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# header\n\n[training]\nepochs = 7  # trailing comment\n")
    assert resolve_config(str(path)).training.epochs == 7


def test_precedence_over_random_subsets(tmp_path):
    # file sets one group of values, overrides replace a random subset
    rng = np.random.default_rng(9)
    file_vals = {
        ("geometry", "layers"): 3,
        ("training", "epochs"): 11,
        ("channel", "tx_power_dbm"): 17.0,
        ("experiment", "seed"): 5,
    }
    path = tmp_path / "c.cfg"
    path.write_text(
        "[geometry]\nlayers = 3\n[training]\nepochs = 11\n"
        "[channel]\ntx_power_dbm = 17\n[experiment]\nseed = 5\n"
    )
    override_pool = {
        ("geometry", "layers"): 5,
        ("training", "epochs"): 21,
        ("channel", "tx_power_dbm"): -3.0,
        ("experiment", "seed"): 99,
    }
    keys = list(override_pool)
    for _ in range(12):
        chosen = {k: override_pool[k] for k in keys if rng.random() < 0.5}
        cfg = resolve_config(str(path), chosen)
        expected = dict(file_vals)
        expected.update(chosen)
        assert cfg.geometry.num_layers == expected[("geometry", "layers")]
        assert cfg.training.epochs == expected[("training", "epochs")]
        assert cfg.channel.tx_power_dbm == expected[("channel", "tx_power_dbm")]
        assert cfg.master_seed == expected[("experiment", "seed")]
        assert cfg.training.master_seed == cfg.master_seed


def test_parse_config_file_returns_typed_values(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("[channel]\nfreq_hz = 12e9\nrx_antennas = 3\n[data]\nphase_texture = off\n")
    values = parse_config_file(str(path))
    assert values[("channel", "freq_hz")] == 12e9
    assert values[("channel", "rx_antennas")] == 3
    assert values[("data", "phase_texture")] is False
