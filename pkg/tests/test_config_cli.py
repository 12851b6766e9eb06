import json
import os

import numpy as np
import pytest

from plcturbo import ConfigError
from plcturbo.cli import main, run_ber_sweep, run_exit
from plcturbo.config import (
    build_channel,
    build_noise,
    build_system,
    builtin_presets,
    load_config,
    parse_snr_spec,
)
from plcturbo.noise import effective_variance

from conftest import PAPER_TAPS


class TestConfig:
    def test_presets_all_loadable(self):
        for name in builtin_presets():
            cfg = load_config(preset=name)
            assert cfg

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigError):
            load_config(preset="nope")

    def test_file_overrides_preset(self, tmp_path):
        p = tmp_path / "exp.ini"
        p.write_text("[frame]\nn_info = 512\n")
        cfg = load_config(str(p), preset="fig6_ber_precoded_mixture")
        assert cfg["frame"]["n_info"] == "512"
        assert cfg["precoder"]["feedback"] == "1+D^3"

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/file.ini")

    def test_parse_snr_spec(self):
        assert parse_snr_spec("0:8:4") == [0.0, 4.0, 8.0]
        assert parse_snr_spec("-8:-6:0.5") == [-8.0, -7.5, -7.0, -6.5, -6.0]
        assert parse_snr_spec("1.5, 3") == [1.5, 3.0]
        with pytest.raises(ConfigError):
            parse_snr_spec("0:8")

    def test_explicit_taps_normalized(self):
        cfg = {"channel": {"taps": "2.0, 0.0, 0.0, 2.0"}}
        ch = build_channel(cfg)
        assert np.allclose(ch.taps, [np.sqrt(0.5), 0, 0, np.sqrt(0.5)])

    def test_identity_preset(self):
        ch = build_channel({"channel": {"preset": "identity"}})
        assert ch.taps == pytest.approx([1.0])

    def test_vvf_preset_synthesizes_paper_taps(self):
        cfg = load_config(preset="fig3_channel")
        ch = build_channel(cfg)
        assert np.max(np.abs(ch.taps - PAPER_TAPS)) < 0.01

    def test_noise_conventions(self):
        cfg = {"noise": {"epsilon": "0", "k": "1", "snr_convention": "effective"}}
        assert effective_variance(build_noise(cfg, 0.0)) == pytest.approx(1.0)
        cfg["noise"]["snr_convention"] = "es_n0"
        assert effective_variance(build_noise(cfg, 0.0)) == pytest.approx(0.5)

    def test_build_system_from_preset(self):
        cfg = load_config(preset="fig6_ber_precoded_mixture")
        sc = build_system(cfg, -5.0)
        assert sc.n_info == 4096
        assert sc.precoder is not None
        assert sc.metric == "mixture"

    def test_no_precoder_preset(self):
        cfg = load_config(preset="fig6_ber_noprecoder")
        sc = build_system(cfg, -5.0)
        assert sc.precoder is None


SMALL_SWEEP = """
[frame]
n_info = 256
iterations = 4
[sweep]
snr_db = -7:-6:1
min_errors = 30
max_bits = 200000
batch_frames = 8
"""


class TestBerSweep:
    def test_deterministic_across_workers(self, tmp_path):
        p = tmp_path / "small.ini"
        p.write_text(SMALL_SWEEP)
        cfg = load_config(str(p), preset="fig6_ber_precoded_mixture")
        snrs = parse_snr_spec("-7:-6:1")
        pts1, _ = run_ber_sweep(cfg, snrs, master_seed=5, workers=1)
        pts2, _ = run_ber_sweep(cfg, snrs, master_seed=5, workers=2)
        for a, b in zip(pts1, pts2):
            assert (a.bits_run, a.bit_errors, a.frame_errors) == (
                b.bits_run,
                b.bit_errors,
                b.frame_errors,
            )

    def test_seed_changes_results(self, tmp_path):
        p = tmp_path / "small.ini"
        p.write_text(SMALL_SWEEP)
        cfg = load_config(str(p), preset="fig6_ber_precoded_mixture")
        pts1, _ = run_ber_sweep(cfg, [-6.5], master_seed=5, workers=1)
        pts2, _ = run_ber_sweep(cfg, [-6.5], master_seed=6, workers=1)
        assert pts1[0].bit_errors != pts2[0].bit_errors


class TestCliCommands:
    def test_dump_channel_vvf(self, tmp_path, capsys):
        rc = main(["dump-channel", "--preset", "zimmermann-vvf-4path", "--out", str(tmp_path)])
        assert rc == 0
        taps = np.loadtxt(tmp_path / "channel_taps.csv", delimiter=",", skiprows=1)[:, 1]
        assert np.max(np.abs(taps - PAPER_TAPS)) < 0.01
        freq = np.loadtxt(tmp_path / "frequency_response.csv", delimiter=",", skiprows=1)
        # magnitude trends downward across the band up to multipath ripple
        mags = freq[:, 1]
        assert mags[: len(mags) // 10].max() == mags.max()
        assert np.mean(mags[-200:]) < np.mean(mags[:200])
        assert (tmp_path / "impulse_response.csv").exists()
        manifest = json.loads((tmp_path / "run_manifest.json").read_text())
        assert manifest["command"] == "dump-channel"
        assert "version" in manifest

    def test_dump_channel_identity(self, tmp_path):
        rc = main(["dump-channel", "--preset", "identity", "--out", str(tmp_path)])
        assert rc == 0
        rows = np.loadtxt(tmp_path / "channel_taps.csv", delimiter=",", skiprows=1)
        assert np.atleast_2d(rows)[0, 1] == pytest.approx(1.0)

    def test_unknown_preset_exit_code_2(self, tmp_path):
        rc = main(["dump-channel", "--preset", "bogus", "--out", str(tmp_path)])
        assert rc == 2

    def test_unreadable_config_exit_code_2(self, tmp_path):
        rc = main(["ber", "--config", "/does/not/exist.ini", "--out", str(tmp_path)])
        assert rc == 2

    def test_ber_csv_byte_identical_across_runs_and_workers(self, tmp_path):
        ini = tmp_path / "small.ini"
        ini.write_text(SMALL_SWEEP)
        outs = []
        for i, workers in enumerate((1, 2, 1)):
            out = tmp_path / f"o{i}"
            rc = main(
                ["ber", "--preset", "fig6_ber_precoded_mixture", "--config", str(ini),
                 "--seed", "3", "--workers", str(workers), "--out", str(out)]
            )
            assert rc == 0
            outs.append((out / "ber.csv").read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_exit_csv_byte_identical_across_workers(self, tmp_path):
        ini = tmp_path / "exit.ini"
        ini.write_text("[exit]\ngrid_step = 0.25\nsamples_per_point = 20000\n")
        blobs = []
        for i, workers in enumerate((1, 2)):
            out = tmp_path / f"e{i}"
            rc = main(
                ["exit", "--preset", "fig5_exit", "--config", str(ini), "--snr", "-5",
                 "--precoders", "1+D^3", "--seed", "2", "--workers", str(workers),
                 "--out", str(out)]
            )
            assert rc == 0
            blobs.append(
                (out / "exit_1pD3.csv").read_bytes() + (out / "exit_outer.csv").read_bytes()
            )
        assert blobs[0] == blobs[1]

    def test_exit_empty_precoder_list(self, tmp_path, capsys):
        ini = tmp_path / "exit.ini"
        ini.write_text("[exit]\ngrid_step = 0.25\nsamples_per_point = 20000\n")
        rc = main(
            ["exit", "--preset", "fig5_exit", "--config", str(ini), "--snr", "-5",
             "--precoders", "", "--seed", "2", "--out", str(tmp_path / "eo")]
        )
        assert rc == 0
        assert "n/a" in capsys.readouterr().out
        assert (tmp_path / "eo" / "exit_outer.csv").exists()

    def test_gnuplot_layout_written(self, tmp_path):
        ini = tmp_path / "exit.ini"
        ini.write_text("[exit]\ngrid_step = 0.5\nsamples_per_point = 20000\n")
        out = tmp_path / "gp"
        rc = main(
            ["exit", "--preset", "fig5_exit", "--config", str(ini), "--snr", "-5",
             "--precoders", "1+D^3", "--seed", "2", "--out", str(out)]
        )
        assert rc == 0
        layout = (out / "fig5_layout.gp").read_text()
        assert "using 2:1" in layout  # outer curve on swapped axes
