"""Experiment configuration: INI-style files, named presets, and builders
that turn a resolved configuration into domain objects.

A configuration is a two-level mapping ``{section: {key: value}}`` of
strings, mirroring the file format.  Presets are configurations shipped
with the package; a user file overrides preset keys section by section.
"""

from __future__ import annotations

import configparser
import copy

import numpy as np

from . import channel as channel_mod, noise as noise_mod
from .channel import DiscreteChannel, MultipathParams, PulseShape
from .errors import ConfigError
from .noise import MixtureNoiseParams
from .system import SystemConfig
from .trellis import BinaryPolynomial

ConfigDict = dict[str, dict[str, str]]

_VVF_CHANNEL = {
    "channel": {"preset": "zimmermann-vvf-4path"},
    "pulse": {"beta": "0.7", "symbol_period_s": "80e-9", "span": "12"},
    "discretize": {"symbol_period_s": "0.15e-6", "num_taps": "4", "oversample": "16"},
}

_OUTER_CODE = {"code": {"feedforward": "1+D+D^2+D^3", "feedback": "1+D+D^3"}}

_FRAME = {"frame": {"n_info": "4096", "iterations": "10", "early_exit": "true"}}

_NOISE_MIXTURE = {
    "noise": {"epsilon": "0.1", "k": "100", "snr_convention": "effective"}
}

PRECODER_CANDIDATES = {
    "d1": "1+D",
    "d2": "1+D^2",
    "d1d2": "1+D+D^2",
    "d3": "1+D^3",
}


def _merge(*parts: ConfigDict) -> ConfigDict:
    out: ConfigDict = {}
    for part in parts:
        for section, entries in part.items():
            out.setdefault(section, {}).update(entries)
    return copy.deepcopy(out)


def _ber_preset(precoder: str | None, metric: str) -> ConfigDict:
    cfg = _merge(
        {"system": {"mode": "turbo", "metric": metric}},
        _VVF_CHANNEL,
        _OUTER_CODE,
        _FRAME,
        _NOISE_MIXTURE,
        {
            "sweep": {
                "snr_db": "-8:0:1",
                "min_errors": "200",
                "max_bits": "100000000",
                "batch_frames": "16",
            },
            "seeds": {"master": "1", "interleaver": "77"},
        },
    )
    if precoder is not None:
        cfg["precoder"] = {"feedback": precoder}
    return cfg


def builtin_presets() -> dict[str, ConfigDict]:
    presets: dict[str, ConfigDict] = {}

    presets["fig3_channel"] = _merge(_VVF_CHANNEL)

    presets["fig5_exit"] = _merge(
        {"system": {"mode": "turbo", "metric": "mixture"}},
        _VVF_CHANNEL,
        _OUTER_CODE,
        _NOISE_MIXTURE,
        {
            "exit": {
                "snr_db": "-5",
                "grid_step": "0.05",
                "samples_per_point": "200000",
                "precoders": "; ".join(PRECODER_CANDIDATES.values()),
            },
            "seeds": {"master": "1"},
        },
    )

    presets["fig6_ber_precoded_mixture"] = _ber_preset("1+D^3", "mixture")
    presets["fig6_ber_precoded_gaussian"] = _ber_preset("1+D^3", "gaussian")
    presets["fig6_ber_noprecoder"] = _ber_preset(None, "mixture")
    for tag, poly in PRECODER_CANDIDATES.items():
        presets[f"fig6_ber_precoder_{tag}"] = _ber_preset(poly, "mixture")

    presets["uncoded_bpsk_awgn"] = _merge(
        {"system": {"mode": "uncoded"}},
        {"channel": {"taps": "1.0"}},
        {"noise": {"epsilon": "0", "k": "1", "snr_convention": "es_n0"}},
        {"frame": {"n_info": "100000"}},
        {
            "sweep": {
                "snr_db": "0:8:4",
                "min_errors": "200",
                "max_bits": "100000000",
                "batch_frames": "16",
            },
            "seeds": {"master": "1"},
        },
    )

    presets["noiseless_smoke"] = _merge(
        _ber_preset("1+D^3", "mixture"),
        {
            "noise": {"noiseless": "true"},
            "sweep": {"snr_db": "0:0:1", "max_bits": "200000"},
            "frame": {"n_info": "1024"},
        },
    )
    return presets


CHANNEL_PRESETS = ("zimmermann-vvf-4path", "identity")


def load_config(path: str | None = None, preset: str | None = None) -> ConfigDict:
    """Resolve a configuration from a preset name and/or an INI file."""
    cfg: ConfigDict = {}
    if preset is not None:
        presets = builtin_presets()
        if preset not in presets:
            known = ", ".join(sorted(presets))
            raise ConfigError(f"unknown preset {preset!r}; known: {known}")
        cfg = presets[preset]
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        file_cfg = {s: dict(parser.items(s)) for s in parser.sections()}
        cfg = _merge(cfg, file_cfg)
    if not cfg:
        raise ConfigError("need a preset name or a config file")
    return cfg


def _get(cfg: ConfigDict, section: str, key: str, default: str | None = None) -> str:
    try:
        return cfg[section][key]
    except KeyError:
        if default is not None:
            return default
        raise ConfigError(f"missing config entry [{section}] {key}") from None


def _get_float(cfg, section, key, default=None):
    return float(_get(cfg, section, key, default))


def _get_bool(cfg, section, key, default="false"):
    return _get(cfg, section, key, default).strip().lower() in ("1", "true", "yes", "on")


def build_multipath(cfg: ConfigDict) -> MultipathParams:
    name = cfg.get("channel", {}).get("preset")
    if name == "zimmermann-vvf-4path":
        return channel_mod.vvf_4path_params()
    if name == "identity":
        return MultipathParams(paths=((1.0, 0.0),), a0=0.0, a1=0.0, kappa=1.0, epsilon_r=1.0)
    if name is not None:
        raise ConfigError(f"unknown channel preset {name!r}")
    weights = [float(x) for x in _get(cfg, "channel", "path_weights").split(",")]
    dists = [float(x) for x in _get(cfg, "channel", "path_distances_m").split(",")]
    if len(weights) != len(dists):
        raise ConfigError("path_weights and path_distances_m must align")
    return MultipathParams(
        paths=tuple(zip(weights, dists)),
        a0=_get_float(cfg, "channel", "a0", "0"),
        a1=_get_float(cfg, "channel", "a1", "0"),
        kappa=_get_float(cfg, "channel", "kappa", "1"),
        epsilon_r=_get_float(cfg, "channel", "epsilon_r", "1"),
    )


def build_pulse(cfg: ConfigDict) -> PulseShape:
    return PulseShape(
        beta=_get_float(cfg, "pulse", "beta", "0.7"),
        symbol_period=_get_float(cfg, "pulse", "symbol_period_s"),
        span=int(_get(cfg, "pulse", "span", "12")),
    )


def build_channel(cfg: ConfigDict) -> DiscreteChannel:
    """Discrete channel from explicit taps or synthesized from physics."""
    chan = cfg.get("channel", {})
    if "taps" in chan:
        taps = np.array([float(x) for x in chan["taps"].split(",")])
        energy = float(np.sum(taps**2))
        return DiscreteChannel(taps=taps / np.sqrt(energy), normalized=True)
    if chan.get("preset") == "identity":
        return DiscreteChannel(taps=np.array([1.0]), normalized=True)
    params = build_multipath(cfg)
    pulse = build_pulse(cfg)
    phase = cfg.get("discretize", {}).get("phase_s")
    return channel_mod.synthesize_discrete_channel(
        params,
        pulse,
        symbol_period=_get_float(cfg, "discretize", "symbol_period_s"),
        num_taps=int(_get(cfg, "discretize", "num_taps")),
        oversample=int(_get(cfg, "discretize", "oversample", "16")),
        phase=None if phase is None else float(phase),
    )


def build_noise(cfg: ConfigDict, snr_db: float) -> MixtureNoiseParams:
    """Noise at the requested SNR under the configured convention.

    ``effective`` equates signal power (1 after channel normalization) to
    the mixture's total variance; ``es_n0`` reads the SNR as Es/N0 with
    per-sample noise variance N0/2.
    """
    eps = _get_float(cfg, "noise", "epsilon", "0")
    k = _get_float(cfg, "noise", "k", "1")
    convention = _get(cfg, "noise", "snr_convention", "effective")
    if convention == "effective":
        return noise_mod.snr_to_params(snr_db, 1.0, eps, k)
    if convention == "es_n0":
        return noise_mod.snr_to_params(snr_db, 0.5, eps, k)
    raise ConfigError(f"unknown snr_convention {convention!r}")


def build_system(cfg: ConfigDict, snr_db: float) -> SystemConfig:
    precoder = None
    pre = cfg.get("precoder", {}).get("feedback")
    if pre and pre.strip().lower() not in ("none", ""):
        precoder = BinaryPolynomial.parse(pre)
    return SystemConfig(
        n_info=int(_get(cfg, "frame", "n_info", "4096")),
        outer_feedforward=BinaryPolynomial.parse(_get(cfg, "code", "feedforward")),
        outer_feedback=BinaryPolynomial.parse(_get(cfg, "code", "feedback")),
        channel=build_channel(cfg),
        noise=build_noise(cfg, snr_db),
        precoder=precoder,
        metric=_get(cfg, "system", "metric", "mixture"),
        n_iterations=int(_get(cfg, "frame", "iterations", "10")),
        interleaver_seed=int(_get(cfg, "seeds", "interleaver", "77")),
        early_exit=_get_bool(cfg, "frame", "early_exit", "true"),
    )


def parse_snr_spec(spec: str) -> list[float]:
    """``a:b:step`` inclusive sweep, or a comma-separated list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"snr range must be a:b:step, got {spec!r}")
        a, b, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("snr step must be positive")
        n = int(np.floor((b - a) / step + 1e-9)) + 1
        if n < 1:
            raise ConfigError(f"empty snr range {spec!r}")
        return [round(a + i * step, 10) for i in range(n)]
    return [float(x) for x in spec.split(",")]
