"""End-to-end precoded turbo equalization: encoder chain, channel, and the
iterative receiver exchanging extrinsics between equalizer and decoder.

Frame layout: ``n_info`` information bits are RSC-encoded (plus ``m``
termination inputs) into a multiplexed codeword of ``2 * (n_info + m)``
bits, interleaved, optionally precoded, and sent through the ISI channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exit_chart, noise as noise_mod, siso, trellis as trellis_mod
from .channel import DiscreteChannel
from .errors import ConfigError
from .noise import MixtureNoiseParams, derive_seed
from .trellis import BinaryPolynomial


@dataclass(frozen=True)
class Interleaver:
    """Deterministic permutation of ``size`` positions from a seed."""

    permutation: np.ndarray

    @classmethod
    def from_seed(cls, size: int, seed: int) -> "Interleaver":
        perm = np.random.default_rng(seed).permutation(size)
        return cls(permutation=perm)

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        object.__setattr__(self, "permutation", perm)
        if np.any(np.sort(perm) != np.arange(perm.size)):
            raise ConfigError("permutation must be a bijection of 0..n-1")

    @property
    def size(self) -> int:
        return self.permutation.size

    def interleave(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.permutation]

    def deinterleave(self, x: np.ndarray) -> np.ndarray:
        out = np.empty_like(np.asarray(x))
        out[self.permutation] = x
        return out


@dataclass(frozen=True)
class SystemConfig:
    """Everything needed to reproduce one simulated link."""

    n_info: int
    outer_feedforward: BinaryPolynomial
    outer_feedback: BinaryPolynomial
    channel: DiscreteChannel
    noise: MixtureNoiseParams
    precoder: BinaryPolynomial | None = None
    metric: str = "mixture"
    n_iterations: int = 10
    interleaver_seed: int = 0
    early_exit: bool = True

    def __post_init__(self):
        if self.n_info < 1:
            raise ConfigError("n_info must be >= 1")
        if self.n_iterations < 1:
            raise ConfigError("n_iterations must be >= 1")
        if self.metric not in ("mixture", "gaussian"):
            raise ConfigError(f"unknown metric {self.metric!r}")


@dataclass
class TransmitResult:
    """Received samples plus the intermediate sequences, for white-box tests."""

    y: np.ndarray
    coded: np.ndarray
    interleaved: np.ndarray
    channel_bits: np.ndarray
    noise: np.ndarray
    noise_labels: np.ndarray


@dataclass
class ReceiveResult:
    decoded: np.ndarray
    iterations_run: int
    mi_trace: list | None
    ber_trace: list | None
    inner_extrinsic: np.ndarray
    outer_extrinsic: np.ndarray


@dataclass(frozen=True)
class FrameResult:
    bit_errors: int
    frame_error: bool
    iterations_run: int
    n_info: int


class TurboSystem:
    """Prebuilt trellises and interleaver for a fixed :class:`SystemConfig`."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.outer_trellis = trellis_mod.build_rsc_trellis(
            cfg.outer_feedforward, cfg.outer_feedback
        )
        self.outer_memory = int(np.log2(self.outer_trellis.num_states))
        self.n_coded = 2 * (cfg.n_info + self.outer_memory)
        if cfg.precoder is not None:
            self.inner_trellis = trellis_mod.build_precoded_isi_trellis(
                cfg.precoder, cfg.channel
            )
        else:
            self.inner_trellis = trellis_mod.build_isi_trellis(cfg.channel)
        self.interleaver = Interleaver.from_seed(self.n_coded, cfg.interleaver_seed)
        if cfg.metric == "mixture":
            self.metric = siso.MixtureMetric(cfg.noise)
        else:
            self.metric = siso.GaussianMetric(noise_mod.effective_variance(cfg.noise))

    def transmit(self, u: np.ndarray, seed: int, noiseless: bool = False) -> TransmitResult:
        """Encode, interleave, precode, convolve, and add sampled noise."""
        u = np.asarray(u, dtype=np.int64)
        if u.size != self.cfg.n_info:
            raise ValueError(f"expected {self.cfg.n_info} info bits, got {u.size}")
        coded = trellis_mod.encode_rsc(self.outer_trellis, u)
        interleaved = self.interleaver.interleave(coded)
        # the inner trellis embeds the precoder, so walking it with the
        # interleaved bits already produces the precoded channel amplitudes
        clean = trellis_mod.channel_output(self.inner_trellis, interleaved)
        if self.cfg.precoder is not None:
            channel_bits = trellis_mod.precode(self.cfg.precoder, interleaved)
        else:
            channel_bits = interleaved
        if noiseless:
            z = np.zeros(clean.size)
            labels = np.zeros(clean.size, dtype=np.int64)
        else:
            z, labels = noise_mod.sample_labeled(self.cfg.noise, seed, clean.size)
        return TransmitResult(
            y=clean + z,
            coded=coded,
            interleaved=interleaved,
            channel_bits=channel_bits,
            noise=z,
            noise_labels=labels,
        )

    def receive(self, y: np.ndarray, truth: np.ndarray | None = None) -> ReceiveResult:
        """Iterative equalization/decoding; hard decisions from the outer APP."""
        y = np.asarray(y, dtype=float)
        if y.size != self.n_coded:
            raise ValueError(f"expected {self.n_coded} observations, got {y.size}")

        truth_coded = truth_interleaved = None
        mi_trace: list | None = None
        ber_trace: list | None = None
        if truth is not None:
            truth = np.asarray(truth, dtype=np.int64)
            truth_coded = trellis_mod.encode_rsc(self.outer_trellis, truth)
            truth_interleaved = self.interleaver.interleave(truth_coded)
            mi_trace = []
            ber_trace = []

        apriori_inner = np.zeros(self.n_coded)
        decoded = np.zeros(self.cfg.n_info, dtype=np.int64)
        prev_decoded = None
        e1 = e2 = np.zeros(self.n_coded)
        iterations_run = 0
        for it in range(self.cfg.n_iterations):
            e1, _ = siso.bcjr_decode(self.inner_trellis, y, self.metric, apriori_inner)
            to_outer = self.interleaver.deinterleave(e1)
            e2, info_app = siso.decode_outer(
                self.outer_trellis, to_outer[0::2], to_outer[1::2]
            )
            apriori_inner = self.interleaver.interleave(e2)
            decoded = (info_app[: self.cfg.n_info] > 0).astype(np.int64)
            iterations_run = it + 1
            if truth is not None:
                import warnings

                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    mi_trace.append(
                        (
                            exit_chart.mi_histogram(e1, truth_interleaved),
                            exit_chart.mi_histogram(e2, truth_coded),
                        )
                    )
                ber_trace.append(float(np.mean(decoded != truth)))
            if self.cfg.early_exit and prev_decoded is not None and np.array_equal(
                decoded, prev_decoded
            ):
                break
            prev_decoded = decoded
        return ReceiveResult(
            decoded=decoded,
            iterations_run=iterations_run,
            mi_trace=mi_trace,
            ber_trace=ber_trace,
            inner_extrinsic=e1,
            outer_extrinsic=e2,
        )

    def run_frame(self, seed: int) -> FrameResult:
        """Generate, transmit, receive, count errors; pure in (config, seed)."""
        data_seed = derive_seed(seed, 0)
        noise_seed = derive_seed(seed, 1)
        u = np.random.default_rng(data_seed).integers(0, 2, self.cfg.n_info)
        tx = self.transmit(u, noise_seed)
        rx = self.receive(tx.y)
        errors = int(np.sum(rx.decoded != u))
        return FrameResult(
            bit_errors=errors,
            frame_error=errors > 0,
            iterations_run=rx.iterations_run,
            n_info=self.cfg.n_info,
        )


def transmit(cfg: SystemConfig, u: np.ndarray, seed: int, **kw) -> TransmitResult:
    return TurboSystem(cfg).transmit(u, seed, **kw)


def receive(cfg: SystemConfig, y: np.ndarray, truth=None) -> ReceiveResult:
    return TurboSystem(cfg).receive(y, truth)


def run_frame(cfg: SystemConfig, seed: int) -> FrameResult:
    return TurboSystem(cfg).run_frame(seed)
