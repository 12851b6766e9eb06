"""Multipath power-line channel synthesis and symbol-rate discretization.

The physical channel is a weighted sum of delayed, frequency-attenuated
propagation paths.  Combined with a raised-cosine transmit pulse it yields
the equivalent impulse response, which is sampled at the transmission rate
to produce a normalized FIR tap vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DegenerateChannelError, ResolutionError

SPEED_OF_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class MultipathParams:
    """Physical description of a multipath power-line channel.

    Parameters
    ----------
    paths : sequence of (weight, distance)
        Per-path weighting factor (dimensionless, may be negative) and
        path length in meters.
    a0 : float
        Distance-proportional attenuation constant, 1/m.
    a1 : float
        Frequency-dependent attenuation constant, s^kappa/m.
    kappa : float
        Attenuation frequency exponent, in (0, 1].
    epsilon_r : float
        Dielectric constant of the cable insulation, >= 1.
    c0 : float
        Propagation speed in vacuum, m/s.
    """

    paths: tuple[tuple[float, float], ...]
    a0: float
    a1: float
    kappa: float
    epsilon_r: float
    c0: float = SPEED_OF_LIGHT

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple((float(w), float(d)) for w, d in self.paths))
        if len(self.paths) == 0:
            raise ConfigError("at least one propagation path is required")
        if any(d < 0 for _, d in self.paths):
            raise ConfigError("path distances must be >= 0")
        if self.epsilon_r < 1.0:
            raise ConfigError(f"epsilon_r must be >= 1, got {self.epsilon_r}")
        if not (0.0 < self.kappa <= 1.0):
            raise ConfigError(f"kappa must be in (0, 1], got {self.kappa}")
        if self.c0 <= 0:
            raise ConfigError("c0 must be positive")

    @property
    def velocity(self) -> float:
        """Propagation velocity along the line, c0 / sqrt(epsilon_r)."""
        return self.c0 / np.sqrt(self.epsilon_r)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.paths])

    @property
    def distances(self) -> np.ndarray:
        return np.array([d for _, d in self.paths])

    @property
    def max_delay(self) -> float:
        """Largest path propagation delay in seconds."""
        return float(self.distances.max() / self.velocity)


@dataclass(frozen=True)
class PulseShape:
    """Truncated raised-cosine transmit pulse.

    ``symbol_period`` is the Nyquist period of the pulse itself; the
    discretization rate of the overall channel may differ.
    """

    beta: float
    symbol_period: float
    span: int = 12

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0):
            raise ConfigError(f"roll-off must be in [0, 1], got {self.beta}")
        if self.symbol_period <= 0:
            raise ConfigError("symbol_period must be positive")
        if self.span < 4 or self.span % 2 != 0:
            raise ConfigError("span must be an even integer >= 4")


@dataclass(frozen=True)
class DiscreteChannel:
    """Sampled FIR channel ``taps[0..L_h)``, optionally unit-energy."""

    taps: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=float))
        object.__setattr__(self, "taps", taps)
        if taps.size < 1:
            raise ConfigError("channel needs at least one tap")
        if taps[0] == 0.0:
            raise ConfigError("leading tap must be nonzero")
        if self.normalized and abs(np.sum(taps**2) - 1.0) > 1e-12:
            raise ConfigError("normalized channel must have unit tap energy")

    def __len__(self) -> int:
        return self.taps.size


def frequency_response(params: MultipathParams, f) -> np.ndarray:
    """Channel frequency response at frequencies ``f`` (Hz, >= 0).

    Sum over paths of ``weight * exp(-(a0 + a1 f^kappa) d) *
    exp(-j 2 pi f d / v_p)``.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ConfigError("frequencies must be >= 0")
    return _response_hermitian(params, f)


def _response_hermitian(params: MultipathParams, f: np.ndarray) -> np.ndarray:
    # even magnitude / odd phase extension, so the impulse response is real
    vp = params.velocity
    out = np.zeros(np.shape(f), dtype=complex)
    for w, d in params.paths:
        att = np.exp(-(params.a0 + params.a1 * np.abs(f) ** params.kappa) * d)
        out = out + w * att * np.exp(-2j * np.pi * f * (d / vp))
    return out


def raised_cosine_impulse(shape: PulseShape, t) -> np.ndarray:
    """Raised-cosine impulse response, peak-normalized to 1 at t = 0.

    Zero outside ``span * symbol_period / 2``; the ``t = T / (2 beta)``
    singularity is evaluated by its analytic limit.
    """
    t = np.asarray(t, dtype=float)
    x = t / shape.symbol_period
    beta = shape.beta
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sinc(x) * np.cos(np.pi * beta * x) / (1.0 - (2.0 * beta * x) ** 2)
    if beta > 0:
        sing = np.isclose(np.abs(x), 1.0 / (2.0 * beta), rtol=0.0, atol=1e-12)
        if np.any(sing):
            out = np.where(sing, (np.pi / 4.0) * np.sinc(1.0 / (2.0 * beta)), out)
    out = np.where(np.abs(t) > shape.span * shape.symbol_period / 2.0, 0.0, out)
    return out if out.ndim else float(out)


def default_time_grid(params: MultipathParams, shape: PulseShape, oversample: int = 16) -> np.ndarray:
    """Uniform grid covering the pulse span plus the maximum path delay.

    Step is ``symbol_period / oversample``; the grid starts at the earliest
    time where the shifted pulse of the first path can be nonzero.
    """
    if oversample < 8:
        raise ResolutionError("need at least 8 samples per symbol period")
    dt = shape.symbol_period / oversample
    half = shape.span * shape.symbol_period / 2.0
    t_lo = -half
    t_hi = params.max_delay + 2.0 * half
    n = int(np.ceil((t_hi - t_lo) / dt)) + 1
    n0 = int(np.round(t_lo / dt))
    return (n0 + np.arange(n)) * dt


def equivalent_impulse_response(
    params: MultipathParams,
    shape: PulseShape,
    grid: np.ndarray,
    method: str = "spectral",
) -> np.ndarray:
    """Impulse response of pulse + multipath channel on a uniform time grid.

    ``method`` selects the computation route: ``"spectral"`` multiplies the
    pulse spectrum with the channel response and inverse-transforms;
    ``"direct"`` inverse-transforms the channel alone and convolves with the
    sampled pulse in the time domain.  Both agree to high accuracy when the
    grid is adequately padded; keeping the two routes makes that checkable.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ResolutionError("grid needs at least two samples")
    steps = np.diff(grid)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ResolutionError("grid must be uniform")
    if dt > shape.symbol_period / 8.0:
        raise ResolutionError(
            f"grid step {dt:g}s gives fewer than 8 samples per symbol period"
        )
    if method not in ("spectral", "direct"):
        raise ConfigError(f"unknown method {method!r}")

    # indices of requested times on the implicit dt lattice anchored at t=0
    idx = grid / dt
    idx_round = np.round(idx).astype(int)
    if np.max(np.abs(idx - idx_round)) > 1e-6:
        raise ResolutionError("grid must lie on a lattice containing t = 0")

    half = shape.span * shape.symbol_period / 2.0
    support_hi = params.max_delay + 2.0 * half
    n_lo = min(idx_round.min(), int(np.floor(-half / dt))) - 1
    n_hi = max(idx_round.max(), int(np.ceil(support_hi / dt))) + 1
    nfft = 1 << int(np.ceil(np.log2(4 * (n_hi - n_lo + 1))))
    freqs = np.fft.fftfreq(nfft, dt)

    # pulse samples in FFT (wrapped) time order: buffer index n <-> time n*dt
    n_pulse = int(np.ceil(half / dt))
    g_buf = np.zeros(nfft)
    k = np.arange(-n_pulse, n_pulse + 1)
    g_buf[k % nfft] = raised_cosine_impulse(shape, k * dt)

    resp = _response_hermitian(params, freqs)
    if method == "spectral":
        ch_buf = np.real(np.fft.ifft(np.fft.fft(g_buf) * resp))
    else:
        hc_buf = np.real(np.fft.ifft(resp))
        g_lin = raised_cosine_impulse(shape, k * dt)
        conv = np.convolve(g_lin, hc_buf)
        # conv index m covers time (m - n_pulse)*dt; fold back onto the buffer
        ch_buf = np.zeros(nfft)
        m = np.arange(conv.size) - n_pulse
        np.add.at(ch_buf, m % nfft, conv)
    return ch_buf[idx_round % nfft]


def discretize(
    ch: np.ndarray,
    grid: np.ndarray,
    symbol_period: float,
    num_taps: int,
    phase: float | None = None,
) -> DiscreteChannel:
    """Sample an impulse response at the symbol rate and normalize energy.

    With ``phase=None`` the sampling comb is anchored at the (interpolated)
    peak of ``|ch|``; an explicit ``phase`` in [0, T) fixes the comb offset
    relative to the grid's time lattice, anchoring at the strongest comb
    sample.  Taps are read by cubic interpolation, so the grid only has to
    resolve the waveform, not the requested instants.
    """
    ch = np.asarray(ch, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if ch.shape != grid.shape:
        raise ValueError("ch and grid must have equal length")
    if num_taps < 1:
        raise ConfigError("num_taps must be >= 1")
    T = float(symbol_period)
    if T <= 0:
        raise ConfigError("symbol_period must be positive")
    if phase is not None and not (0.0 <= phase < T):
        raise ConfigError("phase must lie in [0, T)")
    if not np.any(ch):
        raise DegenerateChannelError("impulse response is identically zero")

    spline = CubicSpline(grid, ch)
    if phase is None:
        t0 = _refined_peak(ch, grid)
    else:
        # strongest sample on the comb {phase + m T} within the grid
        m_lo = int(np.ceil((grid[0] - phase) / T))
        m_hi = int(np.floor((grid[-1] - phase) / T))
        comb = phase + T * np.arange(m_lo, m_hi + 1)
        t0 = comb[int(np.argmax(np.abs(spline(comb))))]

    times = t0 + T * np.arange(num_taps)
    taps = np.where(
        (times >= grid[0]) & (times <= grid[-1]), spline(np.clip(times, grid[0], grid[-1])), 0.0
    )
    energy = np.sum(taps**2)
    if energy == 0.0 or taps[0] == 0.0:
        raise DegenerateChannelError("sampled taps are degenerate")
    return DiscreteChannel(taps=taps / np.sqrt(energy), normalized=True)


def _refined_peak(ch: np.ndarray, grid: np.ndarray) -> float:
    """Sub-sample peak location of |ch| via three-point parabolic fit."""
    a = np.abs(ch)
    p = int(np.argmax(a))
    if p == 0 or p == a.size - 1:
        return grid[p]
    y0, y1, y2 = a[p - 1], a[p], a[p + 1]
    denom = y0 - 2.0 * y1 + y2
    delta = 0.0 if denom == 0.0 else 0.5 * (y0 - y2) / denom
    return grid[p] + delta * (grid[1] - grid[0])


def vvf_4path_params() -> MultipathParams:
    """Four-path VVF-cable reference network (weights, distances in meters)."""
    return MultipathParams(
        paths=((0.64, 200.0), (0.38, 222.4), (-0.15, 244.8), (0.05, 267.5)),
        a0=0.0,
        a1=7.8e-10,
        kappa=1.0,
        epsilon_r=3.17,
    )


def synthesize_discrete_channel(
    params: MultipathParams,
    shape: PulseShape,
    symbol_period: float,
    num_taps: int,
    oversample: int = 16,
    phase: float | None = None,
) -> DiscreteChannel:
    """Full pipeline: grid, equivalent response, symbol-rate discretization."""
    grid = default_time_grid(params, shape, oversample)
    ch = equivalent_impulse_response(params, shape, grid)
    return discretize(ch, grid, symbol_period, num_taps, phase)
