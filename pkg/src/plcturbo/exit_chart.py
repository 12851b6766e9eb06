"""EXIT-chart machinery: the J-function, mutual-information estimators
(pooled histogram and mixture-decomposed), SISO transfer curves, and the
open-tunnel check used for precoder selection.

The consistent-Gaussian LLR model ties mean and variance as
``variance = 2 * mean``; J maps its standard deviation to mutual
information by numerical quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import noise as noise_mod, siso, trellis as trellis_mod
from .errors import ConfigError
from .noise import MixtureNoiseParams, derive_seed
from .siso import LLR_CLAMP
from .trellis import BinaryPolynomial, Trellis

# odd bin count keeps the zero-LLR bin its own mirror image, so an
# all-zero frame measures 0 bit of information instead of 1
HISTOGRAM_BINS = 201
DEFAULT_SAMPLES = 200_000


def gaussian_llr_mi(mu: float, sigma: float) -> float:
    """Mutual information of an LLR distributed N(mu, sigma^2) vs its bit.

    ``1 - E[log2(1 + exp(-L))]`` by adaptive quadrature; the consistent
    model is the special case ``mu = sigma^2 / 2``.
    """
    if sigma <= 0.0:
        return 0.0 if mu == 0.0 else float(mu > 0.0)
    lo, hi = mu - 12.0 * sigma, mu + 12.0 * sigma

    def integrand(l):
        return (
            np.exp(-((l - mu) ** 2) / (2.0 * sigma**2))
            / np.sqrt(2.0 * np.pi)
            / sigma
            * np.logaddexp(0.0, -l)
        ) / np.log(2.0)

    val, _ = quad(integrand, lo, hi, limit=400)
    return float(np.clip(1.0 - val, 0.0, 1.0))


def j_function(sigma: float) -> float:
    """Mutual information of a consistent-Gaussian LLR with std ``sigma``."""
    if sigma < 0.0:
        raise ConfigError("sigma must be >= 0")
    if sigma == 0.0:
        return 0.0
    return gaussian_llr_mi(sigma**2 / 2.0, sigma)


def j_inverse(mi: float) -> float:
    """Inverse of :func:`j_function` on [0, 1) by monotone root finding."""
    if not (0.0 <= mi < 1.0):
        raise ConfigError("j_inverse requires 0 <= I < 1")
    if mi == 0.0:
        return 0.0
    hi = 1.0
    while j_function(hi) < mi:
        hi *= 2.0
        if hi > 128.0:
            raise ConfigError(f"no sigma found for I = {mi}")
    return float(brentq(lambda s: j_function(s) - mi, 0.0, hi, xtol=1e-9))


def generate_apriori(i_a: float, bits: np.ndarray, seed: int) -> np.ndarray:
    """Synthetic a-priori LLRs at mutual information ``i_a`` for given bits.

    Consistent-Gaussian model: N(+mu, 2 mu) for bit 1, N(-mu, 2 mu) for
    bit 0, with ``mu = j_inverse(i_a)^2 / 2``.
    """
    bits = np.asarray(bits, dtype=np.int64)
    sigma = j_inverse(i_a)
    mu = sigma**2 / 2.0
    rng = np.random.default_rng(seed)
    signs = np.where(bits == 1, 1.0, -1.0)
    return signs * mu + rng.standard_normal(bits.size) * sigma


def _fold_to_reference(llrs: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Map all LLRs to the bit-0 conditional via the symmetry
    p(L | 1) = p(-L | 0)."""
    llrs = np.asarray(llrs, dtype=float)
    truth = np.asarray(truth, dtype=np.int64)
    if llrs.size != truth.size:
        raise ValueError("llrs and truth must have equal length")
    return np.where(truth == 1, -llrs, llrs)


def mi_histogram(llrs: np.ndarray, truth: np.ndarray, bins: int = HISTOGRAM_BINS) -> float:
    """Histogram estimate of the bit/LLR mutual information, in [0, 1].

    Folds by channel symmetry, bins over [-clamp, clamp] with one count of
    Laplace smoothing, and evaluates the symmetrized divergence sum.
    """
    folded = np.clip(_fold_to_reference(llrs, truth), -LLR_CLAMP, LLR_CLAMP)
    if folded.size < 10_000:
        warnings.warn("fewer than 1e4 samples; MI estimate may be noisy", stacklevel=2)
    counts, _ = np.histogram(folded, bins=bins, range=(-LLR_CLAMP, LLR_CLAMP))
    # one pseudo-count spread over all bins: keeps log ratios finite with a
    # bias of order 1/N rather than bins/N
    p = (counts + 1.0 / bins) / (counts.sum() + 1.0)
    q = p[::-1]  # density at the mirrored LLR
    mi = np.sum(p * np.log2(2.0 * p / (p + q)))
    return float(np.clip(mi, 0.0, 1.0))


@dataclass(frozen=True)
class ComponentFit:
    """Gaussian fit and sub-population MI of one mixture component."""

    weight: float
    count: int
    mean: float
    variance: float
    mi: float


@dataclass(frozen=True)
class MixtureMi:
    """Mixture-decomposed MI: weighted sum plus per-component diagnostics."""

    mi: float
    components: tuple[ComponentFit, ...]


def mi_mixture(
    llrs: np.ndarray,
    truth: np.ndarray,
    component_labels: np.ndarray,
    method: str = "histogram",
    min_samples: int = 100,
) -> MixtureMi:
    """MI decomposed over the noise components that struck each position.

    Each component's MI is estimated on its sub-population (histogram by
    default, or a two-moment Gaussian fit with ``method="gaussian"``); the
    total is the component-probability weighted sum.  Components with fewer
    than ``min_samples`` positions fall back to the pooled estimate.
    """
    if method not in ("histogram", "gaussian"):
        raise ConfigError(f"unknown estimator {method!r}")
    llrs = np.asarray(llrs, dtype=float)
    truth = np.asarray(truth, dtype=np.int64)
    labels = np.asarray(component_labels, dtype=np.int64)
    if not (llrs.size == truth.size == labels.size):
        raise ValueError("llrs, truth and component_labels must align")

    pooled = mi_histogram(llrs, truth)
    total = 0.0
    fits = []
    for lab in np.unique(labels):
        sel = labels == lab
        count = int(sel.sum())
        weight = count / llrs.size
        folded = _fold_to_reference(llrs[sel], truth[sel])
        mean = float(np.mean(folded))
        var = float(np.var(folded))
        if count < min_samples:
            warnings.warn(
                f"component {lab} has {count} samples; using pooled MI", stacklevel=2
            )
            mi_i = pooled
        elif method == "histogram":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mi_i = mi_histogram(llrs[sel], truth[sel])
        else:
            # folded view conditions on bit 0, where a correct LLR is
            # negative; flip the mean back to the bit-1 orientation
            mi_i = gaussian_llr_mi(-mean, np.sqrt(var))
        fits.append(ComponentFit(weight, count, mean, var, mi_i))
        total += weight * mi_i
    return MixtureMi(mi=float(np.clip(total, 0.0, 1.0)), components=tuple(fits))


@dataclass(frozen=True)
class ExitCurve:
    """Transfer curve: output MI ``i_e`` over the a-priori grid ``i_a``."""

    i_a: np.ndarray
    i_e: np.ndarray
    label: str
    snr_db: float | None = None

    def __post_init__(self):
        ia = np.asarray(self.i_a, dtype=float)
        ie = np.asarray(self.i_e, dtype=float)
        object.__setattr__(self, "i_a", ia)
        object.__setattr__(self, "i_e", ie)
        if ia.size != ie.size:
            raise ConfigError("grid and values must align")
        if np.any(np.diff(ia) <= 0):
            raise ConfigError("i_a grid must be strictly increasing")
        if np.any((ia < 0) | (ia > 1)) or np.any((ie < 0) | (ie > 1)):
            raise ConfigError("mutual information values must lie in [0, 1]")


def default_grid(step: float = 0.05) -> np.ndarray:
    return np.round(np.arange(0.0, 1.0 - 1e-9, step), 10)


def inner_exit_point(
    trellis: Trellis,
    noise: MixtureNoiseParams,
    metric: siso.ChannelMetric,
    i_a: float,
    num_bits: int,
    seed: int,
) -> float:
    """One Monte-Carlo point of the equalizer transfer curve.

    Random channel-input bits, noisy observations, synthetic a-prioris at
    ``i_a``, one BCJR pass, then mixture-decomposed MI of the extrinsic
    output using the true noise-component labels.  Grid points are
    independent work items, seeded individually.
    """
    bits = np.random.default_rng(derive_seed(seed, 0)).integers(0, 2, num_bits)
    clean = trellis_mod.channel_output(trellis, bits)
    z, labels = noise_mod.sample_labeled(noise, derive_seed(seed, 1), num_bits)
    apriori = generate_apriori(i_a, bits, derive_seed(seed, 2))
    extrinsic, _ = siso.bcjr_decode(trellis, clean + z, metric, apriori)
    return mi_mixture(extrinsic, bits, labels).mi


def inner_exit_curve(
    trellis: Trellis,
    noise: MixtureNoiseParams,
    metric: siso.ChannelMetric,
    i_a_grid: np.ndarray | None = None,
    num_bits: int = DEFAULT_SAMPLES,
    seed: int = 0,
    label: str = "inner",
    snr_db: float | None = None,
) -> ExitCurve:
    """Monte-Carlo transfer curve of the (precoded) channel equalizer."""
    grid = default_grid() if i_a_grid is None else np.asarray(i_a_grid, dtype=float)
    if num_bits < 10_000:
        warnings.warn("EXIT sample budget below 1e4 bits per point", stacklevel=2)
    i_e = np.array(
        [
            inner_exit_point(trellis, noise, metric, i_a, num_bits, derive_seed(seed, i))
            for i, i_a in enumerate(grid)
        ]
    )
    return ExitCurve(i_a=grid, i_e=i_e, label=label, snr_db=snr_db)


def outer_exit_point(
    code: Trellis, i_a: float, num_bits: int, seed: int
) -> float:
    """One Monte-Carlo point of the outer decoder transfer curve."""
    memory = int(np.log2(code.num_states))
    n_info = max(num_bits // 2 - memory, 8)
    u = np.random.default_rng(derive_seed(seed, 0)).integers(0, 2, n_info)
    coded = trellis_mod.encode_rsc(code, u)
    apriori = generate_apriori(i_a, coded, derive_seed(seed, 1))
    extrinsic, _ = siso.decode_outer(code, apriori[0::2], apriori[1::2])
    return mi_histogram(extrinsic, coded)


def outer_exit_curve(
    feedforward: BinaryPolynomial,
    feedback: BinaryPolynomial,
    i_a_grid: np.ndarray | None = None,
    num_bits: int = DEFAULT_SAMPLES,
    seed: int = 0,
    label: str = "outer",
) -> ExitCurve:
    """Monte-Carlo transfer curve of the outer decoder over coded-bit LLRs.

    By convention the outer curve is plotted on swapped axes; this function
    returns plain (I_A, I_E) and the plotting layer swaps.
    """
    grid = default_grid() if i_a_grid is None else np.asarray(i_a_grid, dtype=float)
    code = trellis_mod.build_rsc_trellis(feedforward, feedback)
    i_e = np.array(
        [
            outer_exit_point(code, i_a, num_bits, derive_seed(seed, i))
            for i, i_a in enumerate(grid)
        ]
    )
    return ExitCurve(i_a=grid, i_e=i_e, label=label)


@dataclass(frozen=True)
class TunnelReport:
    open_tunnel: bool
    pinch_i_a: float | None = None
    min_gap: float = field(default=np.nan)


def tunnel_check(inner: ExitCurve, outer: ExitCurve) -> TunnelReport:
    """Open-tunnel verdict between an equalizer curve and a decoder curve.

    In chart coordinates the outer curve is drawn inverted; the tunnel is
    open iff the inner curve lies strictly above the inverted outer curve
    at every grid point of the inner curve.
    """
    # invert the outer curve: x = I_E_outer -> y = I_A_outer
    x = np.asarray(outer.i_e, dtype=float)
    y = np.asarray(outer.i_a, dtype=float)
    x_mono = np.maximum.accumulate(x)
    keep = np.concatenate(([True], np.diff(x_mono) > 0))
    outer_inv = np.interp(
        inner.i_a, x_mono[keep], y[keep], left=y[keep][0], right=y[keep][-1]
    )
    gap = inner.i_e - outer_inv
    bad = np.nonzero(gap <= 0.0)[0]
    if bad.size:
        return TunnelReport(False, float(inner.i_a[bad[0]]), float(gap.min()))
    return TunnelReport(True, None, float(gap.min()))
