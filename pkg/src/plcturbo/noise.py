"""Gaussian-mixture impulsive noise: sampling, densities, SNR calibration.

The canonical power-line model is a two-term mixture: background noise of
variance ``sigma2`` with probability ``1 - epsilon``, impulses of variance
``K * sigma2`` with probability ``epsilon``.  Everything here is written for
an arbitrary number of weighted components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigError


@dataclass(frozen=True)
class MixtureNoiseParams:
    """Weighted zero-mean Gaussian mixture: ``components[i] = (weight, variance)``."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        comps = tuple((float(w), float(v)) for w, v in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 1:
            raise ConfigError("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            raise ConfigError("component weights must lie in [0, 1]")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ConfigError(f"weights must sum to 1, got {weights.sum()!r}")
        if any(v <= 0.0 for _, v in comps):
            raise ConfigError("component variances must be positive")

    @classmethod
    def from_epsilon_k(cls, epsilon: float, k: float, sigma2: float) -> "MixtureNoiseParams":
        """Two-term model: weights ``(1 - epsilon, epsilon)``, variances
        ``(sigma2, k * sigma2)``.  ``epsilon`` in {0, 1} degenerates to a
        single Gaussian."""
        if not (0.0 <= epsilon <= 1.0):
            raise ConfigError("epsilon must be in [0, 1]")
        if k <= 0 or sigma2 <= 0:
            raise ConfigError("k and sigma2 must be positive")
        if epsilon == 0.0:
            return cls(((1.0, sigma2),))
        if epsilon == 1.0:
            return cls(((1.0, k * sigma2),))
        return cls(((1.0 - epsilon, sigma2), (epsilon, k * sigma2)))

    @property
    def num_components(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def variances(self) -> np.ndarray:
        return np.array([v for _, v in self.components])

    def scaled(self, factor: float) -> "MixtureNoiseParams":
        """Same mixture with every variance multiplied by ``factor``."""
        if factor <= 0:
            raise ConfigError("variance scale must be positive")
        return MixtureNoiseParams(tuple((w, v * factor) for w, v in self.components))


def sample_labeled(params: MixtureNoiseParams, seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` mixture samples plus the component index that produced each.

    The stream is a pure function of ``(params, seed, n)``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    z = rng.standard_normal(n)
    edges = np.cumsum(params.weights)
    labels = np.searchsorted(edges, u, side="right")
    labels = np.minimum(labels, params.num_components - 1)  # guard u == 1.0
    sigmas = np.sqrt(params.variances)
    return z * sigmas[labels], labels


def sample(params: MixtureNoiseParams, seed: int, n: int) -> np.ndarray:
    """Draw ``n`` independent mixture samples; see ``sample_labeled``."""
    return sample_labeled(params, seed, n)[0]


def pdf(params: MixtureNoiseParams, z) -> np.ndarray:
    """Mixture density, strictly positive and even in ``z``."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(np.shape(z))
    for w, v in params.components:
        out = out + w * np.exp(-(z**2) / (2.0 * v)) / np.sqrt(2.0 * np.pi * v)
    return out if out.ndim else float(out)


def log_pdf(params: MixtureNoiseParams, z) -> np.ndarray:
    """Log of the mixture density via log-sum-exp over components."""
    z = np.asarray(z, dtype=float)
    terms = np.stack(
        [
            np.log(w) - 0.5 * np.log(2.0 * np.pi * v) - z**2 / (2.0 * v)
            for w, v in params.components
            if w > 0.0
        ]
    )
    out = special.logsumexp(terms, axis=0)
    return out if np.ndim(out) else float(out)


def cdf(params: MixtureNoiseParams, z) -> np.ndarray:
    """Mixture cumulative distribution function."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(np.shape(z))
    for w, v in params.components:
        out = out + w * 0.5 * (1.0 + special.erf(z / np.sqrt(2.0 * v)))
    return out if out.ndim else float(out)


def effective_variance(params: MixtureNoiseParams) -> float:
    """Mixture-weighted total variance, ``sum_i w_i sigma_i^2``."""
    return float(np.dot(params.weights, params.variances))


def snr_to_params(
    snr_db: float, signal_power: float = 1.0, epsilon: float = 0.0, k: float = 1.0
) -> MixtureNoiseParams:
    """Two-term mixture whose effective variance realizes the requested SNR.

    Solves ``signal_power / effective_variance = 10^(snr_db / 10)`` for the
    background variance, keeping the ``(epsilon, k)`` impulse structure.
    """
    if signal_power <= 0:
        raise ConfigError("signal power must be positive")
    target = signal_power * 10.0 ** (-snr_db / 10.0)
    scale = (1.0 - epsilon) + epsilon * k
    return MixtureNoiseParams.from_epsilon_k(epsilon, k, target / scale)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Fixed derivation rule for per-worker / per-frame substreams.

    ``SeedSequence([master_seed, *indices])`` hashed to one 64-bit word;
    distinct index paths give statistically independent streams.  All
    parallel work items (frames, EXIT grid points) seed through this rule,
    so results never depend on worker scheduling.
    """
    ss = np.random.SeedSequence([int(master_seed), *[int(i) for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
