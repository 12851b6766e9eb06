"""Soft-input soft-output MAP (BCJR) decoding over any trellis.

Log-domain throughout with exact log-sum-exp, so posteriors are MAP-exact
up to floating point.  The channel metric is pluggable: a plain Gaussian,
or a Gaussian mixture matched to impulsive noise.  LLR convention is
``log P(bit = 1) / P(bit = 0)`` everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NumericalDegeneracyError
from .noise import MixtureNoiseParams
from .trellis import Trellis

LLR_CLAMP = 50.0


@dataclass(frozen=True)
class GaussianMetric:
    """White Gaussian channel metric with the given noise variance."""

    variance: float

    def log_weights(self) -> np.ndarray:
        return np.zeros(1)

    def variances(self) -> np.ndarray:
        return np.array([self.variance])


@dataclass(frozen=True)
class MixtureMetric:
    """Mixture-matched channel metric for Gaussian-mixture noise."""

    params: MixtureNoiseParams

    def log_weights(self) -> np.ndarray:
        w = self.params.weights
        keep = w > 0.0
        return np.log(w[keep])

    def variances(self) -> np.ndarray:
        return self.params.variances[self.params.weights > 0.0]


ChannelMetric = GaussianMetric | MixtureMetric


def _observation_loglik(metric: ChannelMetric, residual: np.ndarray) -> np.ndarray:
    """log p(residual) under the metric's (mixture) density, any shape."""
    lw = metric.log_weights()
    vs = metric.variances()
    acc = None
    for j in range(lw.size):
        term = lw[j] - 0.5 * np.log(2.0 * np.pi * vs[j]) - residual**2 / (2.0 * vs[j])
        acc = term if acc is None else np.logaddexp(acc, term)
    return acc


def prior_log_probs(apriori_llr: np.ndarray) -> np.ndarray:
    """(N, 2) array of log P(bit=0), log P(bit=1) from LLRs."""
    llr = np.asarray(apriori_llr, dtype=float)
    out = np.empty((llr.size, 2))
    out[:, 0] = -np.logaddexp(0.0, llr)
    out[:, 1] = -np.logaddexp(0.0, -llr)
    return out


def branch_metric(
    metric: ChannelMetric, y: float, x: float, apriori_llr: float, input_bit: int
) -> float:
    """Log branch metric: prior of the input bit plus observation likelihood."""
    lp = prior_log_probs(np.array([apriori_llr]))[0, input_bit]
    return float(lp + _observation_loglik(metric, np.asarray(y - x)))


@njit(cache=True)
def _lse2(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a < b:
        a, b = b, a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def _forward_backward(gamma, next_state, alpha0, beta_end):
    """Normalized log-domain alpha/beta over (N, S, 2) branch metrics.

    Returns (alpha, beta, bad_step); ``bad_step >= 0`` flags a step where
    every path metric collapsed to -inf.
    """
    n, s_count, _ = gamma.shape
    alpha = np.full((n + 1, s_count), -np.inf)
    beta = np.full((n + 1, s_count), -np.inf)
    alpha[0] = alpha0
    beta[n] = beta_end
    for k in range(n):
        for s in range(s_count):
            a = alpha[k, s]
            if a == -np.inf:
                continue
            for b in range(2):
                t = next_state[s, b]
                alpha[k + 1, t] = _lse2(alpha[k + 1, t], a + gamma[k, s, b])
        mx = np.max(alpha[k + 1])
        if mx == -np.inf:
            return alpha, beta, k
        alpha[k + 1] -= mx
    for k in range(n - 1, -1, -1):
        for s in range(s_count):
            acc = -np.inf
            for b in range(2):
                t = next_state[s, b]
                bb = beta[k + 1, t]
                if bb != -np.inf:
                    acc = _lse2(acc, bb + gamma[k, s, b])
            beta[k, s] = acc
        mx = np.max(beta[k])
        if mx == -np.inf:
            return alpha, beta, k
        beta[k] -= mx
    return alpha, beta, -1


@njit(cache=True)
def _branch_llrs(gamma, next_state, alpha, beta, labels):
    """Posterior LLRs for each branch labeling in ``labels`` (M, S, 2)."""
    n, s_count, _ = gamma.shape
    m_count = labels.shape[0]
    llrs = np.empty((m_count, n))
    for k in range(n):
        for j in range(m_count):
            num = -np.inf
            den = -np.inf
            for s in range(s_count):
                a = alpha[k, s]
                if a == -np.inf:
                    continue
                for b in range(2):
                    t = next_state[s, b]
                    v = a + gamma[k, s, b] + beta[k + 1, t]
                    if labels[j, s, b] == 1:
                        num = _lse2(num, v)
                    else:
                        den = _lse2(den, v)
            llrs[j, k] = num - den
    return llrs


def _run_map(gamma, next_state, alpha0, beta_end, labels):
    alpha, beta, bad = _forward_backward(gamma, next_state, alpha0, beta_end)
    if bad >= 0:
        raise NumericalDegeneracyError(f"all branch metrics -inf at step {bad}")
    return _branch_llrs(gamma, next_state, alpha, beta, labels)


def _input_labels(trellis: Trellis) -> np.ndarray:
    lab = np.zeros((1, trellis.num_states, 2), dtype=np.int8)
    lab[0, :, 1] = 1
    return lab


def clamp_llrs(llrs: np.ndarray) -> np.ndarray:
    return np.clip(llrs, -LLR_CLAMP, LLR_CLAMP)


def bcjr_decode(
    trellis: Trellis,
    observations: np.ndarray,
    metric: ChannelMetric,
    apriori: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """MAP decode a channel trellis from real observations.

    The forward recursion starts in state 0 (the transmitter's start
    state); the backward recursion starts uniform (unterminated channel).
    Returns ``(extrinsic, aposteriori)`` LLRs of the trellis input bits,
    with ``extrinsic = aposteriori - apriori``.
    """
    y = np.asarray(observations, dtype=float)
    if apriori is None:
        apriori = np.zeros(y.size)
    apriori = clamp_llrs(np.asarray(apriori, dtype=float))
    if apriori.size != y.size:
        raise ValueError("apriori length must match observations")

    residual = y[:, None, None] - trellis.outputs[None, :, :, 0]
    w = min(trellis.warmup, y.size)
    if w:
        residual[:w] = y[:w, None, None] - trellis.startup_outputs[:w, :, :, 0]
    gamma = _observation_loglik(metric, residual)
    lp = prior_log_probs(apriori)
    gamma = gamma + lp[:, None, :]

    s_count = trellis.num_states
    alpha0 = np.full(s_count, -np.inf)
    alpha0[0] = 0.0
    beta_end = np.zeros(s_count)
    llrs = _run_map(gamma, trellis.next_state, alpha0, beta_end, _input_labels(trellis))
    # subtract the prior from the raw posterior before clamping: clamping
    # first would zero (or flip) the extrinsic wherever the posterior
    # saturates, destabilizing the iteration at high SNR
    extrinsic = clamp_llrs(llrs[0] - apriori)
    aposteriori = clamp_llrs(llrs[0])
    return extrinsic, aposteriori


def decode_outer(
    trellis: Trellis,
    apriori_systematic: np.ndarray,
    apriori_parity: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """BCJR on a terminated rate-1/2 code trellis fed only by LLRs.

    Branch metrics come purely from the coded-bit a-prioris (the outer
    decoder never sees channel observations); alpha starts and beta ends in
    state 0.  Returns the multiplexed codeword extrinsic
    ``[sys_0, par_0, sys_1, par_1, ...]`` and the input-bit a-posterioris.
    """
    la_s = clamp_llrs(np.asarray(apriori_systematic, dtype=float))
    la_p = clamp_llrs(np.asarray(apriori_parity, dtype=float))
    if la_s.size != la_p.size:
        raise ValueError("systematic/parity LLR frames must have equal length")

    sys_bits = trellis.outputs[:, :, 0].astype(np.int64)
    par_bits = trellis.outputs[:, :, 1].astype(np.int64)
    lp_s = prior_log_probs(la_s)
    lp_p = prior_log_probs(la_p)
    gamma = lp_s[:, sys_bits] + lp_p[:, par_bits]

    s_count = trellis.num_states
    boundary = np.full(s_count, -np.inf)
    boundary[0] = 0.0
    labels = np.zeros((3, s_count, 2), dtype=np.int8)
    labels[0, :, 1] = 1
    labels[1] = sys_bits
    labels[2] = par_bits
    llrs = _run_map(gamma, trellis.next_state, boundary, boundary.copy(), labels)

    info_aposteriori = clamp_llrs(llrs[0])
    ext_sys = clamp_llrs(llrs[1] - la_s)
    ext_par = clamp_llrs(llrs[2] - la_p)
    extrinsic = np.empty(2 * la_s.size)
    extrinsic[0::2] = ext_sys
    extrinsic[1::2] = ext_par
    return extrinsic, info_aposteriori
