"""Independent reference implementations used as test oracles.

Everything here is deliberately written from first principles (plain loops,
scipy densities, exhaustive enumeration) and never calls into the package's
own decoding or synthesis paths.
"""

import itertools

import numpy as np
from scipy import stats


def reference_rsc_encode(ff_taps, fb_taps, bits, memory):
    """Bit-level RSC shift-register simulation; returns (sys, parity, register)."""
    reg = [0] * memory
    sys_out, par_out = [], []
    for u in bits:
        w = u
        for k in range(1, memory + 1):
            w ^= fb_taps[k] * reg[k - 1]
        p = ff_taps[0] * w
        for k in range(1, memory + 1):
            p ^= ff_taps[k] * reg[k - 1]
        sys_out.append(int(u))
        par_out.append(p & 1)
        reg = [w & 1] + reg[:-1]
    return sys_out, par_out, reg


def reference_rsc_terminate(ff_taps, fb_taps, reg, memory):
    """Tail inputs that drive the register to zero, with their outputs."""
    sys_out, par_out = [], []
    for _ in range(memory):
        u = 0
        for k in range(1, memory + 1):
            u ^= fb_taps[k] * reg[k - 1]
        w = 0  # u cancels the feedback
        p = 0
        for k in range(1, memory + 1):
            p ^= ff_taps[k] * reg[k - 1]
        sys_out.append(u & 1)
        par_out.append(p & 1)
        reg = [w] + reg[:-1]
    assert all(r == 0 for r in reg)
    return sys_out, par_out


def reference_precode(fb_taps, bits):
    """y[n] = x[n] xor sum_k fb_k y[n-k]."""
    out = []
    for n, x in enumerate(bits):
        y = int(x)
        for k in range(1, len(fb_taps)):
            if fb_taps[k] and n - k >= 0:
                y ^= out[n - k]
        out.append(y)
    return out


def mixture_logpdf(weights, variances, z):
    dens = np.zeros(np.shape(z))
    for w, v in zip(weights, variances):
        dens = dens + w * stats.norm.pdf(z, scale=np.sqrt(v))
    return np.log(dens)


def log_prior(llr, bit):
    """log P(bit) for LLR = log P(1)/P(0)."""
    return -np.logaddexp(0.0, -llr) if bit == 1 else -np.logaddexp(0.0, llr)


def enumerate_channel_posteriors(
    y, taps, weights, variances, apriori, precoder_taps=None
):
    """Exact bit posterior LLRs of a (precoded) ISI channel by enumeration.

    Walks all 2^N input sequences, maps through the optional precoder and a
    zero-padded convolution, scores against the mixture density and priors.
    """
    n = len(y)
    log_joint_one = np.full(n, -np.inf)
    log_joint_zero = np.full(n, -np.inf)
    for bits in itertools.product((0, 1), repeat=n):
        chan_bits = (
            reference_precode(precoder_taps, bits) if precoder_taps is not None else bits
        )
        symbols = 1.0 - 2.0 * np.asarray(chan_bits, dtype=float)
        clean = np.convolve(symbols, taps)[:n]
        ll = float(np.sum(mixture_logpdf(weights, variances, np.asarray(y) - clean)))
        ll += sum(log_prior(apriori[k], bits[k]) for k in range(n))
        for k in range(n):
            if bits[k] == 1:
                log_joint_one[k] = np.logaddexp(log_joint_one[k], ll)
            else:
                log_joint_zero[k] = np.logaddexp(log_joint_zero[k], ll)
    return log_joint_one - log_joint_zero


def enumerate_codeword_posteriors(ff_taps, fb_taps, memory, n_info, la_sys, la_par):
    """Exact posteriors for a terminated RSC code fed only by coded-bit LLRs.

    Returns (info LLRs, systematic-bit LLRs, parity-bit LLRs) over all
    2^n_info codewords.
    """
    n = n_info + memory
    info_one = np.full(n_info, -np.inf)
    info_zero = np.full(n_info, -np.inf)
    sys_one = np.full(n, -np.inf)
    sys_zero = np.full(n, -np.inf)
    par_one = np.full(n, -np.inf)
    par_zero = np.full(n, -np.inf)
    for bits in itertools.product((0, 1), repeat=n_info):
        s, p, reg = reference_rsc_encode(ff_taps, fb_taps, bits, memory)
        s_t, p_t = reference_rsc_terminate(ff_taps, fb_taps, reg, memory)
        sys_all = s + s_t
        par_all = p + p_t
        ll = sum(log_prior(la_sys[k], sys_all[k]) for k in range(n))
        ll += sum(log_prior(la_par[k], par_all[k]) for k in range(n))
        for k in range(n_info):
            if bits[k] == 1:
                info_one[k] = np.logaddexp(info_one[k], ll)
            else:
                info_zero[k] = np.logaddexp(info_zero[k], ll)
        for k in range(n):
            if sys_all[k] == 1:
                sys_one[k] = np.logaddexp(sys_one[k], ll)
            else:
                sys_zero[k] = np.logaddexp(sys_zero[k], ll)
            if par_all[k] == 1:
                par_one[k] = np.logaddexp(par_one[k], ll)
            else:
                par_zero[k] = np.logaddexp(par_zero[k], ll)
    return info_one - info_zero, sys_one - sys_zero, par_one - par_zero
