# The mixture-matched MAP equalizer vs a conventional Gaussian one on the
# same impulsive observations. The Gaussian metric lumps impulses into one
# big variance and ends up underconfident on the 90+% of samples that are
# actually clean; the matched metric stays sharp on clean samples and
# hedges only where an impulse plausibly struck.

import numpy as np

from plcturbo import (
    BinaryPolynomial,
    DiscreteChannel,
    GaussianMetric,
    MixtureMetric,
    bcjr_decode,
    build_precoded_isi_trellis,
    channel_output,
    effective_variance,
    sample_labeled,
    snr_to_params,
)

taps = np.array([0.8709, 0.4758, -0.1153, 0.0435])
ch = DiscreteChannel(taps / np.linalg.norm(taps))
trellis = build_precoded_isi_trellis(BinaryPolynomial.parse("1+D^3"), ch)

rng = np.random.default_rng(1)
bits = rng.integers(0, 2, 4000)
clean = channel_output(trellis, bits)

noise_params = snr_to_params(0.0, 1.0, epsilon=0.05, k=100.0)
z, labels = sample_labeled(noise_params, seed=9, n=bits.size)
y = clean + z

matched, _ = bcjr_decode(trellis, y, MixtureMetric(noise_params))
plain, _ = bcjr_decode(trellis, y, GaussianMetric(effective_variance(noise_params)))

for name, llr in (("mixture-matched", matched), ("gaussian", plain)):
    hard = (llr > 0).astype(int)
    ber = np.mean(hard != bits)
    print(f"{name:16s} raw-decision BER {ber:.4f}")

hit = labels == 1
print(f"\nimpulse-struck positions: {hit.sum()}")
print(f"matched  metric mean |LLR|: clean {np.abs(matched[~hit]).mean():5.2f}   struck {np.abs(matched[hit]).mean():5.2f}")
print(f"gaussian metric mean |LLR|: clean {np.abs(plain[~hit]).mean():5.2f}   struck {np.abs(plain[hit]).mean():5.2f}")
print("matched: confident where the channel is clean, hedged where it is not;")
print("gaussian: one blanket variance, so clean samples are wasted")
