# The two-term Gaussian mixture noise model: mostly background noise,
# occasionally a K-times-stronger impulse. Samples, density, calibration.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plcturbo import MixtureNoiseParams, effective_variance, pdf, sample_labeled, snr_to_params

params = MixtureNoiseParams.from_epsilon_k(epsilon=0.1, k=100.0, sigma2=1.0)
print("component weights:  ", params.weights)
print("component variances:", params.variances)
print("effective variance: ", effective_variance(params))  # (1-eps)+eps*K = 10.9

x, labels = sample_labeled(params, seed=42, n=200_000)
print(f"impulse fraction observed: {labels.mean():.4f}")
print(f"sample variance: {x.var():.3f}")

# calibrating the background variance so the mixture hits a target SNR
for snr in (0.0, -5.0):
    p = snr_to_params(snr, signal_power=1.0, epsilon=0.1, k=100.0)
    print(f"snr {snr:+.0f} dB -> background sigma^2 = {p.variances[0]:.4f}")

fig, axes = plt.subplots(1, 2, figsize=(11, 3.6))
axes[0].plot(x[:3000])
axes[0].set_title("mixture noise stream (impulses visible)")
axes[0].set_xlabel("n")

z = np.linspace(-12, 12, 800)
axes[1].hist(x, bins=300, range=(-12, 12), density=True, alpha=0.5, label="samples")
axes[1].plot(z, pdf(params, z), "k", lw=1.2, label="mixture pdf")
axes[1].set_yscale("log")
axes[1].set_ylim(1e-5, 1)
axes[1].legend()
axes[1].set_title("heavy-tailed density")

fig.tight_layout()
fig.savefig("impulsive_noise.png", dpi=120)
print("wrote impulsive_noise.png")
