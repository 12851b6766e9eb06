# Build the 4-path VVF power-line channel from its physical description,
# shape it with a raised-cosine pulse, and sample the result at the
# transmission rate to get the discrete taps used everywhere else.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plcturbo import (
    PulseShape,
    default_time_grid,
    discretize,
    equivalent_impulse_response,
    frequency_response,
    vvf_4path_params,
)

params = vvf_4path_params()
print("paths (weight, distance):", params.paths)
print(f"propagation velocity: {params.velocity/1e8:.4f} x 1e8 m/s")
print(f"first-path delay: {params.paths[0][1]/params.velocity*1e6:.3f} us")

# frequency response over the band the model was fitted on
f = np.linspace(0.5e6, 20e6, 2000)
H = frequency_response(params, f)

# the transmit pulse: beta = 0.7 raised cosine whose two-sided band fills
# the 20 MHz model span (85 ns would be exact; 80 ns reproduces the
# published tap set best and is what the shipped preset uses)
pulse = PulseShape(beta=0.7, symbol_period=80e-9, span=12)
grid = default_time_grid(params, pulse, oversample=16)
ch = equivalent_impulse_response(params, pulse, grid)

# sample at the 1/0.15us transmission rate, peak-aligned, 4 taps
T = 0.15e-6
disc = discretize(ch, grid, T, num_taps=4)
print("discrete taps:", np.round(disc.taps, 4))
print("tap energy:", np.sum(disc.taps**2))

fig, axes = plt.subplots(1, 3, figsize=(14, 3.6))
axes[0].plot(f / 1e6, 20 * np.log10(np.abs(H)))
axes[0].set_xlabel("f [MHz]")
axes[0].set_ylabel("|H(f)| [dB]")
axes[0].set_title("multipath frequency response")

axes[1].plot(grid * 1e6, ch)
axes[1].set_xlim(1.0, 2.2)
axes[1].set_xlabel("t [us]")
axes[1].set_title("equivalent impulse response")

axes[2].stem(np.arange(4), disc.taps)
axes[2].set_xlabel("k")
axes[2].set_title("normalized symbol-rate taps")

fig.tight_layout()
fig.savefig("channel_synthesis.png", dpi=120)
print("wrote channel_synthesis.png")
