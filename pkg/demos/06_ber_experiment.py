# A miniature Monte-Carlo BER experiment straight from the library (the
# plcturbo CLI does the same at scale with a worker pool and CSV output).
# Compares the precoded mixture-matched receiver with the no-precoder one.

import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plcturbo import (
    BinaryPolynomial,
    PulseShape,
    SystemConfig,
    TurboSystem,
    derive_seed,
    snr_to_params,
    synthesize_discrete_channel,
    vvf_4path_params,
)

ch = synthesize_discrete_channel(vvf_4path_params(), PulseShape(0.7, 80e-9), 0.15e-6, 4)
ff = BinaryPolynomial.parse("1+D+D^2+D^3")
fb = BinaryPolynomial.parse("1+D+D^3")


def ber_point(snr_db, precoder, max_frames=60, min_errors=40):
    cfg = SystemConfig(
        n_info=1024,
        outer_feedforward=ff,
        outer_feedback=fb,
        channel=ch,
        noise=snr_to_params(snr_db, 1.0, 0.1, 100.0),
        precoder=precoder,
        metric="mixture",
        n_iterations=8,
        interleaver_seed=77,
    )
    system = TurboSystem(cfg)
    bits = errors = 0
    for i in range(max_frames):
        r = system.run_frame(derive_seed(11, int(snr_db * 4), i))
        bits += r.n_info
        errors += r.bit_errors
        if errors >= min_errors:
            break
    return errors / bits


snrs = np.arange(-7.0, -3.9, 0.5)
t0 = time.time()
curves = {}
for name, pre in (("precoded 1/(1+D^3)", BinaryPolynomial.parse("1+D^3")), ("no precoder", None)):
    curves[name] = [ber_point(s, pre) for s in snrs]
    print(name, ["%.2e" % b for b in curves[name]])
print(f"({time.time()-t0:.0f}s)")

fig, ax = plt.subplots(figsize=(6, 4.5))
for name, bers in curves.items():
    ax.semilogy(snrs, np.maximum(bers, 1e-6), marker="o", label=name)
ax.set_xlabel("SNR [dB]")
ax.set_ylabel("BER")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig("ber_curves.png", dpi=120)
print("wrote ber_curves.png")
