# EXIT-chart precoder selection: transfer curves of the equalizer for
# several rate-1 precoders against the outer decoder curve (drawn on
# swapped axes). An open tunnel predicts that iterations converge.
# Small sample budget here so the demo runs in about a minute.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plcturbo import (
    BinaryPolynomial,
    MixtureMetric,
    build_precoded_isi_trellis,
    inner_exit_curve,
    outer_exit_curve,
    snr_to_params,
    synthesize_discrete_channel,
    tunnel_check,
    vvf_4path_params,
    PulseShape,
)

ch = synthesize_discrete_channel(vvf_4path_params(), PulseShape(0.7, 80e-9), 0.15e-6, 4)
ff = BinaryPolynomial.parse("1+D+D^2+D^3")
fb = BinaryPolynomial.parse("1+D+D^3")

snr_db = -6.5  # near the convergence threshold for this noise
noise = snr_to_params(snr_db, 1.0, epsilon=0.1, k=100.0)
metric = MixtureMetric(noise)
grid = np.round(np.arange(0.0, 0.99, 0.1), 10)

outer = outer_exit_curve(ff, fb, grid, num_bits=60_000, seed=5)

fig, ax = plt.subplots(figsize=(6, 5.5))
ax.plot(outer.i_e, outer.i_a, "k--", lw=2, label="outer code (swapped axes)")

for text in ("1+D", "1+D^2", "1+D+D^2", "1+D^3"):
    poly = BinaryPolynomial.parse(text)
    trellis = build_precoded_isi_trellis(poly, ch)
    curve = inner_exit_curve(trellis, noise, metric, grid, num_bits=60_000, seed=3)
    verdict = tunnel_check(curve, outer)
    state = "open" if verdict.open_tunnel else f"pinched @ {verdict.pinch_i_a:.2f}"
    print(f"1/({text}): tunnel {state}  (min gap {verdict.min_gap:+.3f})")
    ax.plot(curve.i_a, curve.i_e, marker=".", label=f"1/({text})")

ax.set_xlabel("I_A equalizer / I_E decoder")
ax.set_ylabel("I_E equalizer / I_A decoder")
ax.set_title(f"EXIT chart at {snr_db} dB")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("exit_chart.png", dpi=120)
print("wrote exit_chart.png")
