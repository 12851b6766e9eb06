# Rate-1 recursive precoders and channel trellises. A plain ISI channel is
# non-recursive, so a serially concatenated system gets no interleaving
# gain from it; placing a 1/f(D) precoder in front makes the combined
# inner code recursive without adding states (when its memory fits).

import numpy as np

from plcturbo import (
    BinaryPolynomial,
    DiscreteChannel,
    build_isi_trellis,
    build_precoded_isi_trellis,
    channel_output,
    deprecode,
    precode,
)

d3 = BinaryPolynomial.parse("1+D^3")
print("precoder feedback:", d3, "= octal", d3.to_octal())

impulse = [1, 0, 0, 0, 0, 0, 0, 0]
print("impulse in :", impulse)
print("precoded   :", list(precode(d3, impulse)))  # infinite response 1001001...
print("inverse    :", list(deprecode(d3, precode(d3, impulse))))

taps = np.array([0.8709, 0.4758, -0.1153, 0.0435])
ch = DiscreteChannel(taps / np.linalg.norm(taps))
isi = build_isi_trellis(ch)
combined = build_precoded_isi_trellis(d3, ch)
print(f"\nISI trellis states: {isi.num_states}")
print(f"precoded ISI states: {combined.num_states} (memory embedded, no growth)")

bits = np.random.default_rng(7).integers(0, 2, 12)
print("\nbits          :", bits)
print("channel output:", np.round(channel_output(combined, bits), 3))
# the same amplitudes come from precoding first, then the plain channel
same = channel_output(isi, precode(d3, bits))
print("composition ok:", np.allclose(same, channel_output(combined, bits)))
