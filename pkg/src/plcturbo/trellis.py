"""Finite-state trellises: recursive systematic codes, rate-1 precoders,
ISI channels, and the precoder + ISI composition.

All trellises are binary-input.  Branch output labels are binary for code
trellises and real channel amplitudes for ISI trellises; symbols follow the
antipodal mapping bit 0 -> +1, bit 1 -> -1, and every LLR in the package is
``log P(bit = 1) / P(bit = 0)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import DiscreteChannel
from .errors import ComplexityError, ConfigError

STATE_CAP = 1 << 16


def bit_to_symbol(bits) -> np.ndarray:
    """Antipodal map: 0 -> +1.0, 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


@dataclass(frozen=True)
class BinaryPolynomial:
    """Polynomial over GF(2) stored as a bitmask, bit k = coefficient of D^k."""

    mask: int

    def __post_init__(self):
        if self.mask < 0:
            raise ConfigError("polynomial mask must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "BinaryPolynomial":
        """Parse either octal (e.g. "0o13" or "13") or D-notation ("1+D+D^3").

        Octal digits map LSB-first onto powers of D, so "13" (= 0b1011)
        is 1 + D + D^3.
        """
        s = text.strip().replace(" ", "")
        if not s:
            raise ConfigError("empty polynomial string")
        if "D" in s.upper() or s == "1" or s == "0":
            mask = 0
            for term in s.upper().split("+"):
                if term == "0":
                    continue
                if term == "1":
                    mask |= 1
                elif term == "D":
                    mask |= 2
                elif term.startswith("D^"):
                    mask |= 1 << int(term[2:])
                else:
                    raise ConfigError(f"bad polynomial term {term!r} in {text!r}")
            return cls(mask)
        try:
            return cls(int(s, 8))
        except ValueError:
            raise ConfigError(f"cannot parse polynomial {text!r}") from None

    @property
    def degree(self) -> int:
        return max(self.mask.bit_length() - 1, 0)

    def coefficient(self, k: int) -> int:
        return (self.mask >> k) & 1

    def to_octal(self) -> str:
        return format(self.mask, "o")

    def to_dnotation(self) -> str:
        if self.mask == 0:
            return "0"
        terms = []
        for k in range(self.mask.bit_length()):
            if (self.mask >> k) & 1:
                terms.append("1" if k == 0 else ("D" if k == 1 else f"D^{k}"))
        return "+".join(terms)

    def __str__(self) -> str:
        return self.to_dnotation()


class Trellis:
    """Binary-input finite-state machine with per-branch output labels.

    ``next_state[s, b]`` is the successor of state ``s`` under input bit
    ``b``; ``outputs[s, b]`` is the label vector of that branch.  ISI
    trellises carry ``startup_outputs``: label overrides for the first few
    steps while the channel memory is still empty, so that a walk from
    state 0 reproduces a zero-padded convolution including its transient.
    """

    def __init__(
        self,
        next_state: np.ndarray,
        outputs: np.ndarray,
        startup_outputs: np.ndarray | None = None,
    ):
        next_state = np.asarray(next_state, dtype=np.int64)
        outputs = np.asarray(outputs, dtype=float)
        if outputs.ndim == 2:
            outputs = outputs[:, :, None]
        if next_state.ndim != 2 or next_state.shape[1] != 2:
            raise ConfigError("next_state must have shape (num_states, 2)")
        if outputs.shape[:2] != next_state.shape:
            raise ConfigError("outputs must align with next_state")
        n = next_state.shape[0]
        if np.any(next_state < 0) or np.any(next_state >= n):
            raise ConfigError("next_state entries out of range")
        if startup_outputs is not None:
            startup_outputs = np.asarray(startup_outputs, dtype=float)
            if startup_outputs.shape[1:] != outputs.shape:
                raise ConfigError("startup_outputs must stack the output table")
        self.next_state = next_state
        self.outputs = outputs
        self.startup_outputs = startup_outputs

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.outputs.shape[2]

    @property
    def warmup(self) -> int:
        return 0 if self.startup_outputs is None else self.startup_outputs.shape[0]

    def outputs_at(self, step: int) -> np.ndarray:
        if step < self.warmup:
            return self.startup_outputs[step]
        return self.outputs

    def reachable_states(self, max_steps: int | None = None) -> set[int]:
        """States reachable from state 0 (BFS, optionally depth-limited)."""
        seen = {0}
        frontier = [0]
        steps = 0
        while frontier and (max_steps is None or steps < max_steps):
            nxt = []
            for s in frontier:
                for b in (0, 1):
                    t = int(self.next_state[s, b])
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
            frontier = nxt
            steps += 1
        return seen

    def walk(self, bits, state: int = 0) -> tuple[np.ndarray, int]:
        """Run the machine from ``state``; returns (output labels, end state).

        Startup labels apply only when the walk begins in state 0 at time 0,
        which is the transmitter's convention.
        """
        bits = np.asarray(bits, dtype=np.int64)
        out = np.empty((bits.size, self.num_outputs))
        for i, b in enumerate(bits):
            out[i] = self.outputs_at(i)[state, b]
            state = int(self.next_state[state, b])
        return out, state


def _and_parity(mask: int, state: int) -> int:
    """GF(2) inner product of a tap mask with register bits."""
    return bin(mask & state).count("1") & 1


def build_rsc_trellis(feedforward: BinaryPolynomial, feedback: BinaryPolynomial) -> Trellis:
    """Rate-1/2 recursive systematic code trellis; outputs (systematic, parity).

    State bit k holds the recursion value from k+1 steps ago (LSB = most
    recent), so polynomial tap k+1 pairs with state bit k.
    """
    if feedback.coefficient(0) != 1:
        raise ConfigError("feedback polynomial must have constant term 1")
    m = max(feedforward.degree, feedback.degree)
    num_states = 1 << m
    if num_states > STATE_CAP:
        raise ComplexityError(f"{num_states} states exceeds cap {STATE_CAP}")
    next_state = np.zeros((num_states, 2), dtype=np.int64)
    outputs = np.zeros((num_states, 2, 2))
    for s in range(num_states):
        for u in (0, 1):
            w = u ^ _and_parity(feedback.mask >> 1, s)
            parity = (feedforward.coefficient(0) & w) ^ _and_parity(feedforward.mask >> 1, s)
            next_state[s, u] = ((s << 1) | w) & (num_states - 1)
            outputs[s, u] = (u, parity)
    return Trellis(next_state, outputs)


def rsc_termination_bits(trellis: Trellis, state: int, memory: int) -> np.ndarray:
    """Input bits that drive an RSC encoder from ``state`` to state 0."""
    bits = np.zeros(memory, dtype=np.int64)
    for i in range(memory):
        # the input cancelling the feedback shifts a zero into the register
        u = int(trellis.next_state[state, 0]) & 1
        bits[i] = u
        state = int(trellis.next_state[state, u])
    if state != 0:
        raise AssertionError("termination failed to reach state 0")
    return bits


def encode_rsc(trellis: Trellis, bits) -> np.ndarray:
    """Systematically encode ``bits`` plus termination; multiplexed output.

    Returns ``[sys_0, par_0, sys_1, par_1, ...]`` of length
    ``2 * (len(bits) + memory)``; the tail drives the register to zero.
    """
    bits = np.asarray(bits, dtype=np.int64)
    memory = int(np.log2(trellis.num_states))
    labels, state = trellis.walk(bits)
    tail = rsc_termination_bits(trellis, state, memory) if memory else np.zeros(0, np.int64)
    tail_labels, end = trellis.walk(tail, state)
    if memory and end != 0:
        raise AssertionError("RSC termination did not reach the zero state")
    out = np.concatenate([labels, tail_labels]) if memory else labels
    return out.reshape(-1).astype(np.int64)


def build_precoder(feedback: BinaryPolynomial) -> Trellis:
    """Rate-1 recursive trellis: y[n] = x[n] xor sum_k f_k y[n-k].

    State bits are the last ``m`` output bits, LSB = most recent.
    """
    if feedback.coefficient(0) != 1:
        raise ConfigError("precoder feedback must have constant term 1")
    m = feedback.degree
    num_states = 1 << m
    if num_states > STATE_CAP:
        raise ComplexityError(f"{num_states} states exceeds cap {STATE_CAP}")
    next_state = np.zeros((num_states, 2), dtype=np.int64)
    outputs = np.zeros((num_states, 2, 1))
    for s in range(num_states):
        for x in (0, 1):
            y = x
            for k in range(1, m + 1):
                if feedback.coefficient(k):
                    y ^= (s >> (k - 1)) & 1
            next_state[s, x] = ((s << 1) | y) & (num_states - 1)
            outputs[s, x, 0] = y
    return Trellis(next_state, outputs)


def precode(feedback: BinaryPolynomial, bits) -> np.ndarray:
    """Apply the recursive rate-1 map to a bit sequence (zero initial state)."""
    if feedback.coefficient(0) != 1:
        raise ConfigError("precoder feedback must have constant term 1")
    bits = np.asarray(bits, dtype=np.int64)
    m = feedback.degree
    out = np.zeros(bits.size, dtype=np.int64)
    for n in range(bits.size):
        y = int(bits[n])
        for k in range(1, m + 1):
            if feedback.coefficient(k) and n - k >= 0:
                y ^= int(out[n - k])
        out[n] = y
    return out


def deprecode(feedback: BinaryPolynomial, bits) -> np.ndarray:
    """FIR inverse of ``precode``: x[n] = y[n] xor sum_k f_k y[n-k]."""
    bits = np.asarray(bits, dtype=np.int64)
    m = feedback.degree
    out = np.zeros(bits.size, dtype=np.int64)
    for n in range(bits.size):
        x = int(bits[n])
        for k in range(1, m + 1):
            if feedback.coefficient(k) and n - k >= 0:
                x ^= int(bits[n - k])
        out[n] = x
    return out


def _isi_amplitude(taps: np.ndarray, state: int, b: int, active: int) -> float:
    """Branch amplitude using only the first ``active`` taps (startup)."""
    amp = taps[0] * (1.0 - 2.0 * b)
    for k in range(1, active):
        amp += taps[k] * (1.0 - 2.0 * ((state >> (k - 1)) & 1))
    return amp


def build_isi_trellis(channel: DiscreteChannel) -> Trellis:
    """ISI trellis over the last ``L_h - 1`` input bits.

    Branch output is the noiseless channel amplitude
    ``sum_k h[k] * symbol(input history)``; state bit k-1 holds the input
    from k steps ago.  Startup labels truncate the tap sum so a walk from
    state 0 equals a zero-padded convolution, transient included.
    """
    taps = channel.taps
    mem = taps.size - 1
    num_states = 1 << mem
    if num_states > STATE_CAP:
        raise ComplexityError(f"{num_states} states exceeds cap {STATE_CAP}")
    next_state = np.zeros((num_states, 2), dtype=np.int64)
    outputs = np.zeros((num_states, 2, 1))
    startup = np.zeros((mem, num_states, 2, 1))
    for s in range(num_states):
        for b in (0, 1):
            outputs[s, b, 0] = _isi_amplitude(taps, s, b, taps.size)
            next_state[s, b] = ((s << 1) | b) & (num_states - 1) if mem else 0
            for step in range(mem):
                startup[step, s, b, 0] = _isi_amplitude(taps, s, b, step + 1)
    return Trellis(next_state, outputs, startup_outputs=startup if mem else None)


def build_precoded_isi_trellis(
    feedback: BinaryPolynomial, channel: DiscreteChannel
) -> Trellis:
    """Composition of a rate-1 recursive precoder with the ISI channel.

    The product state (precoder state, channel history) is pruned to states
    reachable from zero, which collapses to ``2^max(m, L_h - 1)`` whenever
    the precoder memory is embedded in the symbol history.  Input bits are
    the precoder inputs; outputs are noiseless channel amplitudes.
    """
    m = feedback.degree
    mem = channel.taps.size - 1
    if m > mem:
        warnings.warn(
            f"precoder memory {m} exceeds channel memory {mem}; "
            "equalizer complexity grows beyond the channel's own trellis",
            stacklevel=2,
        )
    pre = build_precoder(feedback)
    isi = build_isi_trellis(channel)
    if pre.num_states * isi.num_states > STATE_CAP:
        raise ComplexityError("combined state space exceeds cap")

    # BFS over consistent (precoder, channel) state pairs
    index = {(0, 0): 0}
    order = [(0, 0)]
    edges = []
    head = 0
    while head < len(order):
        sp, sc = order[head]
        head += 1
        for x in (0, 1):
            y = int(pre.outputs[sp, x, 0])
            np_, nc = int(pre.next_state[sp, x]), int(isi.next_state[sc, y])
            key = (np_, nc)
            if key not in index:
                index[key] = len(order)
                order.append(key)
            edges.append((index[(sp, sc)], x, index[key], sc, y))

    n = len(order)
    warmup = isi.warmup
    next_state = np.zeros((n, 2), dtype=np.int64)
    outputs = np.zeros((n, 2, 1))
    startup = np.zeros((warmup, n, 2, 1))
    for s, x, t, sc, y in edges:
        next_state[s, x] = t
        outputs[s, x, 0] = isi.outputs[sc, y, 0]
        for step in range(warmup):
            startup[step, s, x, 0] = isi.startup_outputs[step, sc, y, 0]
    return Trellis(next_state, outputs, startup_outputs=startup if warmup else None)


def channel_output(trellis: Trellis, bits) -> np.ndarray:
    """Noiseless output sequence from walking the trellis out of state 0."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size < 1:
        raise ValueError("bits must be non-empty")
    labels, _ = trellis.walk(bits)
    return labels[:, 0].copy()
