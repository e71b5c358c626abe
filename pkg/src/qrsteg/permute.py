"""Keyed deterministic permutations and the 64-bit generator behind them.

Everything here is pinned to the bit so an extractor built from the wire
format document alone reproduces the exact shuffles: SplitMix64 as the
generator, Fisher-Yates with rejection sampling for unbiased swaps, and
one fixed domain tag per shuffled stream so the same key never reuses a
permutation across carriers. See docs/wire_format.md for the constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3

# Domain tags (fixed wire constants).
TAG_COEFF_HL = 0x484C000000000001
TAG_COEFF_HH = 0x4848000000000002
TAG_CHROMA_U = 0x5500000000000003
TAG_CHROMA_V = 0x5600000000000004
TAG_PAYLOAD_L = 0x5000000000000005
TAG_PAYLOAD_M = 0x5000000000000006
TAG_PAYLOAD_Q = 0x5000000000000007
TAG_PAYLOAD_H = 0x5000000000000008
TAG_KEY_DRAW = 0x4B00000000000009


def prng_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (new_state, output value)."""
    state = (state + _GOLDEN) & MASK64
    v = state
    v = ((v ^ (v >> 30)) * _MIX1) & MASK64
    v = ((v ^ (v >> 27)) * _MIX2) & MASK64
    v ^= v >> 31
    return state, v


def fnv1a64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & MASK64
    return h


@dataclass(frozen=True)
class StegoKey:
    """The single 64-bit seed driving every permutation in a run."""

    seed: int

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise FormatError("stego seed must fit in 64 bits")

    @classmethod
    def from_passphrase(cls, text: str) -> "StegoKey":
        return cls(seed=fnv1a64(text.encode("utf-8")))

    def fingerprint(self) -> str:
        """Hex FNV-1a of the seed's 8-byte little-endian form, for sidecars."""
        return format(fnv1a64(self.seed.to_bytes(8, "little")), "016x")


def derive_seed(base: int, *parts: int) -> int:
    """Fold stream labels (tags, frame indexes) into a child seed."""
    state = base & MASK64
    for part in parts:
        _, state = prng_next((state ^ part) & MASK64)
    return state


class Splitmix64:
    """Deterministic random stream with the small Random-like surface we need."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state, v = prng_next(self._state)
        return v

    def getrandbits(self, k: int) -> int:
        v = 0
        shift = 0
        while shift < k:
            v |= self.next_u64() << shift
            shift += 64
        return v & ((1 << k) - 1)

    def randrange(self, start: int, stop: int) -> int:
        width = stop - start
        if width <= 0:
            raise ValueError(f"empty range [{start}, {stop})")
        bits = width.bit_length()
        while True:
            v = self.getrandbits(bits)
            if v < width:
                return start + v


@dataclass(eq=False)
class Permutation:
    """A bijection on [0, n) stored as an index array."""

    forward: np.ndarray

    @property
    def n(self) -> int:
        return int(self.forward.size)


def keyed_permutation(key: StegoKey, domain_tag: int, n: int) -> Permutation:
    """Fisher-Yates shuffle of [0, n) seeded with key.seed XOR domain_tag.

    Swap indexes come from unbiased rejection sampling: values at or
    above floor(2^64 / m) * m are discarded before reducing mod m.
    """
    state = (key.seed ^ domain_tag) & MASK64
    forward = np.arange(n, dtype=np.int64)
    buf = forward  # shuffled in place
    for i in range(n - 1, 0, -1):
        m = i + 1
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            state, v = prng_next(state)
            if v < limit:
                break
        j = v % m
        buf[i], buf[j] = buf[j], buf[i]
    return Permutation(forward=forward)


def invert(perm: Permutation) -> Permutation:
    """Inverse bijection: invert(p).forward[p.forward[i]] == i."""
    n = perm.n
    fwd = perm.forward
    counts = np.bincount(fwd, minlength=n) if n else np.zeros(0, dtype=np.int64)
    if fwd.size and (fwd.min() < 0 or fwd.max() >= n or not (counts == 1).all()):
        raise FormatError("corrupt permutation: not a bijection")
    inverse = np.empty(n, dtype=np.int64)
    inverse[fwd] = np.arange(n, dtype=np.int64)
    return Permutation(forward=inverse)


def apply(perm: Permutation, values: np.ndarray) -> np.ndarray:
    """Gather: result[i] = values[forward[i]]."""
    if values.shape[0] != perm.n:
        raise FormatError("permutation size does not match value count")
    return values[perm.forward]
