"""Deterministic randomness built on the Philox counter-based generator.

Every stochastic operation in the toolkit draws from a Philox-4x64-10 stream
(fixed rotation/multiplication constants, counter mode), so identical seeds
reproduce bit-identical results on any platform and any degree of
parallelism. Sub-seeds are derived from a master seed with SplitMix64, a
64-bit mixing function with fixed constants; string labels enter the mix via
FNV-1a. Units of parallel work (trees of a forest, one-vs-rest classes,
shuffle epochs) each get their own derived stream, so execution order and
worker count never change the output.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea, Flood 2014).
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MUL1 = 0xBF58476D1CE4E5B9
_SM_MUL2 = 0x94D049BB133111EB

# FNV-1a 64-bit constants.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _splitmix64(x: int) -> int:
    x = (x + _SM_GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * _SM_MUL1) & _MASK64
    x = ((x ^ (x >> 27)) * _SM_MUL2) & _MASK64
    return x ^ (x >> 31)


def _fnv1a(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, *labels: int | str) -> int:
    """Mix a master seed with stage/unit labels into a new 64-bit seed.

    Labels may be integers (unit indices) or strings (stage names). The
    derivation is a fixed function of (seed, labels) only.
    """
    state = seed & _MASK64
    for label in labels:
        word = _fnv1a(label) if isinstance(label, str) else (int(label) & _MASK64)
        state = _splitmix64(state ^ word)
    return _splitmix64(state)


def make_rng(seed: int, *labels: int | str) -> np.random.Generator:
    """Philox stream keyed by ``derive_seed(seed, *labels)``."""
    key = derive_seed(seed, *labels) if labels else (seed & _MASK64)
    bitgen = np.random.Philox(key=np.array([key, _SM_GAMMA], dtype=np.uint64))
    return np.random.Generator(bitgen)
