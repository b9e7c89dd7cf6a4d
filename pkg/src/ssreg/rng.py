"""Deterministic, counter-based random streams.

Every stream is a Philox generator keyed by an explicit 64-bit seed and a
short tag, so draws never depend on global state or call order elsewhere.
Normal variates are produced by inverting the standard normal CDF.
"""

from __future__ import annotations

import zlib

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1


def stream(seed: int, tag: str = "") -> np.random.Generator:
    key = [int(seed) & _MASK64, zlib.crc32(tag.encode())]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def uniform_open(gen: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1)."""
    # random() returns k / 2**53; shifting by half a step avoids 0
    return gen.random(size) + 2.0**-54


def normal(gen: np.random.Generator, size, scale: float = 1.0) -> np.ndarray:
    return scale * ndtri(uniform_open(gen, size))


def replication_seed(base_seed: int, rep: int) -> int:
    return (int(base_seed) ^ int(rep)) & _MASK64
