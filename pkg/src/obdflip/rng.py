"""Keyed, counter-based random streams.

All randomness in the package flows through numpy's Philox generator, keyed
by ``(seed, purpose << 48 | index)``. Distinct purposes can therefore share
one user-facing seed without stream collisions, and any indexed unit of work
(a bootstrap replicate, a parameter draw, a subsample) owns its own stream
or counter offset, so results are bitwise identical however the work is
chunked or ordered.

Philox advances its 256-bit counter one tick per four 64-bit outputs, and
``Generator.uniform`` consumes exactly one 64-bit output per double, so
counter positioning works in units of four doubles. Per-draw strides are
padded up to a multiple of four to keep every draw block-aligned.
"""

from __future__ import annotations

import numpy as np

# purpose tags for the second key word
STREAM_PARAMS = 1      # uniform parameter-space draws
STREAM_BOOTSTRAP = 2   # one index per bootstrap replicate
STREAM_SIMULATION = 3  # synthetic data generation
STREAM_SUBSAMPLE = 4   # random subsample membership draws

_INDEX_BITS = 48
_MAX_INDEX = 1 << _INDEX_BITS
_MAX_SEED = 1 << 64
_OUTPUTS_PER_BLOCK = 4


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be in [0, 2^64), got {seed}")
    return seed


def stream_key(purpose: int, index: int = 0) -> int:
    """Second Philox key word for a (purpose, index) pair."""
    purpose = int(purpose)
    index = int(index)
    if not 0 <= purpose < (1 << (64 - _INDEX_BITS)):
        raise ValueError(f"purpose tag out of range: {purpose}")
    if not 0 <= index < _MAX_INDEX:
        raise ValueError(f"stream index out of range: {index}")
    return (purpose << _INDEX_BITS) | index


def generator(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Fresh generator on the (seed, purpose, index) stream."""
    key = [_check_seed(seed), stream_key(purpose, index)]
    return np.random.Generator(np.random.Philox(key=key))


def padded_stride(n_doubles: int) -> int:
    """Round a per-draw double count up to a whole number of Philox blocks."""
    if n_doubles <= 0:
        raise ValueError("stride must be positive")
    return -_OUTPUTS_PER_BLOCK * (-int(n_doubles) // _OUTPUTS_PER_BLOCK)


def uniform_block(
    seed: int,
    purpose: int,
    index: int,
    start: int,
    count: int,
    stride: int,
    low: float = 0.0,
    high: float = 1.0,
) -> np.ndarray:
    """Rows ``start .. start+count`` of an unbounded matrix of uniforms.

    The stream is laid out as consecutive rows of ``stride`` doubles each
    (``stride`` must be block-aligned; see :func:`padded_stride`). Because
    the generator is positioned by counter arithmetic, any partition of the
    row range into blocks concatenates to the same bits.
    """
    if stride % _OUTPUTS_PER_BLOCK != 0:
        raise ValueError(f"stride must be a multiple of {_OUTPUTS_PER_BLOCK}")
    if start < 0 or count < 0:
        raise ValueError("start and count must be nonnegative")
    bitgen = np.random.Philox(key=[_check_seed(seed), stream_key(purpose, index)])
    if start:
        bitgen.advance(start * stride // _OUTPUTS_PER_BLOCK)
    gen = np.random.Generator(bitgen)
    return gen.uniform(low, high, size=(count, stride))
