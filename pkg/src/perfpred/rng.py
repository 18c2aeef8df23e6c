"""Counter-based sampling primitives.

All Monte Carlo draws in this package are addressed by (seed, sample index,
slot) rather than by generator state.  Sample ``i`` always consumes the same
fixed window of the Philox output stream, so a batch of draws is bit-identical
no matter how it is partitioned across calls or workers, and draws for two
different model parameters under one seed are coupled through identical
underlying uniforms (common random numbers).
"""

from __future__ import annotations

import numpy as np

_WORDS_PER_BLOCK = 4  # Philox-4x64 emits four 64-bit words per counter tick
_U64_TO_OPEN_UNIT = 2.0**-53


def philox_key(seed: int, *path: int) -> np.ndarray:
    """Derive a 2-word Philox key from a user seed and an optional stream path.

    Distinct paths (e.g. per-step resampling streams) yield statistically
    independent streams; the derivation is deterministic and stable.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(p) for p in path))
    return ss.generate_state(2, np.uint64)


def raw_words(key: np.ndarray, start: int, n: int, width: int) -> np.ndarray:
    """Raw 64-bit words for sample indices [start, start+n), ``width`` per sample.

    Returns an (n, width) uint64 array; row ``i`` depends only on
    (key, start + i), independent of how the batch is partitioned.
    """
    if n < 0 or width < 1:
        raise ValueError("need n >= 0 and width >= 1")
    if n == 0:
        return np.empty((0, width), dtype=np.uint64)
    first_word = start * width
    last_word = (start + n) * width
    first_block, offset = divmod(first_word, _WORDS_PER_BLOCK)
    n_words = last_word - first_word
    bitgen = np.random.Philox(key=np.asarray(key, dtype=np.uint64))
    bitgen.advance(first_block)
    n_raw = -(-(offset + n_words) // _WORDS_PER_BLOCK) * _WORDS_PER_BLOCK
    raw = bitgen.random_raw(n_raw)[offset : offset + n_words]
    return raw.reshape(n, width)


def to_open_unit(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles strictly inside (0, 1) via their top 53 bits."""
    return ((words >> np.uint64(11)) + 0.5) * _U64_TO_OPEN_UNIT


def uniforms(key: np.ndarray, start: int, n: int, width: int) -> np.ndarray:
    """Uniforms in the open interval (0, 1) for sample indices [start, start+n)."""
    return to_open_unit(raw_words(key, start, n, width))


def child_seed(seed: int, *path: int) -> int:
    """A derived 64-bit seed for an independent sub-stream (e.g. one outer step)."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
