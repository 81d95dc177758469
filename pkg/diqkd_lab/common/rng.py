"""Counter-based random streams.

Every stochastic routine splits its work into fixed-size blocks and draws
block ``k`` from a Philox generator keyed by the user seed with ``k`` in the
counter's high word. The sampled values therefore depend only on
``(seed, block_size, total)``, never on how blocks are scheduled.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

_SEED_MASK = (1 << 64) - 1
_BLOCK_SHIFT = 192


def block_generator(seed: int, block: int) -> np.random.Generator:
    if block < 0:
        raise ValueError(f"block index must be non-negative, got {block}")
    bitgen = np.random.Philox(key=int(seed) & _SEED_MASK, counter=int(block) << _BLOCK_SHIFT)
    return np.random.Generator(bitgen)


def block_sizes(total: int, block_size: int) -> Iterator[tuple[int, int]]:
    """Yield ``(block_index, count)`` covering ``total`` items in order."""
    if block_size <= 0:
        raise ValueError(f"block_size must be positive, got {block_size}")
    start = 0
    block = 0
    while start < total:
        count = min(block_size, total - start)
        yield block, count
        start += count
        block += 1
