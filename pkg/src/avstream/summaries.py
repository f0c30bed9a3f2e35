"""Small-space frequency summaries.

Three estimators with different guarantees:

  MisraGries           insert-only, deterministic, one-sided error m/capacity
  TurnstileMisraGries  two MisraGries copies (one per update sign); the
                       difference of estimates has two-sided error m/capacity
  CountMedianSketch    randomized linear sketch; two-sided error relative to
                       ||f||_1, holding for all elements with prob >= 1-eps

All three report their model-space footprint in bits for the cost meter.
"""

from __future__ import annotations

import random

from .util import ceil_log2

_MASK64 = (1 << 64) - 1


class MisraGries:
    """Classic deterministic counter summary for insert-only streams.

    Keeps at most `capacity` keyed counters.  A miss with a full table
    decrements every counter (keys visited in ascending order so a replay
    of the same stream reproduces the state exactly) and evicts zeros.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.table: dict[int, int] = {}
        self.tokens_seen = 0

    def process(self, j: int) -> None:
        table = self.table
        if j in table:
            table[j] += 1
        elif len(table) < self.capacity:
            table[j] = 1
        else:
            for k in sorted(table):
                if table[k] == 1:
                    del table[k]
                else:
                    table[k] -= 1
        self.tokens_seen += 1

    def estimate(self, j: int) -> int:
        return self.table.get(j, 0)

    def keys(self) -> set[int]:
        return set(self.table)

    def size_bits(self, n: int, m: int) -> int:
        return len(self.table) * (ceil_log2(max(n, 2)) + ceil_log2(max(m, 2)))


class TurnstileMisraGries:
    """Signed-update extension: positive and negative updates feed two
    parallel MisraGries copies; the estimate is the difference."""

    def __init__(self, capacity: int):
        self.pos = MisraGries(capacity)
        self.neg = MisraGries(capacity)

    @property
    def capacity(self) -> int:
        return self.pos.capacity

    @property
    def tokens_seen(self) -> int:
        return self.pos.tokens_seen + self.neg.tokens_seen

    def process(self, index: int, delta: int) -> None:
        if delta == 1:
            self.pos.process(index)
        elif delta == -1:
            self.neg.process(index)
        else:
            raise ValueError(f"delta must be +-1, got {delta}")

    def estimate(self, j: int) -> int:
        return self.pos.estimate(j) - self.neg.estimate(j)

    def keys(self) -> set[int]:
        return set(self.pos.table) | set(self.neg.table)

    def size_bits(self, n: int, m: int) -> int:
        return self.pos.size_bits(n, m) + self.neg.size_bits(n, m)


class CountMedianSketch:
    """depth x width signed counter array; the estimate for j is the median
    over rows of the one counter j hashes to in that row.

    Hashing is multiply-shift with per-row 64-bit salts, so the width is
    rounded up to a power of two.  The salts derive from `seed`; a sketch
    can be reproduced exactly by constructing with the same parameters.
    """

    def __init__(self, width: int, depth: int, seed: int):
        if width < 1 or depth < 1:
            raise ValueError("width and depth must be >= 1")
        self.width = 1 << max(1, (width - 1).bit_length())
        self.depth = depth
        self.seed = seed
        self._shift = 64 - (self.width.bit_length() - 1)
        rng = random.Random(seed)
        self.salts = [
            (rng.getrandbits(64) | 1, rng.getrandbits(64)) for _ in range(depth)
        ]
        self.rows = [[0] * self.width for _ in range(depth)]
        self.tokens_seen = 0

    def bucket(self, row: int, j: int) -> int:
        a, b = self.salts[row]
        return ((a * j + b) & _MASK64) >> self._shift

    def process(self, index: int, delta: int) -> None:
        for i in range(self.depth):
            self.rows[i][self.bucket(i, index)] += delta
        self.tokens_seen += 1

    def estimate(self, j: int) -> int:
        vals = sorted(self.rows[i][self.bucket(i, j)] for i in range(self.depth))
        return vals[self.depth // 2]

    def size_bits(self, n: int, m: int) -> int:
        counter_bits = 1 + ceil_log2(max(m, 1) + 1)
        return self.depth * self.width * counter_bits + 128 * self.depth
