"""Turnstile stream model: tokens, grid shaping, generators, exact oracle.

The exact oracle materialises full frequencies in plain integer arithmetic
and is the ground truth every scheme-level test compares against.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

from .util import iroot_ceil


class StreamConfigError(ValueError):
    """Unusable generator request (unknown kind, bad sizes)."""


class StreamToken(NamedTuple):
    index: int  # element of [n]
    delta: int  # -1 or +1


@dataclass(frozen=True)
class ShapeParams:
    """Row-major view of [n] as a d1 x d2 grid, padded up to d1*d2 cells."""

    n: int
    d1: int
    d2: int

    @classmethod
    def for_universe(cls, n: int) -> "ShapeParams":
        if n < 1:
            raise StreamConfigError(f"universe size must be >= 1, got {n}")
        d1 = iroot_ceil(n, 3)
        d2 = -(-n // d1)
        assert d1 * d2 >= n and d1 * d2 - n < d2
        return cls(n=n, d1=d1, d2=d2)

    @property
    def padded_cells(self) -> int:
        return self.d1 * self.d2 - self.n

    def cell(self, j: int) -> tuple[int, int]:
        """1-based grid coordinates of index j (padded indices allowed)."""
        if not 1 <= j <= self.d1 * self.d2:
            raise ValueError(f"index {j} outside grid of {self.d1 * self.d2}")
        x, y = divmod(j - 1, self.d2)
        return x + 1, y + 1

    def index(self, x: int, y: int) -> int:
        if not (1 <= x <= self.d1 and 1 <= y <= self.d2):
            raise ValueError(f"cell ({x},{y}) outside {self.d1}x{self.d2} grid")
        return (x - 1) * self.d2 + y


def frequency_vector(stream: Iterable[StreamToken], n: int) -> dict[int, int]:
    """Sparse exact frequencies; zero entries are dropped."""
    freqs: dict[int, int] = {}
    for index, delta in stream:
        if not 1 <= index <= n:
            raise ValueError(f"token index {index} outside [1, {n}]")
        if delta not in (-1, 1):
            raise ValueError(f"token delta must be +-1, got {delta}")
        v = freqs.get(index, 0) + delta
        if v:
            freqs[index] = v
        else:
            freqs.pop(index, None)
    return freqs


def l1_norm(freqs: dict[int, int]) -> int:
    return sum(abs(v) for v in freqs.values())


def exact_oracle(stream: Iterable[StreamToken], g: Callable[[int], int], n: int) -> int:
    """Ground truth: sum of g over all n per-element frequencies."""
    freqs = frequency_vector(stream, n)
    total = sum(g(v) for v in freqs.values())
    return total + (n - len(freqs)) * g(0)


GENERATOR_KINDS = ("uniform", "zipf", "turnstile", "cancel")


def gen_stream(kind: str, n: int, m: int, seed: int, c: int = 4) -> list[StreamToken]:
    """Deterministic stream generator.

    uniform    insert-only, indices uniform over [n]
    zipf       insert-only, skewed indices (exponent 1.2)
    turnstile  random signed updates with ||f||_1 kept <= c*n
    cancel     long churning stream, ||f||_1 kept <= c*n/2 (so m >> ||f||_1)
    """
    if m < 0:
        raise StreamConfigError(f"stream length must be >= 0, got {m}")
    if n < 1:
        raise StreamConfigError(f"universe size must be >= 1, got {n}")
    rng = random.Random(seed)
    if kind == "uniform":
        return [StreamToken(rng.randint(1, n), 1) for _ in range(m)]
    if kind == "zipf":
        cum = []
        acc = 0.0
        for rank in range(1, n + 1):
            acc += rank ** -1.2
            cum.append(acc)
        out = []
        for _ in range(m):
            j = bisect_right(cum, rng.random() * acc) + 1
            out.append(StreamToken(min(j, n), 1))
        return out
    if kind == "turnstile":
        return _bounded_turnstile(n, m, max(1, c * n), rng)
    if kind == "cancel":
        return _bounded_turnstile(n, m, max(1, c * n // 2), rng)
    raise StreamConfigError(f"unknown generator kind: {kind!r}")


def _bounded_turnstile(n: int, m: int, l1_cap: int, rng: random.Random) -> list[StreamToken]:
    """Random signed updates; once ||f||_1 reaches the cap, updates shrink it."""
    freqs: dict[int, int] = {}
    support: list[int] = []
    slot: dict[int, int] = {}
    l1 = 0
    out = []
    for _ in range(m):
        if l1 < l1_cap:
            j = rng.randint(1, n)
            delta = 1 if rng.random() < 0.5 else -1
        else:
            j = support[rng.randrange(len(support))]
            delta = -1 if freqs[j] > 0 else 1
        old = freqs.get(j, 0)
        new = old + delta
        l1 += abs(new) - abs(old)
        if new:
            freqs[j] = new
            if old == 0:
                slot[j] = len(support)
                support.append(j)
        else:
            del freqs[j]
            pos = slot.pop(j)
            last = support.pop()
            if last != j:
                support[pos] = last
                slot[last] = pos
        out.append(StreamToken(j, delta))
    return out


def write_stream(stream: Iterable[StreamToken], fh) -> None:
    """One token per line: ASCII "j delta"."""
    for index, delta in stream:
        fh.write(f"{index} {delta}\n")


def read_stream(fh) -> list[StreamToken]:
    out = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        j, delta = line.split()
        out.append(StreamToken(int(j), int(delta)))
    return out
