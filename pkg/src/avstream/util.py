"""Small shared helpers: integer roots, bit sizes, seed derivation."""

import hashlib


def iroot_ceil(x: int, k: int) -> int:
    """Smallest r >= 0 with r**k >= x (exact integer arithmetic)."""
    if x <= 1:
        return max(x, 0)
    r = max(1, int(round(x ** (1.0 / k))))
    while r**k < x:
        r += 1
    while (r - 1) ** k >= x:
        r -= 1
    return r


def ceil_log2(x: int) -> int:
    """Ceiling of log2(x) for x >= 1."""
    if x < 1:
        raise ValueError("ceil_log2 needs x >= 1")
    return (x - 1).bit_length()


def next_pow2(x: int) -> int:
    """Smallest power of two >= x (x >= 1)."""
    if x < 1:
        raise ValueError("next_pow2 needs x >= 1")
    return 1 << (x - 1).bit_length() if x > 1 else 1


def derive_seed(seed: int, label: str) -> int:
    """Derive an independent 64-bit substream seed from (seed, label).

    Uses a hash rather than arithmetic so that e.g. the verifier's coin
    stream cannot be reconstructed from a neighbouring substream.
    """
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")
