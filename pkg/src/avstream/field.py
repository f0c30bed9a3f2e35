"""Prime-field arithmetic and univariate polynomial helpers.

Field elements are plain Python ints reduced into [0, q).  The modulus is
capped below 2**63 so every product fits a 128-bit intermediate, both in
CPython's int fast path and in the compiled kernels.  Polynomials are lists
of coefficients in ascending-degree order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAX_MODULUS = 1 << 63

# Witness set that makes Miller-Rabin deterministic for all n < 2**64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class FieldConfigError(ValueError):
    """Raised for unusable modulus requests (out of range, composite)."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test, valid for n < 2**64."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    """Arithmetic context for F_q with a fixed odd prime q < 2**63."""

    q: int

    def __post_init__(self):
        if not 2 < self.q < MAX_MODULUS:
            raise FieldConfigError(f"modulus out of supported range: {self.q}")
        if not is_prime(self.q):
            raise FieldConfigError(f"modulus is not prime: {self.q}")

    @property
    def bits_per_elem(self) -> int:
        return self.q.bit_length()

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def neg(self, a: int) -> int:
        return -a % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroDivisionError("cannot invert zero")
        return pow(a, self.q - 2, self.q)

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.q)

    def embed(self, v: int) -> int:
        """Embed a signed integer; negatives map to q - |v|."""
        return v % self.q

    def to_signed(self, u: int) -> int:
        """Inverse of embed on the symmetric range |v| <= (q-1)//2."""
        return u if u <= (self.q - 1) // 2 else u - self.q

    def rand(self, rng) -> int:
        return rng.randrange(self.q)


def find_prime(lo: int) -> PrimeField:
    """Smallest prime q with lo < q < 2*lo (existence by Bertrand)."""
    if not 2 <= lo < (1 << 62):
        raise FieldConfigError(f"prime search bound out of range: {lo}")
    c = lo + 1
    if c % 2 == 0 and c != 2:
        c += 1
    while c < 2 * lo:
        if is_prime(c):
            return PrimeField(c)
        c += 2
    raise FieldConfigError(f"no prime in ({lo}, {2 * lo})")  # unreachable


def batch_inverse(vals: list[int], field: PrimeField) -> list[int]:
    """Invert many nonzero elements with one modular inversion."""
    n = len(vals)
    if n == 0:
        return []
    q = field.q
    prefix = [0] * n
    acc = 1
    for i, v in enumerate(vals):
        acc = acc * v % q
        prefix[i] = acc
    inv_acc = field.inv(acc)
    out = [0] * n
    for i in range(n - 1, 0, -1):
        out[i] = inv_acc * prefix[i - 1] % q
        inv_acc = inv_acc * vals[i] % q
    out[0] = inv_acc
    return out


def poly_eval(coeffs: list[int], x: int, field: PrimeField) -> int:
    """Horner evaluation; coeffs in ascending-degree order."""
    q = field.q
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def poly_interpolate(points: list[tuple[int, int]], field: PrimeField) -> list[int]:
    """Coefficients of the unique polynomial of degree < len(points)
    through the given (x, y) pairs.  O(len**2) arithmetic.
    """
    q = field.q
    xs = [x % q for x, _ in points]
    ys = [y % q for _, y in points]
    k = len(points)
    if k == 0:
        return [0]
    if len(set(xs)) != k:
        raise ValueError("duplicate x-coordinates in interpolation")

    # Master polynomial prod (X - x_i), then strip one root per point by
    # synthetic division; a single batched inversion covers all denominators.
    root = [1]
    for x in xs:
        root = [0] + root
        for i in range(len(root) - 1):
            root[i] = (root[i] - x * root[i + 1]) % q
    nums = []
    denoms = []
    for x in xs:
        num = [0] * (k - 1) + [1]
        for i in range(k - 2, -1, -1):
            num[i] = (root[i + 1] + x * num[i + 1]) % q
        nums.append(num)
        denoms.append(poly_eval(num, x, field))
    inv_denoms = batch_inverse(denoms, field)
    coeffs = [0] * k
    for y, num, inv_d in zip(ys, nums, inv_denoms):
        scale = y * inv_d % q
        if scale == 0:
            continue
        for i in range(k):
            coeffs[i] = (coeffs[i] + scale * num[i]) % q
    return coeffs


def lagrange_row_weights(r: int, d: int, field: PrimeField) -> list[int]:
    """Evaluations [L_1(r), ..., L_d(r)] of the degree-(d-1) Lagrange basis
    over the grid {1, ..., d}, in O(d) field operations.
    """
    q = field.q
    if d < 1:
        raise ValueError("grid size must be >= 1")
    if d >= q:
        raise FieldConfigError(f"grid size {d} does not fit in F_{q}")
    r %= q
    if 1 <= r <= d:
        out = [0] * d
        out[r - 1] = 1
        return out
    # prefix[i] = prod_{t<=i} (r - t), suffix[i] = prod_{t>=i} (r - t)
    prefix = [1] * (d + 1)
    for i in range(1, d + 1):
        prefix[i] = prefix[i - 1] * (r - i) % q
    suffix = [1] * (d + 2)
    for i in range(d, 0, -1):
        suffix[i] = suffix[i + 1] * (r - i) % q
    fact = [1] * d
    for i in range(1, d):
        fact[i] = fact[i - 1] * i % q
    inv_fact = [1] * d
    inv_fact[d - 1] = field.inv(fact[d - 1])
    for i in range(d - 1, 0, -1):
        inv_fact[i - 1] = inv_fact[i] * i % q
    out = [0] * d
    for x in range(1, d + 1):
        w = prefix[x - 1] * suffix[x + 1] % q
        w = w * inv_fact[x - 1] % q * inv_fact[d - x] % q
        if (d - x) % 2 == 1:
            w = -w % q
        out[x - 1] = w
    return out


@dataclass
class DensePoly:
    """Dense coefficient vector, ascending degree; trailing zeros allowed."""

    coeffs: list[int]

    @property
    def degree_bound(self) -> int:
        return len(self.coeffs) - 1


# Wire format: field elements are 8-byte little-endian unsigned ints; a
# polynomial is a 4-byte little-endian length followed by its coefficients.

def elem_to_bytes(v: int) -> bytes:
    return struct.pack("<Q", v)


def elem_from_bytes(buf: bytes, off: int) -> tuple[int, int]:
    (v,) = struct.unpack_from("<Q", buf, off)
    return v, off + 8


def poly_to_bytes(poly: DensePoly) -> bytes:
    parts = [struct.pack("<I", len(poly.coeffs))]
    parts.extend(struct.pack("<Q", c) for c in poly.coeffs)
    return b"".join(parts)


def poly_from_bytes(buf: bytes, off: int) -> tuple[DensePoly, int]:
    if off + 4 > len(buf):
        raise ValueError("truncated polynomial length")
    (k,) = struct.unpack_from("<I", buf, off)
    off += 4
    if off + 8 * k > len(buf):
        raise ValueError("truncated polynomial body")
    coeffs = list(struct.unpack_from(f"<{k}Q", buf, off)) if k else []
    return DensePoly(coeffs), off + 8 * k
