"""Low-degree-extension fingerprints of grid-shaped frequency vectors.

With the universe shaped as a d1 x d2 grid, the extension of a grid
function f is the unique polynomial of degree (d1-1, d2-1) agreeing with
f on the grid.  Evaluated at a secret first coordinate r, the row of
values at all grid second coordinates is a linear fingerprint: each
stream token moves exactly one entry by a precomputed basis weight.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .field import PrimeField, lagrange_row_weights
from .streams import ShapeParams


class FingerprintRow:
    """Streamed row of a frequency extension at a fixed first coordinate.

    Entry y holds sum_x f(x, y) * L_x(r) at every point in the stream.
    Single-writer while streaming; read-only afterwards.
    """

    def __init__(self, r: int, shape: ShapeParams, field: PrimeField):
        self.r = r % field.q
        self.shape = shape
        self.field = field
        self.weights = lagrange_row_weights(self.r, shape.d1, field)
        self.row = [0] * shape.d2

    def update(self, index: int, delta: int) -> None:
        # The grid-point factor in the second coordinate is a unit impulse,
        # so a token touches exactly one row entry.
        x, y = divmod(index - 1, self.shape.d2)
        w = self.weights[x]
        cur = self.row[y]
        self.row[y] = (cur + w if delta > 0 else cur - w) % self.field.q

    @property
    def size_bits(self) -> int:
        return self.shape.d2 * self.field.bits_per_elem


def indicator_row(
    claimed: Iterable[int],
    r: int,
    shape: ShapeParams,
    field: PrimeField,
    weights: list[int] | None = None,
) -> list[int]:
    """Row at r of the extension of h(j) = 1 if j unclaimed else 0.

    Uses that the extension of the all-ones grid function is the constant 1;
    each claimed index subtracts its basis weight from one entry.  Padded
    grid cells are never claimed and keep h = 1.
    """
    q = field.q
    if weights is None:
        weights = lagrange_row_weights(r, shape.d1, field)
    row = [1] * shape.d2
    for j in claimed:
        x, y = divmod(j - 1, shape.d2)
        row[y] = (row[y] - weights[x]) % q
    return row


def claims_row(
    claims: Iterable[tuple[int, int]],
    r: int,
    shape: ShapeParams,
    field: PrimeField,
    weights: list[int] | None = None,
) -> list[int]:
    """Row at r of the extension of the claimed frequencies, zero off the
    claimed set.  Claim values are signed ints, embedded into the field."""
    q = field.q
    if weights is None:
        weights = lagrange_row_weights(r, shape.d1, field)
    row = [0] * shape.d2
    for j, v in claims:
        x, y = divmod(j - 1, shape.d2)
        row[y] = (row[y] + (v % q) * weights[x]) % q
    return row


def offline_row_at(
    freqs: Mapping[int, int],
    x_star: int,
    shape: ShapeParams,
    field: PrimeField,
) -> list[int]:
    """Row of the frequency extension at an arbitrary first coordinate,
    computed from a complete (sparse) frequency vector.  Prover-side and
    test-oracle use; the verifier never has `freqs`."""
    q = field.q
    weights = lagrange_row_weights(x_star, shape.d1, field)
    row = [0] * shape.d2
    for j, v in freqs.items():
        x, y = divmod(j - 1, shape.d2)
        row[y] = (row[y] + (v % q) * weights[x]) % q
    return row
