"""One-round prover/verifier schemes for exact frequency-based functions.

A run computes G(f) = sum_j g(f_j) over a turnstile stream exactly, with an
untrusted prover supplying a help message the space-bounded verifier checks:

  * the verifier fingerprints the frequency grid at a secret point and runs
    a small-space summary (TurnstileMisraGries, or CountMedianSketch for
    long streams) to learn which elements it cannot bound tightly;
  * the prover claims exact frequencies for those heavy elements and sends
    two low-degree polynomials: a row-sum encoding of the light elements'
    contribution and a consistency certificate for the claimed values;
  * the verifier re-derives both polynomials' values at its secret point
    from its own state, checks the certificate sums to zero over the grid
    rows, and only then assembles the exact output.

The "emg" variant is deterministic on the stream side and never rejects an
honest prover; the "cm" variant tolerates streams far longer than the
universe at the cost of a small completeness error.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _speed
from .field import (
    DensePoly,
    FieldConfigError,
    PrimeField,
    find_prime,
    poly_eval,
    poly_from_bytes,
    poly_interpolate,
    poly_to_bytes,
)
from .lde import FingerprintRow, claims_row, indicator_row
from .streams import ShapeParams, StreamToken
from .summaries import CountMedianSketch, TurnstileMisraGries
from .util import derive_seed, iroot_ceil

VARIANT_EMG = "emg"
VARIANT_CM = "cm"
VARIANTS = (VARIANT_EMG, VARIANT_CM)

# Reject diagnostics (wire-level vocabulary, also used by the CLI reports).
REJECT_MALFORMED = "malformed"
REJECT_SUM_POLY = "P-mismatch"
REJECT_CHECK_POLY = "Q-mismatch"
REJECT_RESIDUAL = "T-nonzero"
REJECT_FLAGGED_SET = "M-not-subset"

MAGIC = b"AVS1"


class SchemeConfigError(ValueError):
    """Parameters or stream violate a run precondition."""


class GContractError(ValueError):
    """Value function breaks its declared range bound."""


class ProofTooLargeError(ValueError):
    """Honest claim set exceeds the configured cap (misconfiguration)."""


class MalformedHelp(ValueError):
    """Help bytes fail structural validation."""


@dataclass(frozen=True)
class ValueFn:
    """Per-frequency value function g: Z -> Z+, with range(g) <= n**p.

    Help-dependent functions (max-frequency checking) supply `make_fn`,
    which receives the pivot extracted from the prover's claims and returns
    the concrete g.
    """

    p: int
    fn: Callable[[int], int] | None = None
    make_fn: Callable[[int], Callable[[int], int]] | None = None
    name: str = "g"

    @property
    def depends_on_help(self) -> bool:
        return self.make_fn is not None

    def resolve(self, pivot: int = 0) -> Callable[[int], int]:
        if self.make_fn is not None:
            return self.make_fn(pivot)
        if self.fn is None:
            raise SchemeConfigError("value function has neither fn nor make_fn")
        return self.fn


@dataclass(frozen=True)
class SchemeParams:
    """Derived per-run constants shared by prover and verifier."""

    n: int
    m_cap: int
    p: int
    variant: str
    c: int
    capacity: int  # summary counters per copy
    band: int  # unclaimed frequencies are guaranteed inside [-band, band]
    shape: ShapeParams
    field: PrimeField
    sum_degree_cap: int
    check_degree_cap: int
    claims_cap: int
    cm_width: int
    cm_depth: int


def make_params(
    n: int,
    m_cap: int,
    p: int,
    variant: str = VARIANT_EMG,
    c: int = 4,
    capacity: int | None = None,
    field_q: int | None = None,
) -> SchemeParams:
    """Build run parameters.

    The modulus is the smallest prime exceeding every wraparound bound:
    the grid total of g (including padding cells), and the worst-case
    claim-consistency residual 4*n*m**2.  `field_q` forces a specific
    modulus for small exhaustive tests and skips those bounds.
    """
    if n < 1:
        raise SchemeConfigError(f"universe size must be >= 1, got {n}")
    if m_cap < 0 or p < 0 or c < 1:
        raise SchemeConfigError("m_cap, p must be >= 0 and c >= 1")
    if variant not in VARIANTS:
        raise SchemeConfigError(f"unknown variant {variant!r}")
    shape = ShapeParams.for_universe(n)
    if capacity is None:
        capacity = iroot_ceil(n * n, 3)
    if capacity < 1:
        raise SchemeConfigError("capacity must be >= 1")
    band = -(-m_cap // capacity)
    dx = shape.d1 - 1
    sum_degree_cap = (2 * band + 1) * dx + dx
    check_degree_cap = 3 * dx
    if field_q is not None:
        field = PrimeField(field_q)
    else:
        lo = max(
            (n + shape.d2) * n**p,
            4 * n * m_cap * m_cap,
            2 * band + 1,
            sum_degree_cap + 1,
            2,
        )
        field = find_prime(lo)
    if max(shape.d1, shape.d2, 2 * band + 1, sum_degree_cap + 1) >= field.q:
        raise FieldConfigError(
            f"modulus {field.q} too small for n={n}, m_cap={m_cap}"
        )
    if variant == VARIANT_CM:
        cm_width = -(-8 * c * n // max(band, 1))
        cm_depth = _cm_depth()
        claims_cap = -(-4 * c * n // max(band, 1)) + 16
    else:
        cm_width = 0
        cm_depth = 0
        claims_cap = 2 * capacity + 16
    return SchemeParams(
        n=n,
        m_cap=m_cap,
        p=p,
        variant=variant,
        c=c,
        capacity=capacity,
        band=band,
        shape=shape,
        field=field,
        sum_degree_cap=sum_degree_cap,
        check_degree_cap=check_degree_cap,
        claims_cap=claims_cap,
        cm_width=cm_width,
        cm_depth=cm_depth,
    )


def _cm_depth(eps: float = 0.25, c_d: int = 4) -> int:
    import math

    d = math.ceil(c_d * math.log(1.0 / eps))
    return d if d % 2 == 1 else d + 1  # odd so the median is one counter


@dataclass(frozen=True)
class SchemeOutcome:
    """Either the exact value of G(f), or a rejection with a diagnostic."""

    result: int | None
    reject_reason: str | None
    hcost_bits: int
    vcost_bits: int
    variant: str

    def __post_init__(self):
        assert (self.result is None) == (self.reject_reason is not None)

    @property
    def ok(self) -> bool:
        return self.result is not None


@dataclass
class HelpMessage:
    """The prover's proof: exact claims for the heavy set plus the two
    polynomial encodings, all in wire (field-residue) form."""

    claims: list[tuple[int, int]]  # (index, embedded value), ascending index
    sum_poly: DensePoly
    check_poly: DensePoly

    def to_bytes(self) -> bytes:
        parts = [MAGIC, struct.pack("<I", len(self.claims))]
        parts.extend(struct.pack("<IQ", j, v) for j, v in self.claims)
        parts.append(poly_to_bytes(self.sum_poly))
        parts.append(poly_to_bytes(self.check_poly))
        return b"".join(parts)


def parse_help(data: bytes) -> HelpMessage:
    """Structural parse; raises MalformedHelp on any framing violation."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise MalformedHelp("bad magic")
    off = 4
    if off + 4 > len(data):
        raise MalformedHelp("truncated claim count")
    (count,) = struct.unpack_from("<I", data, off)
    off += 4
    if off + 12 * count > len(data):
        raise MalformedHelp("truncated claims")
    claims = []
    prev = 0
    for _ in range(count):
        j, v = struct.unpack_from("<IQ", data, off)
        off += 12
        if j <= prev:
            raise MalformedHelp("claims not strictly ascending")
        prev = j
        claims.append((j, v))
    try:
        sum_poly, off = poly_from_bytes(data, off)
        check_poly, off = poly_from_bytes(data, off)
    except ValueError as exc:
        raise MalformedHelp(str(exc)) from exc
    if off != len(data):
        raise MalformedHelp("trailing bytes after help message")
    return HelpMessage(claims=claims, sum_poly=sum_poly, check_poly=check_poly)


def band_polynomial(
    g: Callable[[int], int], band: int, field: PrimeField, n: int, p: int
) -> list[int]:
    """Lowest-degree polynomial agreeing with g on the integers
    [-band, band], trailing zeros stripped.  Enforces 0 <= g <= n**p."""
    cap = n**p
    pts = []
    for v in range(-band, band + 1):
        gv = g(v)
        if not 0 <= gv <= cap:
            raise GContractError(f"g({v}) = {gv} outside [0, {cap}]")
        pts.append((field.embed(v), gv % field.q))
    coeffs = poly_interpolate(pts, field)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _grid_from_stream(
    stream: Iterable[StreamToken], params: SchemeParams
) -> tuple[np.ndarray, int]:
    shape = params.shape
    grid = np.zeros((shape.d1, shape.d2), dtype=np.int64)
    m_seen = 0
    for index, delta in stream:
        if not 1 <= index <= params.n:
            raise SchemeConfigError(f"token index {index} outside [1, {params.n}]")
        if delta not in (-1, 1):
            raise SchemeConfigError(f"token delta must be +-1, got {delta}")
        x, y = divmod(index - 1, shape.d2)
        grid[x, y] += delta
        m_seen += 1
    return grid, m_seen


def _cells(indices: Iterable[int], d2: int) -> list[tuple[int, int]]:
    return [((j - 1) // d2 + 1, (j - 1) % d2 + 1) for j in indices]


def build_help(
    stream: Sequence[StreamToken],
    vfn: ValueFn,
    params: SchemeParams,
    extra_keys: Iterable[int] = (),
) -> HelpMessage:
    """Honest prover: replay the stream, claim the heavy set exactly, and
    construct both polynomials by evaluate-then-interpolate."""
    field = params.field
    shape = params.shape
    grid, m_seen = _grid_from_stream(stream, params)
    if params.variant == VARIANT_EMG:
        if m_seen > params.m_cap:
            raise SchemeConfigError(
                f"stream length {m_seen} exceeds cap {params.m_cap}"
            )
        replay = TurnstileMisraGries(params.capacity)
        for index, delta in stream:
            replay.process(index, delta)
        heavy = replay.keys()
    else:
        xs, ys = np.nonzero(np.abs(grid) * 2 >= params.band)
        heavy = {int(x) * shape.d2 + int(y) + 1 for x, y in zip(xs, ys)}
    extra = set(extra_keys)
    if any(not 1 <= j <= params.n for j in extra):
        raise SchemeConfigError("extra keys outside the universe")
    claimed = sorted(heavy | extra)
    if len(claimed) > params.claims_cap:
        raise ProofTooLargeError(
            f"{len(claimed)} claims exceed cap {params.claims_cap}"
        )
    signed = [int(grid[(j - 1) // shape.d2, (j - 1) % shape.d2]) for j in claimed]
    claims = [(j, field.embed(v)) for j, v in zip(claimed, signed)]

    pivot = max(signed, default=0) if vfn.depends_on_help else 0
    g = vfn.resolve(pivot)
    g_band = band_polynomial(g, params.band, field, params.n, params.p)

    dx = shape.d1 - 1
    sum_degree = (len(g_band) - 1) * dx + dx
    assert sum_degree <= params.sum_degree_cap
    sum_evals = _speed.sum_poly_evals(
        grid, _cells(claimed, shape.d2), g_band, sum_degree + 1, field
    )
    sum_coeffs = _speed.newton_coeffs(sum_evals, field)

    claim_cells = [
        ((j - 1) // shape.d2 + 1, (j - 1) % shape.d2 + 1, v)
        for j, v in zip(claimed, signed)
    ]
    check_evals = _speed.check_poly_evals(
        grid, claim_cells, params.check_degree_cap + 1, field
    )
    check_coeffs = _speed.newton_coeffs(check_evals, field)
    return HelpMessage(
        claims=claims,
        sum_poly=DensePoly(sum_coeffs),
        check_poly=DensePoly(check_coeffs),
    )


class CostMeter:
    """Peak of a sum of named space components, in bits."""

    def __init__(self):
        self._parts: dict[str, int] = {}
        self._total = 0
        self.peak = 0

    def set(self, part: str, bits: int) -> None:
        self._total += bits - self._parts.get(part, 0)
        self._parts[part] = bits
        if self._total > self.peak:
            self.peak = self._total


class VerifierState:
    """The verifier's working set during stream processing: the secret
    evaluation point, the fingerprint row, the summary, and cost meters.
    The secret point is never serialized anywhere prover-visible."""

    def __init__(self, params: SchemeParams, rng_seed: int, r: int | None = None):
        field = params.field
        rng = random.Random(derive_seed(rng_seed, "verifier-point"))
        self.r = field.rand(rng) if r is None else r % field.q
        self.meter = CostMeter()
        self.row = FingerprintRow(self.r, params.shape, field)
        if params.variant == VARIANT_EMG:
            self.summary = TurnstileMisraGries(params.capacity)
        else:
            self.summary = CountMedianSketch(
                params.cm_width,
                params.cm_depth,
                seed=derive_seed(rng_seed, "verifier-sketch"),
            )
        self.tokens_seen = 0
        self._params = params
        self._m_ctx = max(params.m_cap, 2)
        self.meter.set("fingerprint", self.row.size_bits)
        self.meter.set("summary", self.summary.size_bits(params.n, self._m_ctx))
        # secret point, streamed-evaluation accumulators for both polys
        self.meter.set(
            "accumulators", (2 * (params.shape.d1 + 2) + 4) * field.bits_per_elem
        )

    def absorb(self, index: int, delta: int) -> None:
        if not 1 <= index <= self._params.n:
            raise SchemeConfigError(
                f"token index {index} outside [1, {self._params.n}]"
            )
        self.row.update(index, delta)
        self.summary.process(index, delta)
        self.tokens_seen += 1
        self.meter.set("summary", self.summary.size_bits(self._params.n, self._m_ctx))


def verifier_run(
    stream: Iterable[StreamToken],
    help_data: bytes,
    vfn: ValueFn,
    params: SchemeParams,
    rng_seed: int = 0,
    _r: int | None = None,
) -> SchemeOutcome:
    """Single-pass verification of a (possibly adversarial) help message.

    `_r` pins the secret evaluation point; the exhaustive small-field
    soundness tests sweep it over the whole field.
    """
    field = params.field
    q = field.q
    shape = params.shape
    hcost = len(help_data) * 8
    state = VerifierState(params, rng_seed, r=_r)
    for index, delta in stream:
        state.absorb(index, delta)
    m_seen = state.tokens_seen
    if params.variant == VARIANT_EMG and m_seen > params.m_cap:
        raise SchemeConfigError(
            f"stream length {m_seen} exceeds cap {params.m_cap}"
        )
    meter = state.meter

    def rejected(reason: str) -> SchemeOutcome:
        return SchemeOutcome(None, reason, hcost, meter.peak, params.variant)

    try:
        msg = parse_help(help_data)
    except MalformedHelp:
        return rejected(REJECT_MALFORMED)

    # Semantic caps: claim volume, degree bounds, residue ranges.  Claimed
    # values must decode to genuine frequencies |v| <= m, which also keeps
    # the consistency residual below the modulus.
    if len(msg.claims) > params.claims_cap:
        return rejected(REJECT_MALFORMED)
    sp = msg.sum_poly.coeffs
    cp = msg.check_poly.coeffs
    if not 1 <= len(sp) <= params.sum_degree_cap + 1:
        return rejected(REJECT_MALFORMED)
    if not 1 <= len(cp) <= params.check_degree_cap + 1:
        return rejected(REJECT_MALFORMED)
    if any(c >= q for c in sp) or any(c >= q for c in cp):
        return rejected(REJECT_MALFORMED)
    claims: list[tuple[int, int]] = []
    for j, res in msg.claims:
        if not 1 <= j <= params.n or res >= q:
            return rejected(REJECT_MALFORMED)
        v = field.to_signed(res)
        if abs(v) > m_seen:
            return rejected(REJECT_MALFORMED)
        claims.append((j, v))
    claimed_set = {j for j, _ in claims}

    # Coverage: every element the summary cannot bound must be claimed.
    if params.variant == VARIANT_EMG:
        if not state.summary.keys() <= claimed_set:
            return rejected(REJECT_MALFORMED)
    else:
        for j in range(1, params.n + 1):
            if 4 * abs(state.summary.estimate(j)) >= 3 * params.band:
                if j not in claimed_set:
                    return rejected(REJECT_FLAGGED_SET)

    pivot = max((v for _, v in claims), default=0) if vfn.depends_on_help else 0
    g = vfn.resolve(pivot)
    heavy_total = 0
    for _, v in claims:
        gv = g(v)
        if not 0 <= gv <= params.n**params.p:
            raise GContractError(f"g({v}) = {gv} outside [0, {params.n**params.p}]")
        heavy_total += gv
    g_band = band_polynomial(g, params.band, field, params.n, params.p)
    meter.set("band_poly", len(g_band) * field.bits_per_elem)

    weights = state.row.weights
    h_row = indicator_row(claimed_set, state.r, shape, field, weights=weights)
    f_claim_row = claims_row(claims, state.r, shape, field, weights=weights)
    meter.set("claim_rows", 2 * shape.d2 * field.bits_per_elem)

    sum_at_r = poly_eval(sp, state.r, field)
    check_at_r = poly_eval(cp, state.r, field)
    light_total = 0
    residual = 0
    for x in range(1, shape.d1 + 1):
        light_total = (light_total + poly_eval(sp, x, field)) % q
        residual = (residual + poly_eval(cp, x, field)) % q

    # Re-derive both polynomial values at the secret point from the
    # verifier's own fingerprint row.
    frow = state.row.row
    recomputed_sum = 0
    for y in range(shape.d2):
        recomputed_sum = (
            recomputed_sum + poly_eval(g_band, frow[y], field) * h_row[y]
        ) % q
    if recomputed_sum != sum_at_r:
        return rejected(REJECT_SUM_POLY)
    recomputed_check = 0
    for y in range(shape.d2):
        d = frow[y] - f_claim_row[y]
        recomputed_check = (
            recomputed_check + d * d % q * (1 - h_row[y])
        ) % q
    if recomputed_check != check_at_r:
        return rejected(REJECT_CHECK_POLY)
    if residual != 0:
        return rejected(REJECT_RESIDUAL)

    result = heavy_total + light_total - shape.padded_cells * g(0)
    return SchemeOutcome(result, None, hcost, meter.peak, params.variant)


# ---------------------------------------------------------------------------
# adversarial prover wrappers
# ---------------------------------------------------------------------------

ATTACK_KINDS = (
    "flip-coefficient",
    "perturb-claim",
    "drop-claim",
    "swap-claims",
    "inflate-result",
    "forge-consistent",
)


def apply_attack(
    msg: HelpMessage,
    kind: str,
    seed: int,
    params: SchemeParams,
    stream: Sequence[StreamToken] | None = None,
) -> tuple[HelpMessage, bool]:
    """Deterministic mutation of a help message.

    Returns (mutated, effective); effective is False when the requested
    mutation is a no-op on this message (e.g. dropping from empty claims).
    `stream` is only needed by forge-consistent, which re-derives the
    consistency polynomial for its forged claims from the true frequencies.
    """
    field = params.field
    q = field.q
    rng = random.Random(derive_seed(seed, f"attack:{kind}"))
    claims = list(msg.claims)
    sp = list(msg.sum_poly.coeffs)
    cp = list(msg.check_poly.coeffs)

    def out(effective: bool) -> tuple[HelpMessage, bool]:
        return (
            HelpMessage(claims, DensePoly(sp), DensePoly(cp)),
            effective,
        )

    if kind == "flip-coefficient":
        pos = rng.randrange(len(sp) + len(cp))
        delta = 1 + rng.randrange(q - 1)
        if pos < len(sp):
            sp[pos] = (sp[pos] + delta) % q
        else:
            cp[pos - len(sp)] = (cp[pos - len(sp)] + delta) % q
        return out(True)

    if kind in ("perturb-claim", "forge-consistent"):
        if not claims:
            return out(False)
        idx = rng.randrange(len(claims))
        j, res = claims[idx]
        v = field.to_signed(res)
        step = 1 + rng.randrange(3)
        nv = v - step if v > 0 else v + step  # pull toward/past zero
        if nv == v:
            return out(False)
        claims[idx] = (j, field.embed(nv))
        if kind == "perturb-claim":
            return out(True)
        if stream is None:
            raise SchemeConfigError("forge-consistent needs the stream")
        grid, _ = _grid_from_stream(stream, params)
        d2 = params.shape.d2
        cells = [
            ((cj - 1) // d2 + 1, (cj - 1) % d2 + 1, field.to_signed(cv))
            for cj, cv in claims
        ]
        evals = _speed.check_poly_evals(
            grid, cells, params.check_degree_cap + 1, field
        )
        cp = _speed.newton_coeffs(evals, field)
        return out(True)

    if kind == "drop-claim":
        if not claims:
            return out(False)
        del claims[rng.randrange(len(claims))]
        return out(True)

    if kind == "swap-claims":
        distinct = {res for _, res in claims}
        if len(claims) < 2 or len(distinct) < 2:
            return out(False)
        while True:
            a = rng.randrange(len(claims))
            b = rng.randrange(len(claims))
            if claims[a][1] != claims[b][1]:
                break
        claims[a], claims[b] = (claims[a][0], claims[b][1]), (claims[b][0], claims[a][1])
        return out(True)

    if kind == "inflate-result":
        delta = 1 + rng.randrange(q - 1)
        sp[0] = (sp[0] + delta) % q
        return out(True)

    raise SchemeConfigError(f"unknown attack kind {kind!r}")
