"""Ready-made frequency-based function instances.

Each adapter reduces its problem to one scheme run: distinct-element
counting, maximum frequency (via a prover-claimed pivot), multiset
inclusion over an interleaved tagged stream, and arbitrary user g.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .scheme import (
    SchemeOutcome,
    SchemeParams,
    ValueFn,
    apply_attack,
    build_help,
    verifier_run,
)
from .streams import StreamToken, frequency_vector

F0_FN = ValueFn(p=0, fn=lambda x: 0 if x == 0 else 1, name="f0")
SQUARE_FN = ValueFn(p=2, fn=lambda x: x * x, name="square")
BELOW_ZERO_FN = ValueFn(p=0, fn=lambda x: 1 if x < 0 else 0, name="below-zero")


def max_frequency_fn() -> ValueFn:
    """g counts elements strictly above the prover's claimed maximum, so
    the claim is right exactly when the scheme output is zero."""
    return ValueFn(
        p=0,
        make_fn=lambda pivot: (lambda x: 0 if x <= pivot else 1),
        name="finf",
    )


@dataclass(frozen=True)
class AppResult:
    """Application-level answer plus the underlying run outcome."""

    value: int | bool | None
    outcome: SchemeOutcome

    def __post_init__(self):
        assert (self.value is None) == (not self.outcome.ok)


def _run(stream, vfn, params, seed, extra_keys=(), attack=None) -> SchemeOutcome:
    help_msg = build_help(stream, vfn, params, extra_keys=extra_keys)
    if attack is not None:
        kind, attack_seed = attack
        help_msg, _ = apply_attack(help_msg, kind, attack_seed, params, stream=stream)
    return verifier_run(stream, help_msg.to_bytes(), vfn, params, rng_seed=seed)


def run_generic(
    stream: Sequence[StreamToken],
    vfn: ValueFn,
    params: SchemeParams,
    seed: int = 0,
    attack=None,
) -> AppResult:
    outcome = _run(stream, vfn, params, seed, attack=attack)
    return AppResult(outcome.result, outcome)


def run_f0(stream, params, seed: int = 0, attack=None) -> AppResult:
    """Number of elements with non-zero frequency."""
    return run_generic(stream, F0_FN, params, seed, attack=attack)


def run_finf(stream, params, seed: int = 0, attack=None) -> AppResult:
    """Maximum frequency over the (signed) frequency vector.

    The honest prover adds the argmax element to its claims; the claimed
    value rides the same exactness certificate as every other claim, and
    the scheme then counts elements exceeding it.  A zero count accepts
    the claim; anything else means the maximality assertion was false.
    """
    vfn = max_frequency_fn()
    freqs = frequency_vector(stream, params.n)
    best = max(sorted(freqs), key=freqs.__getitem__, default=1)
    outcome = _run(stream, vfn, params, seed, extra_keys={best}, attack=attack)
    if not outcome.ok:
        return AppResult(None, outcome)
    if outcome.result != 0:
        return AppResult(
            None, replace(outcome, result=None, reject_reason="claim-rejected")
        )
    return AppResult(max(freqs.values(), default=0), outcome)


def multiset_stream(
    xs: Iterable[int], ys: Iterable[int], seed: int = 0
) -> list[StreamToken]:
    """Interleave two multisets into one turnstile stream: members of the
    candidate subset decrement, members of the container increment."""
    tokens = [StreamToken(j, -1) for j in xs] + [StreamToken(j, 1) for j in ys]
    random.Random(seed).shuffle(tokens)
    return tokens


def run_multiset_inclusion(
    stream: Sequence[StreamToken],
    params: SchemeParams,
    seed: int = 0,
    attack=None,
) -> AppResult:
    """True iff the decrement-tagged multiset is contained in the
    increment-tagged one, i.e. no element ends with negative frequency."""
    outcome = _run(stream, BELOW_ZERO_FN, params, seed, attack=attack)
    if not outcome.ok:
        return AppResult(None, outcome)
    return AppResult(outcome.result == 0, outcome)
