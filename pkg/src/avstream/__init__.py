"""avstream: prover-assisted exact frequency-based functions over
turnstile streams, with measured help and verification costs."""

from .apps import (
    AppResult,
    BELOW_ZERO_FN,
    F0_FN,
    SQUARE_FN,
    max_frequency_fn,
    multiset_stream,
    run_f0,
    run_finf,
    run_generic,
    run_multiset_inclusion,
)
from .field import DensePoly, PrimeField, find_prime
from .scheme import (
    ATTACK_KINDS,
    HelpMessage,
    SchemeOutcome,
    SchemeParams,
    ValueFn,
    VARIANT_CM,
    VARIANT_EMG,
    apply_attack,
    build_help,
    make_params,
    parse_help,
    verifier_run,
)
from .streams import ShapeParams, StreamToken, exact_oracle, gen_stream

__all__ = [
    "AppResult",
    "ATTACK_KINDS",
    "BELOW_ZERO_FN",
    "DensePoly",
    "F0_FN",
    "HelpMessage",
    "PrimeField",
    "SQUARE_FN",
    "SchemeOutcome",
    "SchemeParams",
    "ShapeParams",
    "StreamToken",
    "ValueFn",
    "VARIANT_CM",
    "VARIANT_EMG",
    "apply_attack",
    "build_help",
    "exact_oracle",
    "find_prime",
    "gen_stream",
    "make_params",
    "max_frequency_fn",
    "multiset_stream",
    "parse_help",
    "run_f0",
    "run_finf",
    "run_generic",
    "run_multiset_inclusion",
    "verifier_run",
]
