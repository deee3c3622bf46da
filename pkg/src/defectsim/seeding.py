"""Deterministic derivation of per-run random seeds.

Every stochastic piece of a simulation (module orderings, test-outcome
corruption, synthetic data) draws from a ``numpy`` generator whose seed is
derived from a single master seed plus a list of coordinate tokens (dataset
name, strategy name, probability, repetition index, ...).  The derivation is
a splitmix64-style mix over the token bytes, so the same coordinates always
produce the same 64-bit seed, independent of process, platform, and Python
hash randomization.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """Advance-and-mix step of the splitmix64 generator.

    Maps a 64-bit state to a well-mixed 64-bit output; used here purely as a
    mixing function for seed derivation.
    """
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    state ^= state >> 30
    state = (state * 0xBF58476D1CE4E5B9) & _MASK64
    state ^= state >> 27
    state = (state * 0x94D049BB133111EB) & _MASK64
    state ^= state >> 31
    return state


def _token_bytes(token: int | float | str) -> bytes:
    # A type tag keeps e.g. the int 1, the float 1.0 and the string "1"
    # from colliding.
    if isinstance(token, bool):
        raise TypeError("boolean seed tokens are ambiguous; use int or str")
    if isinstance(token, int):
        return b"i" + token.to_bytes(8, "little", signed=True)
    if isinstance(token, float):
        return b"f" + repr(token).encode("utf-8")
    if isinstance(token, str):
        return b"s" + token.encode("utf-8")
    raise TypeError(f"unsupported seed token type: {type(token).__name__}")


def derive_seed(master_seed: int, *tokens: int | float | str) -> int:
    """Derive a 64-bit seed from a master seed and coordinate tokens.

    The same ``(master_seed, tokens)`` combination always yields the same
    seed; distinct token sequences yield (with overwhelming probability)
    unrelated seeds.
    """
    state = splitmix64(master_seed & _MASK64)
    for token in tokens:
        for byte in _token_bytes(token):
            state = splitmix64(state ^ byte)
    return state
