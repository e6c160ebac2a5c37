"""Per-packet loss sampling on a portable 64-bit RNG.

The splitmix64 generator is implemented here and re-implemented verbatim in
the compiled kernel so both backends draw bit-identical streams; the parity
test in tests/test_emulator.py guards the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .profiles import LossModel

_M64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance splitmix64; returns (new_state, 64-bit output)."""
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    z = z ^ (z >> 31)
    return state, z


def splitmix64_uniform(state: int) -> tuple[int, float]:
    """Advance the generator and map the output to a double in [0, 1)."""
    state, z = splitmix64_next(state)
    return state, (z >> 11) * _INV_2_53


@dataclass(frozen=True)
class LossState:
    """RNG position plus the gilbert chain state (bad=True while bursting)."""

    rng: int
    in_bad: bool = False


def sample_loss(model: LossModel, state: LossState) -> tuple[bool, LossState]:
    """Draw one per-packet loss decision; pure function of (model, state).

    iid: one uniform, lost iff u < p. gilbert: one uniform advances the
    two-state chain, then a second uniform decides loss only while in the
    bad state.
    """
    if model.kind == "none":
        return False, state
    if model.kind == "iid":
        rng, u = splitmix64_uniform(state.rng)
        return u < model.p, LossState(rng, state.in_bad)
    # gilbert
    rng, u = splitmix64_uniform(state.rng)
    if state.in_bad:
        in_bad = not (u < model.p_bad_to_good)
    else:
        in_bad = u < model.p_good_to_bad
    if in_bad:
        rng, u2 = splitmix64_uniform(rng)
        return u2 < model.loss_in_bad, LossState(rng, True)
    return False, LossState(rng, False)
