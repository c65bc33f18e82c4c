"""Deterministic seed derivation and portable integer sampling.

Every random decision in the simulator is driven by a 64-bit seed derived
from a single base seed through the splitmix64 mixing function.  The
derivation is pure integer arithmetic, so results are identical across
platforms and interpreter versions.

Derivation tree (all constants below):

    run_seed(i)        = derive(seed_base, TAG_RUN, i)
    round_seed(r)      = derive(run_seed, TAG_ROUND, r)
    data_seed(node)    = derive(run_seed, TAG_DATA, node_index, role_tag)
    adversary_seed     = derive(run_seed, TAG_ADV, round, node_index)
    true_weights_seed  = derive(run_seed, TAG_WSTAR)
    oracle_seed        = derive(run_seed, TAG_ORACLE)

Participant selection uses a splitmix64 output stream feeding a partial
Fisher-Yates shuffle with rejection-sampled bounded draws, which keeps the
selected sets independent of any numpy RNG implementation details.  Data
and noise generation use numpy Generators seeded from derived values.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# splitmix64 constants (Steele, Lea, Flood 2014).
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Domain separation tags, arbitrary distinct odd constants.
TAG_RUN = 0xF1A7_0001
TAG_ROUND = 0xF1A7_0003
TAG_DATA = 0xF1A7_0005
TAG_ADV = 0xF1A7_0007
TAG_WSTAR = 0xF1A7_0009
TAG_ORACLE = 0xF1A7_000B

ROLE_TAG_TRAIN = 0x7_0001
ROLE_TAG_TEST = 0x7_0002


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step: advance x by the golden gamma and mix."""
    z = (x + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *parts: int) -> int:
    """Fold integer parts into a seed, one splitmix64 step per part."""
    state = seed & MASK64
    for part in parts:
        state = splitmix64(state ^ (part & MASK64))
    return state


class Splitmix64Stream:
    """Stateful splitmix64 output stream used for participant selection."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def bounded(self, n: int) -> int:
        """Uniform draw in [0, n) via rejection sampling, bias-free."""
        if n <= 0:
            raise ValueError("bounded() requires n >= 1")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n


def sample_without_replacement(items: list, k: int, stream: Splitmix64Stream) -> list:
    """Draw k distinct items by partial Fisher-Yates over a copy of items."""
    if k > len(items):
        raise ValueError(f"cannot sample {k} from {len(items)} items")
    pool = list(items)
    out = []
    for i in range(k):
        j = i + stream.bounded(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
        out.append(pool[i])
    return out


def numpy_rng(seed: int) -> np.random.Generator:
    """numpy Generator seeded from a derived 64-bit value."""
    return np.random.default_rng(seed & MASK64)
