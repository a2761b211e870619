"""Deterministic 64-bit PRNG used everywhere randomness is needed.

The engine must produce identical worlds and rollouts for identical seeds on
every platform, so all random draws go through this one generator. State
transitions are integer-only (no float accumulation) and independent of the
host's random module.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    """splitmix64 generator: tiny state, full 64-bit output, stable everywhere."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def below(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct integers from range(n), in draw order."""
        if k > n:
            raise ValueError("cannot sample more values than the range holds")
        picked: list[int] = []
        seen = set()
        while len(picked) < k:
            i = self.below(n)
            if i not in seen:
                seen.add(i)
                picked.append(i)
        return picked

    def spawn(self) -> "SplitMix64":
        """Child generator with a state derived from this one."""
        return SplitMix64(self.next_u64())
