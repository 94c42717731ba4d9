"""Self-contained pseudo-random number generator for seeding experiments.

Cluster placement must be reproducible bit-for-bit from a 64-bit seed,
independently of numpy version or platform, so the generator is written out
explicitly rather than delegated to numpy's Generator machinery:

* stream: xoshiro256** (public-domain algorithm of Blackman and Vigna),
  state = four 64-bit words, output scrambled with a rotate-multiply;
* seeding: the four state words are drawn from a SplitMix64 sequence started
  at the seed, which guarantees a well-mixed nonzero state for every seed;
* doubles: 53 high bits of one output word, uniform on [0, 1);
* normals: Box-Muller on uniforms (pairs cached);
* gamma: Marsaglia-Tsang squeeze method (shape boost for shape < 1);
* beta: ratio of two gamma variates.

The exact draw order is part of every experiment's contract: each cluster
consumes its radial variate before its angular variate, clusters are drawn
in order, and species use independent streams (their own seeds).
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int):
    """One SplitMix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """Deterministic 64-bit generator with explicit, portable update rules."""

    def __init__(self, seed: int):
        if not isinstance(seed, int):
            raise TypeError("seed must be an integer")
        s = seed & _MASK64
        state = []
        for _ in range(4):
            s, word = _splitmix64(s)
            state.append(word)
        if not any(state):  # all-zero state is the one forbidden fixed point
            state[0] = 1
        self._s = state
        self._spare_normal = None

    def next_word(self) -> int:
        """Next raw 64-bit output."""
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double on [0, 1): the 53 high bits of one word."""
        return (self.next_word() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def normal(self) -> float:
        """Standard normal via Box-Muller; generates pairs, caches one."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        # 1 - random() lies in (0, 1], keeping the logarithm finite.
        r = math.sqrt(-2.0 * math.log(1.0 - self.random()))
        theta = 2.0 * math.pi * self.random()
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def gamma(self, shape: float) -> float:
        """Gamma(shape, 1) by the Marsaglia-Tsang method."""
        if shape <= 0.0:
            raise ValueError(f"gamma shape must be positive, got {shape}")
        if shape < 1.0:
            # boost: Gamma(shape) = Gamma(shape + 1) * U^(1/shape)
            u = 1.0 - self.random()
            return self.gamma(shape + 1.0) * u ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.random()
            if u < 1.0 - 0.0331 * x * x * x * x:
                return d * v
            if u > 0.0 and math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
                return d * v

    def beta(self, alpha: float, beta: float) -> float:
        """Beta(alpha, beta) as X/(X+Y) with independent gammas."""
        x = self.gamma(alpha)
        y = self.gamma(beta)
        return x / (x + y)
