"""Seeded PRNG for reproducible sampling.

xoshiro256** seeded through splitmix64.  The algorithm identifier
(ALGORITHM) is emitted next to every sampled artifact so runs can be
reproduced; streams are deterministic for a fixed 64-bit seed.
"""

MASK64 = (1 << 64) - 1

ALGORITHM = "xoshiro256** (splitmix64 seeding)"


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    def __init__(self, seed: int):
        self.seed = seed & MASK64
        # splitmix64 expansion of the seed into the four state words
        s = self.seed
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & MASK64
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
            state.append(z ^ (z >> 31))
        self._s = state

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection (exact, no modulo bias)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]
