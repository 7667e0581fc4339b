"""Seeded 64-bit random streams.

Every random draw in the package comes from xoshiro256** seeded through
splitmix64, so a (master seed, purpose, index) triple names one stream on
any platform and under any worker schedule. The same generator is
re-implemented in the numba kernels of :mod:`udmis.mcmc`; both must stay
bit-identical.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def mix64(z):
    """splitmix64 output finalizer."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def splitmix64(state):
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + GOLDEN_GAMMA) & MASK64
    return state, mix64(state)


def tag_hash(tag):
    """FNV-1a 64 of a UTF-8 string; turns purpose tags into integers."""
    h = _FNV_OFFSET
    for b in tag.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def derive_seed(master, *parts):
    """Derive a sub-seed from a master seed and a path of tags/indices.

    Strings are hashed with FNV-1a, integers are taken modulo 2**64.
    ``derive_seed(s, "placement", 3)`` is stable across runs and
    implementations.
    """
    h = master & MASK64
    for part in parts:
        if isinstance(part, str):
            v = tag_hash(part)
        else:
            v = int(part) & MASK64
        h = mix64(((h ^ v) + GOLDEN_GAMMA) & MASK64)
    return h


def xoshiro_state(seed):
    """Four-word xoshiro256** state expanded from a 64-bit seed."""
    s = seed & MASK64
    words = []
    for _ in range(4):
        s, out = splitmix64(s)
        words.append(out)
    return words


class Xoshiro256:
    """xoshiro256** generator with the handful of draws the package needs."""

    def __init__(self, seed):
        self.s = xoshiro_state(seed)

    def next_u64(self):
        s = self.s
        result = (_rotl(s[1] * 5 & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self):
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n):
        """Uniform integer in [0, n), unbiased (bitmask rejection)."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        shift = 64 - bits
        while True:
            r = self.next_u64() >> shift
            if r < n:
                return r

    def sample(self, population_size, k):
        """k distinct integers from range(population_size), in draw order.

        Partial Fisher-Yates over a lazily materialized index table.
        """
        if not 0 <= k <= population_size:
            raise ValueError("sample size out of range")
        swapped = {}
        out = []
        for i in range(k):
            j = i + self.randbelow(population_size - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            swapped[j] = vi
            out.append(vj)
        return out

    def shuffle(self, items):
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
