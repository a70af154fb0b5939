#!/usr/bin/env python3
"""Reference implementation of the seeded sampling scheme.

MT19937-64 (Matsumoto & Nishimura reference constants), rejection-sampled
bounded draws, Fisher-Yates from the top, sample = first `size` of the
shuffled sorted ids. Writes random_baseline_seed7_820of1000.txt.
"""

MASK = (1 << 64) - 1


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.index = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.index = 0

    def next(self):
        if self.index >= 312:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK


def uniform_index(rng, bound):
    rem = (1 << 64) % bound
    x = rng.next()
    while rem and x > MASK - rem:
        x = rng.next()
    return x % bound


def sample_ids(ids, size, seed):
    ids = sorted(ids)
    rng = MT19937_64(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = uniform_index(rng, i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    return sorted(ids[:size])


if __name__ == "__main__":
    # The C++ standard fixes the 10000th output of mt19937_64 seeded 5489.
    check = MT19937_64(5489)
    for _ in range(9999):
        check.next()
    assert check.next() == 9981545732273789042
    universe = ["id%04d" % i for i in range(1000)]
    with open("random_baseline_seed7_820of1000.txt", "w") as f:
        for i in sample_ids(universe, 820, 7):
            f.write(i + "\n")
