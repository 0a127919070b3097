"""Independent reference computations for constants frozen into the C++ tests."""
import math
import re
import random

M = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & M
    return h


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & M
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return state, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


class Xoshiro:
    def __init__(self, seed):
        st = seed
        self.s = []
        for _ in range(4):
            st, v = splitmix64(st)
            self.s.append(v)

    def next(self):
        s = self.s
        result = (rotl((s[1] * 5) & M, 7) * 9) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result

    def uniform(self):
        return (self.next() >> 11) * 2.0**-53


def embed(text, dim):
    vec = [0.0] * dim
    for tok in re.findall(r"[A-Za-z0-9]+", text):
        h = fnv1a64(tok.lower().encode())
        vec[h % dim] += -1.0 if h >> 63 else 1.0
    n = math.sqrt(sum(v * v for v in vec))
    return [v / n for v in vec] if n > 0 else vec


if __name__ == "__main__":
    print("fnv1a64('hello') = 0x%016x" % fnv1a64(b"hello"))
    print("fnv1a64('') = 0x%016x" % fnv1a64(b""))
    h = fnv1a64(b"hello")
    print("hello bucket64 =", h % 64, "sign =", -1 if h >> 63 else 1)
    r = Xoshiro(0)
    print("xoshiro(0) first 3:", ["0x%016x" % r.next() for _ in range(3)])
    r = Xoshiro(42)
    print("xoshiro(42) first 3:", ["0x%016x" % r.next() for _ in range(3)])
    r = Xoshiro(123)
    u1, u2 = r.uniform(), r.uniform()
    rad = math.sqrt(-2.0 * math.log(1.0 - u1))
    print("box-muller(123): %.17g %.17g" % (rad * math.cos(2 * math.pi * u2), rad * math.sin(2 * math.pi * u2)))
    print("4*(-0.5 log 2pi) = %.17g" % (4 * -0.5 * math.log(2 * math.pi)))
    print("entropy0 = %.17g" % (4 * (0.5 + 0.5 * math.log(2 * math.pi))))
    rng = random.Random(2024)
    acc = 0.0
    n = 10**6
    for _ in range(n):
        a = [rng.random() for _ in range(4)]
        m = sum(a) / 4
        std = math.sqrt(sum((x - m) ** 2 for x in a) / 4)
        msd = sum((x - 0.5) ** 2 for x in a) / 4
        acc += 0.1 * std - 0.1 * msd
    for text in ("pipeline demo today", "Hello, hello WORLD! 42"):
        print("embed8(%r):" % text, ["%.17g" % v for v in embed(text, 8)])
    print("uniform baseline shaping ~ %.6f" % (acc / n))
