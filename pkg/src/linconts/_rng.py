"""Portable xoshiro256** generator and the samplers built on it.

Every random draw in a simulation comes from one xoshiro256** stream so
that runs are reproducible across platforms and across the numba and
pure-Python code paths. The stream is seeded by expanding an integer seed
through SplitMix64.

Sampling recipes (shared by both code paths):

* uniform double: top 53 bits of the next output, scaled by 2**-53, so the
  value lies in [0, 1).
* standard normal: Marsaglia polar method; the second variate is discarded.
* Gamma(a, 1), a >= 1: Marsaglia-Tsang squeeze/rejection.
  a < 1 uses Gamma(a + 1) * U**(1/a).
* Beta(a, b): X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b), X drawn first.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
_TWO_NEG_53 = 2.0**-53


def splitmix64(x: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; returns ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def seed_state(seed: int) -> list[int]:
    """Expand an integer seed into a xoshiro256** state of four words."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    x = seed & MASK64
    out = []
    for _ in range(4):
        x, z = splitmix64(x)
        out.append(z)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def next_u64_py(s: list) -> int:
    s0, s1, s2, s3 = s
    result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return result


def next_double_py(s: list) -> float:
    return (next_u64_py(s) >> 11) * _TWO_NEG_53


def make_samplers(next_double, deco):
    """Build normal/gamma/beta samplers on top of ``next_double``.

    ``deco`` is either ``numba.njit(...)`` or the identity, so the same
    source serves both code paths.
    """

    @deco
    def standard_normal(s):
        while True:
            u = 2.0 * next_double(s) - 1.0
            v = 2.0 * next_double(s) - 1.0
            w = u * u + v * v
            if w > 0.0 and w < 1.0:
                return u * math.sqrt(-2.0 * math.log(w) / w)

    @deco
    def gamma_ge1(a, s):
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = standard_normal(s)
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = next_double(s)
            x2 = x * x
            if u < 1.0 - 0.0331 * x2 * x2:
                return d * v
            if u > 0.0 and math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
                return d * v

    @deco
    def standard_gamma(a, s):
        if a >= 1.0:
            return gamma_ge1(a, s)
        g = gamma_ge1(a + 1.0, s)
        u = next_double(s)
        return g * u ** (1.0 / a)

    @deco
    def beta(a, b, s):
        x = standard_gamma(a, s)
        y = standard_gamma(b, s)
        return x / (x + y)

    return standard_normal, standard_gamma, beta


_py_normal, _py_gamma, _py_beta = make_samplers(next_double_py, lambda f: f)


try:
    import numba

    _U1 = np.uint64(1)

    @numba.njit(nogil=True, cache=True)
    def _rotl_nb(x, k):
        return (x << np.uint64(k)) | (x >> np.uint64(64 - k))

    @numba.njit(nogil=True, cache=True)
    def next_u64_nb(s):
        s0 = s[0]
        s1 = s[1]
        s2 = s[2]
        s3 = s[3]
        result = _rotl_nb(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl_nb(s3, 45)
        s[0] = s0
        s[1] = s1
        s[2] = s2
        s[3] = s3
        return result

    @numba.njit(nogil=True, cache=True)
    def next_double_nb(s):
        return np.float64(next_u64_nb(s) >> np.uint64(11)) * _TWO_NEG_53

except ImportError:  # pragma: no cover - exercised only without numba
    next_u64_nb = None
    next_double_nb = None


class Xoshiro256:
    """Seeded random source shared by the environment and the policies.

    >>> rng = Xoshiro256(7)
    >>> 0.0 <= rng.random() < 1.0
    True
    """

    def __init__(self, seed: int = 0):
        self._s = seed_state(int(seed))

    @classmethod
    def from_state(cls, state) -> Xoshiro256:
        obj = cls.__new__(cls)
        obj._s = [int(w) & MASK64 for w in state]
        if len(obj._s) != 4 or not any(obj._s):
            raise ValueError("xoshiro256** state must be four words, not all zero")
        return obj

    @property
    def state(self) -> tuple[int, int, int, int]:
        return tuple(self._s)

    def state_array(self) -> np.ndarray:
        return np.array(self._s, dtype=np.uint64)

    def set_state_array(self, arr: np.ndarray) -> None:
        self._s = [int(w) for w in arr]

    def next_u64(self) -> int:
        return next_u64_py(self._s)

    def random(self) -> float:
        return next_double_py(self._s)

    def normal(self) -> float:
        return _py_normal(self._s)

    def gamma(self, shape: float) -> float:
        if not shape > 0.0:
            raise ValueError(f"gamma shape must be positive, got {shape}")
        return _py_gamma(float(shape), self._s)

    def beta(self, a: float, b: float) -> float:
        if not (a > 0.0 and b > 0.0):
            raise ValueError(f"beta parameters must be positive, got ({a}, {b})")
        return _py_beta(float(a), float(b), self._s)
