"""Counter-based deterministic random numbers.

The whole project draws randomness through the two functions below so that
every result is a pure function of explicit 64-bit seeds, bit-identical
across platforms and worker counts.

``splitmix64`` is the finalizer of Steele, Lea and Vigna's SplitMix
generator: an invertible avalanche permutation of Z/2^64.  Used in counter
mode (``mix(seed + (i+1)*GAMMA)``) it yields an indexable stream, which is
what makes sharded Monte Carlo reproducible: stream position never depends
on which worker consumed how much.

Normal variates come from the Box-Muller transform applied to consecutive
counter outputs; consumption order is fixed (see ``normal_pairs``).
"""

from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)   # 2^64 / golden ratio
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = float(1 << 53)


def splitmix64(x):
    """SplitMix64 finalizer. Accepts ints or uint64 arrays, returns uint64."""
    z = np.asarray(x).astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def counter_stream(seed: int, start: int, count: int) -> np.ndarray:
    """uint64 outputs at counter positions start..start+count-1 for a seed."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GAMMA
    return splitmix64(x)


def uniform01(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles in the open interval (0, 1)."""
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO53


def normal_pairs(seed: int, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    """n_pairs of independent standard normals (g1[i], g2[i]).

    Pair i consumes counter positions 2i (radius word) and 2i+1 (angle
    word) of the seed's stream: Box-Muller with
    g1 = sqrt(-2 ln u1) cos(2 pi u2), g2 = sqrt(-2 ln u1) sin(2 pi u2).
    Callers use g1 as the real part and g2 as the imaginary part, pair
    index ascending, which pins the consumption order.
    """
    words = counter_stream(seed, 0, 2 * n_pairs)
    u1 = uniform01(words[0::2])
    u2 = uniform01(words[1::2])
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    return rad * np.cos(ang), rad * np.sin(ang)


def mix3(a: int, b: int, c: int) -> int:
    """Avalanche mix of three 64-bit values into one (order-sensitive)."""
    x = splitmix64(np.uint64(a & 0xFFFFFFFFFFFFFFFF))
    with np.errstate(over="ignore"):
        x = splitmix64(x ^ (np.uint64(b & 0xFFFFFFFFFFFFFFFF) * _M1 + _GAMMA))
        x = splitmix64(x ^ (np.uint64(c & 0xFFFFFFFFFFFFFFFF) * _M2 + _GAMMA))
    return int(x)
