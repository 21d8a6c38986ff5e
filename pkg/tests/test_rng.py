import numpy as np

from lemnilab.rng import counter_stream, mix3, normal_pairs, splitmix64, uniform01


def test_counter_stream_deterministic():
    a = counter_stream(12345, 0, 64)
    b = counter_stream(12345, 0, 64)
    assert np.array_equal(a, b)


def test_counter_stream_indexable():
    whole = counter_stream(99, 0, 100)
    tail = counter_stream(99, 60, 40)
    assert np.array_equal(whole[60:], tail)


def test_uniform01_open_interval():
    u = uniform01(counter_stream(7, 0, 100000))
    assert u.min() > 0.0
    assert u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01


def test_normal_pairs_moments():
    g1, g2 = normal_pairs(3, 200000)
    for g in (g1, g2):
        assert abs(g.mean()) < 0.01
        assert abs(g.std() - 1.0) < 0.01
    assert abs(np.mean(g1 * g2)) < 0.01


def test_splitmix_avalanche():
    x = np.arange(1, 100001, dtype=np.uint64)
    base = splitmix64(x)
    flipped = splitmix64(x ^ np.uint64(1))
    bits = np.unpackbits((base ^ flipped).view(np.uint8)).sum() / x.size
    assert bits > 30.0


def test_mix3_scalar_and_distinct():
    assert mix3(1, 2, 3) == mix3(1, 2, 3)
    assert mix3(1, 2, 3) != mix3(1, 2, 4)
    assert mix3(1, 2, 3) != mix3(1, 3, 2)
    assert 0 <= mix3(2**63 + 17, 200, 10**6) < 2**64
