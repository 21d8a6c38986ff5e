"""Property-based checks of the core invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lemnilab.ensembles import (
    EnsembleSpec,
    evaluate,
    kernel_entries,
    rotate_coefficients,
    sample,
    variance_weights,
)
from lemnilab.montecarlo import wilson_interval
from lemnilab.theory import abs_real_moment, annulus_zero_count_reference, erf

kinds = st.sampled_from(["kac", "kostlan", "weyl", "recip_binom"])
seeds = st.integers(min_value=0, max_value=2**63 - 1)
small_degrees = st.integers(min_value=1, max_value=24)


@settings(max_examples=40, deadline=None)
@given(kinds, small_degrees, seeds)
def test_sampling_is_pure(kind, n, seed):
    spec = EnsembleSpec(kind, n)
    assert sample(spec, seed).coefficients == sample(spec, seed).coefficients


@settings(max_examples=40, deadline=None)
@given(kinds, small_degrees)
def test_weights_positive_finite(kind, n):
    w = variance_weights(EnsembleSpec(kind, n))
    assert w.shape == (n + 1,)
    assert np.all(w > 0) and np.all(np.isfinite(w))


@settings(max_examples=30, deadline=None)
@given(
    kinds,
    st.integers(min_value=2, max_value=18),
    st.integers(min_value=1, max_value=4),
    st.complex_numbers(max_magnitude=2.5, allow_nan=False, allow_infinity=False),
)
def test_kernel_cauchy_schwarz(kind, n, k, z):
    if k > n:
        k = n
    e = kernel_entries(EnsembleSpec(kind, n), z, k)
    assert e.a > 0 and e.c > 0
    assert e.determinant >= -1e-9 * e.a * e.c


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(min_value=-math.pi, max_value=math.pi))
def test_rotation_preserves_modulus(seed, theta):
    p = sample(EnsembleSpec("kac", 11), seed)
    q = rotate_coefficients(p, theta)
    for z in (0.5 + 0.1j, -0.9 + 0.7j, 1.4j):
        lhs = abs(evaluate(q, z))
        rhs = abs(evaluate(p, np.exp(1j * theta) * z))
        assert abs(lhs - rhs) <= 1e-10 * (1.0 + rhs)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=-20, max_value=20),
    st.floats(min_value=-20, max_value=20),
    st.floats(min_value=1e-3, max_value=50),
)
def test_abs_real_moment_dominates_summands(mu1, mu2, sigma):
    v = abs_real_moment(complex(mu1, mu2), sigma)
    m = abs(mu1)
    assert v >= (sigma / math.sqrt(math.pi)) * math.exp(-((m / sigma) ** 2)) - 1e-12
    assert v >= m * float(erf(m / sigma)) - 1e-12
    assert v == abs_real_moment(complex(mu1, 0.0), sigma)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=500), st.integers(min_value=1, max_value=500))
def test_wilson_interval_brackets(successes, total):
    if successes > total:
        successes, total = total, successes
    lo, hi = wilson_interval(successes, total)
    phat = successes / total
    assert 0.0 <= lo <= phat + 1e-12
    assert phat - 1e-12 <= hi <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=400), st.floats(min_value=1e-3, max_value=60))
def test_annulus_reference_range(n, s):
    v = annulus_zero_count_reference(n, s)
    assert 0.0 < v < n
