import math

import numpy as np
import pytest

from lemnilab.ensembles import (
    ComplexPolynomial,
    EnsembleError,
    EnsembleSpec,
    RadialKernel,
    conditional_variance,
    evaluate,
    kernel_entries,
    rotate_coefficients,
    sample,
    variance_weights,
)
from lemnilab.rng import normal_pairs


def test_variance_weights_kac():
    w = variance_weights(EnsembleSpec("kac", 3))
    assert np.array_equal(w, [1, 1, 1, 1])


def test_variance_weights_kostlan():
    w = variance_weights(EnsembleSpec("kostlan", 2))
    assert np.array_equal(w, [1, 2, 1])


def test_variance_weights_recip_binom():
    w = variance_weights(EnsembleSpec("recip_binom", 2))
    assert np.allclose(w, [1, 0.5, 1], rtol=0, atol=0)


def test_variance_weights_weyl():
    w = variance_weights(EnsembleSpec("weyl", 4))
    assert np.allclose(w, [1, 1, 0.5, 1 / 6, 1 / 24], rtol=1e-15)


def test_variance_weights_large_degree_stable():
    # log-domain binomials agree with exact ones where both are available
    w = variance_weights(EnsembleSpec("kostlan", 80))
    exact = np.array([float(math.comb(80, k)) for k in range(81)])
    assert np.allclose(w, exact, rtol=1e-12)


def test_invalid_specs():
    with pytest.raises(EnsembleError):
        EnsembleSpec("kac", 0)
    with pytest.raises(EnsembleError):
        EnsembleSpec("nope", 3)
    with pytest.raises(EnsembleError):
        EnsembleSpec("custom", 2, custom_weights=(1.0, -1.0, 1.0))
    with pytest.raises(EnsembleError):
        EnsembleSpec("custom", 2, custom_weights=(1.0, 1.0))
    with pytest.raises(EnsembleError):
        EnsembleSpec("custom", 2)
    with pytest.raises(EnsembleError):
        EnsembleSpec("kac", 2, custom_weights=(1.0, 1.0, 1.0))


def test_spec_json_round_trip():
    for spec in (
        EnsembleSpec("kac", 7),
        EnsembleSpec("custom", 2, custom_weights=(0.5, 2.0, 3.0)),
    ):
        assert EnsembleSpec.from_json_dict(spec.to_json_dict()) == spec


def test_sample_deterministic():
    spec = EnsembleSpec("kac", 10)
    a = sample(spec, 42)
    b = sample(spec, 42)
    assert a.coefficients == b.coefficients
    c = sample(spec, 43)
    assert a.coefficients != c.coefficients


def test_sample_moments_kac():
    # the sampler is the documented map of the counter stream, so testing
    # 1e5 stream pairs is testing 1e5 samples of c_0
    g1, g2 = normal_pairs(2024, 100000)
    vals = (g1**2 + g2**2) / 2.0     # |c_0|^2 for unit weight
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - 1.0) <= 3 * se
    # spot check the sampler wiring against the raw stream
    p = sample(EnsembleSpec("kac", 1), 77)
    gg1, gg2 = normal_pairs(77, 2)
    assert p.coefficients[0] == pytest.approx(
        complex(gg1[0], gg2[0]) / math.sqrt(2), rel=1e-15
    )


def test_sample_moments_kostlan():
    # |c_1|^2 for kostlan n=2 has variance weight C(2,1) = 2
    spec = EnsembleSpec("kostlan", 2)
    n = 5000
    vals = np.array([abs(sample(spec, s).coefficients[1]) ** 2 for s in range(n)])
    m = vals.mean()
    se = vals.std(ddof=1) / math.sqrt(n)
    assert abs(m - 2.0) <= 3 * se


def test_evaluate_examples():
    p = ComplexPolynomial.from_coefficients([-4, 0, 1])  # z^2 - 4
    assert evaluate(p, 2.0) == pytest.approx(0.0, abs=1e-14)
    assert evaluate(p, 1.0, 1) == pytest.approx(2.0)
    cube = ComplexPolynomial.from_coefficients([0, 0, 0, 1])  # z^3
    assert evaluate(cube, 2.0, 3) == pytest.approx(6.0)
    assert evaluate(cube, 2.0, 4) == 0j
    assert evaluate(p, np.array([2.0, -2.0, 0.0])).tolist() == pytest.approx(
        [0.0, 0.0, -4.0]
    )


def test_horner_matches_power_sum():
    rng = np.random.default_rng(5)
    c = rng.standard_normal(51) + 1j * rng.standard_normal(51)
    p = ComplexPolynomial.from_coefficients(c)
    for z in (0.3 + 0.4j, -1.7 + 0.2j, 2.0 - 0.1j):
        direct = sum(ck * z**k for k, ck in enumerate(c))
        assert evaluate(p, z) == pytest.approx(direct, rel=1e-12)


def test_rotate_identity():
    spec = EnsembleSpec("kac", 6)
    p = sample(spec, 3)
    q = rotate_coefficients(p, 0.0)
    assert np.allclose(q.coeff_array(), p.coeff_array(), rtol=0, atol=0)


def test_rotate_half_turn():
    p = sample(EnsembleSpec("kac", 9), 11)
    q = rotate_coefficients(p, math.pi)
    assert abs(evaluate(q, 1.0)) == pytest.approx(abs(evaluate(p, -1.0)), abs=1e-13)


def test_rotate_modulus_identity():
    # |rotated(z)| = |p(e^{i theta} z)| across the disk of radius 2
    p = sample(EnsembleSpec("kac", 15), 99)
    theta = 0.7
    q = rotate_coefficients(p, theta)
    rng = np.random.default_rng(1)
    z = (rng.uniform(-2, 2, 100) + 1j * rng.uniform(-2, 2, 100))
    z = z[np.abs(z) <= 2.0]
    lhs = np.abs(evaluate(q, z))
    rhs = np.abs(evaluate(p, np.exp(1j * theta) * z))
    assert np.all(np.abs(lhs - rhs) <= 1e-10 * (1.0 + rhs))


def _brute_entries(w, z, k):
    """Direct power-sum oracle for the kernel entries."""
    n = len(w) - 1
    t = abs(z) ** 2
    a = sum(w[j] * t**j for j in range(n + 1))
    fall = lambda j: math.prod(range(j, j - k, -1))
    b = z.conjugate() ** k * sum(w[j] * fall(j) * t ** (j - k) for j in range(k, n + 1))
    c = sum(w[j] * fall(j) ** 2 * t ** (j - k) for j in range(k, n + 1))
    return a, b, c


def test_kernel_entries_kac_unit_circle():
    e = kernel_entries(EnsembleSpec("kac", 5), np.exp(0.3j), 1)
    assert e.a == pytest.approx(6.0, rel=1e-12)


def test_kernel_entries_kostlan_origin():
    e = kernel_entries(EnsembleSpec("kostlan", 4), 0j, 1)
    assert e.a == pytest.approx(1.0)
    assert e.b == 0j
    assert e.c == pytest.approx(4.0)


def test_kernel_entries_match_brute_force():
    spec = EnsembleSpec("kac", 30)
    w = variance_weights(spec)
    z = 0.5 + 0.0j
    e = kernel_entries(spec, z, 1)
    a, b, c = _brute_entries(w, z, 1)
    assert e.a == pytest.approx(a, rel=1e-12)
    assert e.b == pytest.approx(b, rel=1e-12)
    assert e.c == pytest.approx(c, rel=1e-12)
    assert e.determinant == pytest.approx(a * c - abs(b) ** 2, rel=1e-9)


@pytest.mark.parametrize("kind,n", [("kac", 12), ("weyl", 9), ("recip_binom", 14)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_kernel_entries_higher_orders(kind, n, k):
    spec = EnsembleSpec(kind, n)
    w = variance_weights(spec)
    for z in (0.4 + 0.7j, 1.3 - 0.2j, 0.05j):
        e = kernel_entries(spec, z, k)
        a, b, c = _brute_entries(w, complex(z), k)
        assert e.a == pytest.approx(a, rel=1e-10)
        assert e.b == pytest.approx(b, rel=1e-10)
        assert e.c == pytest.approx(c, rel=1e-10)
        assert e.determinant == pytest.approx(a * c - abs(b) ** 2, rel=1e-7)


def test_kernel_entries_rejects_bad_order():
    with pytest.raises(ValueError):
        kernel_entries(EnsembleSpec("kac", 4), 1.0, 5)
    with pytest.raises(ValueError):
        kernel_entries(EnsembleSpec("kac", 4), 1.0, 0)


def test_cauchy_schwarz_determinant():
    rng = np.random.default_rng(8)
    for kind in ("kac", "kostlan", "weyl", "recip_binom"):
        for n in (3, 17):
            spec = EnsembleSpec(kind, n)
            for _ in range(10):
                z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
                k = int(rng.integers(1, n + 1))
                e = kernel_entries(spec, z, k)
                if math.isinf(e.c) or math.isinf(e.a):
                    continue
                assert e.determinant >= -1e-9 * e.a * e.c
                assert e.a > 0 and e.c > 0


def test_conditional_variance_kac_origin():
    assert conditional_variance(EnsembleSpec("kac", 1), 0j, 1) == pytest.approx(1.0)


def test_conditional_variance_annulus_bound():
    # inside the annulus e^{-s/n} < |z| < e^{s/n} the conditional variance
    # at order k stays below e^{2s} n^{2k+1}
    n, s, k = 20, 1.0, 2
    z = math.exp(-s / n)
    v = conditional_variance(EnsembleSpec("kac", n), z, k)
    assert 0.0 < v <= math.exp(2 * s) * n ** (2 * k + 1)


def test_conditional_variance_matches_regression_residual():
    # Monte Carlo oracle: residual variance of p'(z) given p(z) = 0 for the
    # jointly Gaussian pair equals (a c - |b|^2) / a
    spec = EnsembleSpec("kac", 20)
    z = 0.9 + 0j
    n_samp = 100000
    rng = np.random.default_rng(17)
    coeff = (rng.standard_normal((n_samp, 21)) + 1j * rng.standard_normal((n_samp, 21))) / math.sqrt(2)
    powers = z ** np.arange(21)
    dpowers = np.arange(21) * z ** np.clip(np.arange(21) - 1, 0, None)
    u = coeff @ powers
    v = coeff @ dpowers
    beta = np.mean(v * u.conjugate()) / np.mean(np.abs(u) ** 2)
    resid = v - beta * u
    emp = np.mean(np.abs(resid) ** 2)
    assert conditional_variance(spec, z, 1) == pytest.approx(emp, rel=0.02)


def test_kostlan_closed_form_vs_series():
    # the generic log-domain series path must match the closed forms
    for n in (6, 25, 40):
        spec = EnsembleSpec("kostlan", n)
        w = variance_weights(spec)
        for z in (0.3 + 0.1j, 1.0 + 1.2j, 2.5 - 1.1j):
            e = kernel_entries(spec, z, 1)
            a, b, c = _brute_entries(w, complex(z), 1)
            assert e.a == pytest.approx(a, rel=1e-10)
            assert e.b == pytest.approx(b, rel=1e-10)
            assert e.c == pytest.approx(c, rel=1e-10)


def test_radial_kernel_ratios_match_entries():
    # the fast quadrature path and the log-domain entries agree on ratios
    for kind, n in (("kac", 35), ("kostlan", 21), ("weyl", 18), ("recip_binom", 16)):
        spec = EnsembleSpec(kind, n)
        kern = RadialKernel(spec)
        t = np.array([0.0, 0.2, 0.9, 1.0, 1.7, 6.3])
        inv_a, q1, s2 = kern.ratios(t)
        for i, ti in enumerate(t):
            z = complex(math.sqrt(ti), 0.0)
            e = kernel_entries(spec, z, 1)
            assert inv_a[i] == pytest.approx(1.0 / e.a, rel=1e-9)
            assert q1[i] == pytest.approx(e.determinant / e.a**3, rel=1e-8)
            if ti > 0:
                assert s2[i] * ti**0.5 == pytest.approx(abs(e.b) / e.a**2, rel=1e-9)


def test_radial_kernel_tail_bound_is_a_bound():
    # certified tail majorant must dominate a brute-force tail integral
    from scipy import integrate

    for kind, n in (("kac", 12), ("kostlan", 9)):
        spec = EnsembleSpec(kind, n)
        kern = RadialKernel(spec)
        for radius in (2.0, 3.0):
            p1, p2 = kern.tail_pieces(radius * radius)

            def f1(r):
                _, q1, _ = kern.ratios(np.array([r * r]))
                return math.sqrt(q1[0]) * r

            def f2(r):
                _, _, s2 = kern.ratios(np.array([r * r]))
                return r * s2[0] * r

            i1, _ = integrate.quad(f1, radius, 50.0, limit=200)
            i2, _ = integrate.quad(f2, radius, 50.0, limit=200)
            assert i1 <= p1 * 1.0000001
            assert i2 <= p2 * 1.0000001


def test_kernel_symmetry_real_axis():
    # a equals the plain weighted power sum and b is real on the real axis
    for kind in ("kac", "weyl", "recip_binom"):
        spec = EnsembleSpec(kind, 9)
        w = variance_weights(spec)
        for x in (0.3, 0.95, 1.4):
            e = kernel_entries(spec, complex(x), 1)
            assert e.a == pytest.approx(
                sum(w[j] * x ** (2 * j) for j in range(10)), rel=1e-12
            )
            assert e.b.imag == pytest.approx(0.0, abs=1e-12 * abs(e.b))
