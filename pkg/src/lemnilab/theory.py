"""Closed-form expectations for random lemniscate length.

The central object is the expected-length formula for an arbitrary
centered-Gaussian coefficient polynomial:

    E|Lambda| = sqrt(pi) * integral_C F(z) dA(z),

    F(z) = e^{-1/a} [ sqrt(q1) exp(-q2^2/q1)
                      + sqrt(pi) |q2| erf(|q2| / sqrt(q1)) ],

with q1 = det/a^3 and q2 = Re(b)/a^2 built from the order-1 covariance
entries of the ensemble kernel (see ensembles).  On the degenerate set
q1 = 0 the bracket's limiting value sqrt(pi) |q2| is used.

This module evaluates that integral adaptively for any ensemble and
degree, plus the three large-n limit constants:

  kac_limit_constant      unit-disk integral of the n -> infinity Kac
                          integrand; the value is 8.80278418021073.
  kostlan_limit_constant  limit of sqrt(n) E|Lambda_n| for the binomial
                          ensemble, an exponential-kernel integral.
  weyl_limit_constant     limit of E|Lambda_n| for the 1/k! ensemble.

The Kostlan and Weyl limit integrands are two parametrizations of the same
integral (substitute t = r^2), so the two constants coincide at
9.173161064538416: a deliberate cross-check, not a coincidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .ensembles import EnsembleSpec, RadialKernel
from .quadrature import integrate_rectangles

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerance and effort limits for the adaptive integrals."""

    abs_tolerance: float = 1e-6
    max_depth: int = 12
    radial_cutoff: float | None = None   # None: choose by certified tail bound

    def __post_init__(self):
        if not (self.abs_tolerance > 0.0):
            raise ValueError("abs_tolerance must be positive")
        if self.max_depth < 4:
            raise ValueError("max_depth must be >= 4")
        if self.radial_cutoff is not None and not (self.radial_cutoff > 0.0):
            raise ValueError("radial_cutoff must be positive")


@dataclass(frozen=True)
class LengthEstimate:
    """An evaluated expectation with its quadrature/tail error budget."""

    value: float
    error_bound: float
    cells_used: int


def erf(x):
    """Error function, vectorized; odd symmetry is exact."""
    return scipy.special.erf(x)


def abs_real_moment(mu: complex, sigma: float) -> float:
    """E|Re zeta| for zeta ~ N_C(mu, sigma^2).

    Equals (sigma/sqrt(pi)) exp(-m^2/sigma^2) + |m| erf(|m|/sigma) with
    m = Re mu; the imaginary part of mu is irrelevant.
    """
    if not (sigma > 0.0):
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    m = abs(complex(mu).real)
    return (sigma / SQRT_PI) * math.exp(-((m / sigma) ** 2)) + m * float(
        scipy.special.erf(m / sigma)
    )


def _bracket(inv_a, q1, q2):
    """The length-integrand bracket including the e^{-1/a} prefactor."""
    inv_a = np.asarray(inv_a, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    out = SQRT_PI * np.abs(q2)  # q1 -> 0 limit (erf saturates, sqrt term dies)
    pos = q1 > 0.0
    if np.any(pos):
        q1p = q1[pos]
        q2p = q2[pos]
        with np.errstate(over="ignore", under="ignore"):
            ratio = np.minimum(q2p * q2p / q1p, 745.0)
            rooted = np.sqrt(q1p)
            out[pos] = rooted * np.exp(-ratio) + SQRT_PI * np.abs(q2p) * scipy.special.erf(
                np.abs(q2p) / rooted
            )
    return np.exp(-inv_a) * out


def length_integrand(spec: EnsembleSpec, z) -> np.ndarray | float:
    """F(z) for a scalar or array of complex points."""
    scalar = np.isscalar(z) or np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    kern = RadialKernel(spec)
    t = (zz.real ** 2 + zz.imag ** 2).astype(np.float64)
    inv_a, q1, s2 = kern.ratios(t)
    vals = _bracket(inv_a, q1, zz.real * s2)
    return float(vals[0]) if scalar else vals.reshape(np.shape(z))


def _tail_bound(kern: RadialKernel, radius: float) -> float:
    """Certified bound on the integral of sqrt(pi) F over |z| > radius."""
    p1, p2 = kern.tail_pieces(radius * radius)
    return SQRT_PI * (2.0 * math.pi * p1 + 4.0 * SQRT_PI * p2)


def _choose_radius(kern: RadialKernel, tol: float) -> tuple[float, float]:
    """Smallest doubling radius whose certified tail stays below tol/2."""
    r = 1.5
    for _ in range(64):
        tail = _tail_bound(kern, r)
        if tail <= 0.5 * tol:
            return r, tail
        r *= 2.0
    return r, _tail_bound(kern, r)


def _radial_edges(radius: float) -> list[float]:
    """Initial panel edges: fine near the unit circle, geometric beyond."""
    edges = [0.0, 0.5, 0.85, 1.0, 1.15, 1.5]
    edges = [e for e in edges if e < radius]
    r = 2.0
    while r < radius:
        edges.append(r)
        r *= 2.0
    edges.append(radius)
    return edges


def expected_length(spec: EnsembleSpec, cfg: QuadratureConfig | None = None) -> LengthEstimate:
    """E|Lambda_n| for the ensemble by adaptive polar quadrature.

    The plane integral is truncated at a radius where a certified majorant
    of the integrand places the tail below half the tolerance; the reported
    error bound is quadrature estimate plus tail bound.
    """
    cfg = cfg or QuadratureConfig()
    kern = RadialKernel(spec)
    if cfg.radial_cutoff is not None:
        radius = cfg.radial_cutoff
        tail = _tail_bound(kern, radius)
    else:
        radius, tail = _choose_radius(kern, cfg.abs_tolerance)

    def f(r, th):
        t = r * r
        inv_a, q1, s2 = kern.ratios(t)
        return _bracket(inv_a, q1, r * np.cos(th) * s2) * r

    res = integrate_rectangles(
        f,
        _radial_edges(radius),
        np.linspace(0.0, 2.0 * math.pi, 9),
        abs_tolerance=0.5 * cfg.abs_tolerance / SQRT_PI,
        max_depth=cfg.max_depth,
    )
    return LengthEstimate(
        value=SQRT_PI * res.value,
        error_bound=SQRT_PI * res.error_bound + tail,
        cells_used=res.cells_used,
    )


def kac_limit_constant(cfg: QuadratureConfig | None = None) -> float:
    """Large-n limit of E|Lambda_n| for the Kac ensemble.

    The limiting integrand lives on the unit disk with an integrable
    (1-|z|^2)^(-1/2) edge singularity; substituting v = sqrt(1-r^2)
    (i.e. u = 1 - r^2 followed by u = v^2) absorbs it exactly:

      C = sqrt(pi) * int_0^{2pi} int_0^1 e^{-v^2}
            [ e^{-x^2 v^2} + sqrt(pi) x v erf(x v) ] dv dtheta,
      x = cos(theta) sqrt(1 - v^2).
    """
    cfg = cfg or QuadratureConfig()

    def f(v, th):
        x = np.cos(th) * np.sqrt(np.maximum(1.0 - v * v, 0.0))
        xv = x * v
        return np.exp(-v * v) * (
            np.exp(-xv * xv) + SQRT_PI * xv * scipy.special.erf(xv)
        )

    res = integrate_rectangles(
        f,
        np.linspace(0.0, 1.0, 5),
        np.linspace(0.0, 2.0 * math.pi, 9),
        abs_tolerance=cfg.abs_tolerance / SQRT_PI,
        max_depth=cfg.max_depth,
    )
    return SQRT_PI * res.value


def kostlan_limit_constant(cfg: QuadratureConfig | None = None) -> float:
    """Limit of sqrt(n) E|Lambda_n| for the binomial-variance ensemble.

    Obtained from the finite-n integral by r = sqrt(t/n) and n -> infinity
    (the area element contributes dt/2):

      I = (sqrt(pi)/2) * int_0^{2pi} int_0^inf e^{-e^{-t}}
            [ e^{-t/2} e^{-t cos^2(theta) e^{-t}}
              + sqrt(pi) sqrt(t) cos(theta) e^{-t}
                erf(sqrt(t) cos(theta) e^{-t/2}) ] dt dtheta.
    """
    cfg = cfg or QuadratureConfig()
    t_cut = 80.0  # tail below ~1e-15: bracket <= (1 + 2t) e^{-t/2}

    def f(t, th):
        ct = np.cos(th)
        et = np.exp(-t)
        st = np.sqrt(t)
        return np.exp(-et) * (
            np.exp(-0.5 * t) * np.exp(-t * ct * ct * et)
            + SQRT_PI * st * ct * et * scipy.special.erf(st * ct * np.exp(-0.5 * t))
        )

    res = integrate_rectangles(
        f,
        [0.0, 2.0, 5.0, 10.0, 20.0, 40.0, t_cut],
        np.linspace(0.0, 2.0 * math.pi, 9),
        abs_tolerance=2.0 * cfg.abs_tolerance / SQRT_PI,
        max_depth=cfg.max_depth,
    )
    tail = 0.5 * SQRT_PI * 2.0 * math.pi * (4.0 * t_cut + 10.0) * math.exp(-0.5 * t_cut)
    assert tail < cfg.abs_tolerance
    return 0.5 * SQRT_PI * res.value


def weyl_limit_constant(cfg: QuadratureConfig | None = None) -> float:
    """Limit of E|Lambda_n| for the 1/k! ensemble (exponential kernel).

      L = sqrt(pi) * int_C e^{-e^{-t}} e^{-t}
            [ e^{t/2} e^{-x^2 e^{-t}} + sqrt(pi) x erf(x e^{-t/2}) ] dA(z),
      t = |z|^2, x = Re z.
    """
    cfg = cfg or QuadratureConfig()
    r_cut = 9.0  # tail of int (e^{-r^2/2} + sqrt(pi) r e^{-r^2}) r dr: ~1e-18

    def f(r, th):
        t = r * r
        x = r * np.cos(th)
        et = np.exp(-t)
        return (
            np.exp(-et)
            * et
            * (np.exp(0.5 * t) * np.exp(-x * x * et)
               + SQRT_PI * x * scipy.special.erf(x * np.exp(-0.5 * t)))
            * r
        )

    res = integrate_rectangles(
        f,
        [0.0, 1.0, 2.0, 3.0, 5.0, r_cut],
        np.linspace(0.0, 2.0 * math.pi, 9),
        abs_tolerance=cfg.abs_tolerance / SQRT_PI,
        max_depth=cfg.max_depth,
    )
    tail = SQRT_PI * 2.0 * math.pi * (
        math.exp(-0.5 * r_cut * r_cut)
        + SQRT_PI * math.exp(-r_cut * r_cut) * (0.5 * r_cut + 0.25 / r_cut)
    )
    assert tail < cfg.abs_tolerance
    return SQRT_PI * res.value


def annulus_zero_count_reference(n: int, s: float) -> float:
    """Reference expected zero count of a Kac polynomial in the annulus
    e^{-s/n} < |z| < e^{s/n}: n (coth(s) - 1/s).

    This is the positive reading of the asymptotic (it tends to n as
    s grows and to 0 like n s/3 as s -> 0).
    """
    if not (s > 0.0):
        raise ValueError(f"s must be positive, got {s!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    return n * (1.0 / math.tanh(s) - 1.0 / s)
