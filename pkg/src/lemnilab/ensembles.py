"""Gaussian polynomial ensembles and their covariance kernels.

A random polynomial here is p(z) = sum_k c_k z^k with independent complex
Gaussian coefficients c_k ~ N_C(0, w_k); the variance profile w_k is what
distinguishes the ensembles:

    kac          w_k = 1
    kostlan      w_k = C(n, k)
    weyl         w_k = 1 / k!
    recip_binom  w_k = 1 / C(n, k)
    custom       caller-supplied positive weights

N_C(0, s2) has density exp(-|z|^2/s2) / (pi s2), i.e. real and imaginary
parts are independent N(0, s2/2).

The covariance kernel K(z, w) = E p(z) conj(p(w)) = sum_k w_k (z conj(w))^k
drives every closed-form expectation downstream.  For a derivative order
k >= 1 the Gaussian vector (p(z), p^(k)(z)) has covariance matrix entries

    a   = K(z,z)              = sum_j w_j t^j,                 t = |z|^2
    b_k = d_z^k K(z,z)        = conj(z)^k sum_j f(j,k) w_j t^(j-k)
    c_k = d_z^k d_zbar^k K    = sum_j f(j,k)^2 w_j t^(j-k)

with f(j,k) = j (j-1) ... (j-k+1) the falling factorial.  The determinant
a c_k - |b_k|^2 is evaluated through an expansion whose coefficients are
sums of squares (see _det_log_coeffs), so it never suffers the catastrophic
cancellation of forming a c_k and |b_k|^2 separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .rng import normal_pairs

KINDS = ("kac", "kostlan", "weyl", "recip_binom", "custom")

# binomials are exact in double precision below this degree; above it the
# lgamma route avoids integer blowup
_EXACT_BINOM_MAX_DEGREE = 60


class EnsembleError(ValueError):
    """Invalid ensemble specification."""


@dataclass(frozen=True)
class EnsembleSpec:
    """Which Gaussian coefficient model, and the polynomial degree."""

    kind: str
    degree: int
    custom_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise EnsembleError(f"unknown ensemble kind {self.kind!r}")
        if not isinstance(self.degree, int) or self.degree < 1:
            raise EnsembleError(f"degree must be an integer >= 1, got {self.degree!r}")
        if self.kind == "custom":
            if self.custom_weights is None:
                raise EnsembleError("custom ensemble requires custom_weights")
            w = tuple(float(x) for x in self.custom_weights)
            if len(w) != self.degree + 1:
                raise EnsembleError(
                    f"custom_weights must have degree+1 = {self.degree + 1} entries, got {len(w)}"
                )
            if not all(math.isfinite(x) and x > 0.0 for x in w):
                raise EnsembleError("custom_weights must be strictly positive and finite")
            object.__setattr__(self, "custom_weights", w)
        elif self.custom_weights is not None:
            raise EnsembleError(f"custom_weights only valid for kind='custom', not {self.kind!r}")

    def to_json_dict(self) -> dict:
        d = {"kind": self.kind, "degree": self.degree}
        if self.kind == "custom":
            d["weights"] = list(self.custom_weights)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "EnsembleSpec":
        weights = d.get("weights")
        return cls(
            kind=d["kind"],
            degree=int(d["degree"]),
            custom_weights=tuple(weights) if weights is not None else None,
        )


@dataclass(frozen=True)
class ComplexPolynomial:
    """A sampled polynomial: coefficients c_0..c_n, ascending powers."""

    coefficients: tuple[complex, ...]
    degree: int

    def __post_init__(self):
        if len(self.coefficients) != self.degree + 1:
            raise ValueError(
                f"coefficient count {len(self.coefficients)} != degree+1 = {self.degree + 1}"
            )

    @classmethod
    def from_coefficients(cls, coeffs) -> "ComplexPolynomial":
        c = tuple(complex(x) for x in coeffs)
        return cls(coefficients=c, degree=len(c) - 1)

    def coeff_array(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=np.complex128)


@dataclass(frozen=True)
class KernelEntries:
    """Covariance data of (p(z), p^(k)(z)) at a point z."""

    a: float
    b: complex
    c: float
    order: int
    determinant: float


def _log_weights(spec: EnsembleSpec) -> np.ndarray:
    """log of the variance weights; the stable primitive for everything."""
    n = spec.degree
    k = np.arange(n + 1, dtype=np.float64)
    if spec.kind == "kac":
        return np.zeros(n + 1)
    if spec.kind == "weyl":
        return -np.array([math.lgamma(j + 1.0) for j in range(n + 1)])
    if spec.kind in ("kostlan", "recip_binom"):
        lg = np.array(
            [
                math.lgamma(n + 1.0) - math.lgamma(j + 1.0) - math.lgamma(n - j + 1.0)
                for j in range(n + 1)
            ]
        )
        return lg if spec.kind == "kostlan" else -lg
    return np.log(np.asarray(spec.custom_weights, dtype=np.float64))


def variance_weights(spec: EnsembleSpec) -> np.ndarray:
    """The variance profile [w_0, ..., w_n] of the ensemble."""
    n = spec.degree
    if spec.kind in ("kostlan", "recip_binom") and n <= _EXACT_BINOM_MAX_DEGREE:
        binom = np.array([float(math.comb(n, j)) for j in range(n + 1)])
        w = binom if spec.kind == "kostlan" else 1.0 / binom
    else:
        w = np.exp(_log_weights(spec))
    if not np.all(np.isfinite(w)):
        raise EnsembleError(f"variance weights overflow for {spec.kind} degree {n}")
    return w


def sample(spec: EnsembleSpec, seed: int) -> ComplexPolynomial:
    """Draw one polynomial; a pure function of (spec, seed).

    Coefficient k gets sqrt(w_k/2) * (g1 + i g2) where (g1, g2) are the
    Box-Muller pair at stream position k of the seed's counter stream.
    """
    n = spec.degree
    g_re, g_im = normal_pairs(seed, n + 1)
    sigma = np.sqrt(variance_weights(spec) / 2.0)
    return ComplexPolynomial.from_coefficients(sigma * (g_re + 1j * g_im))


def evaluate(p: ComplexPolynomial, z, derivative_order: int = 0):
    """p^(k)(z) by Horner evaluation; z may be a scalar or an ndarray."""
    if derivative_order < 0:
        raise ValueError("derivative_order must be >= 0")
    c = p.coeff_array()
    k = derivative_order
    if k > p.degree:
        if np.isscalar(z) or np.ndim(z) == 0:
            return 0j
        return np.zeros(np.shape(z), dtype=np.complex128)
    if k:
        j = np.arange(k, p.degree + 1, dtype=np.float64)
        fall = np.exp(
            np.array([math.lgamma(jj + 1.0) - math.lgamma(jj - k + 1.0) for jj in j])
        )
        c = c[k:] * fall
    return horner(c, z)


try:  # compiled kernel; pure-numpy fallback below keeps numba optional
    import numba as _numba

    @_numba.njit("complex128[:](complex128[:], complex128[:])", cache=True)
    def _horner_jit(c, z):  # pragma: no cover - thin compiled loop
        out = np.empty(z.size, np.complex128)
        for i in range(z.size):
            acc = c[c.size - 1]
            for j in range(c.size - 2, -1, -1):
                acc = acc * z[i] + c[j]
            out[i] = acc
        return out
except ImportError:  # pragma: no cover
    _horner_jit = None


def horner(coeffs_ascending: np.ndarray, z):
    """Evaluate sum coeffs[j] z^j for scalar or array z."""
    scalar = np.isscalar(z) or np.ndim(z) == 0
    zz = np.asarray(z, dtype=np.complex128)
    if _horner_jit is not None:
        c = np.ascontiguousarray(coeffs_ascending, dtype=np.complex128)
        out = _horner_jit(c, np.ascontiguousarray(zz.ravel())).reshape(zz.shape)
        return complex(out) if scalar else out
    acc = np.full(zz.shape, coeffs_ascending[-1], dtype=np.complex128)
    for cj in coeffs_ascending[-2::-1]:
        acc *= zz
        acc += cj
    return complex(acc) if scalar else acc


def rotate_coefficients(p: ComplexPolynomial, theta: float) -> ComplexPolynomial:
    """Multiply coefficient k by e^{ik theta}; |rotated(z)| = |p(e^{i theta} z)|."""
    k = np.arange(p.degree + 1)
    return ComplexPolynomial.from_coefficients(p.coeff_array() * np.exp(1j * theta * k))


@lru_cache(maxsize=64)
def _det_log_coeffs(spec: EnsembleSpec, k: int) -> np.ndarray:
    """log coefficients of the determinant polynomial D_k(t) = a c_k - |b_k|^2.

    Writing f(j) for the order-k falling factorial, the t^m coefficient of
    D_k is sum over pairs i < j with i + j = m + k of
    w_i w_j (f(j) - f(i))^2, which is nonnegative term by term: the
    determinant is evaluated without cancellation at any t.
    """
    n = spec.degree
    lw = _log_weights(spec)
    lf = np.full(n + 1, -np.inf)
    for j in range(k, n + 1):
        lf[j] = math.lgamma(j + 1.0) - math.lgamma(j - k + 1.0)
    n_coeff = max(2 * n - k, 0)
    ld = np.full(n_coeff, -np.inf)
    for m in range(n_coeff):
        terms = []
        for i in range(max(0, m + k - n), (m + k + 1) // 2):
            j = m + k - i
            # f(j) > f(i) whenever j > i and j >= k; i < k gives f(i) = 0
            if lf[j] == -np.inf:
                continue
            if lf[i] == -np.inf:
                ldiff2 = 2.0 * lf[j]
            else:
                ldiff2 = 2.0 * (lf[j] + math.log1p(-math.exp(min(lf[i] - lf[j], -1e-18))))
            terms.append(lw[i] + lw[j] + ldiff2)
        if terms:
            ld[m] = logsumexp(np.array(terms))
    return ld


def kernel_entries(spec: EnsembleSpec, z: complex, k: int = 1) -> KernelEntries:
    """Covariance entries (a, b_k, c_k) and the stable determinant at z.

    Log-domain summation throughout, so degrees in the hundreds and any
    |z| are fine; entries that exceed the double range come back as inf.
    Kostlan at k = 1 uses its closed forms a = (1+t)^n,
    b = n conj(z) (1+t)^(n-1), c = n (n t + 1) (1+t)^(n-2),
    det = n (1+t)^(2n-2).
    """
    n = spec.degree
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"derivative order k must be an integer >= 1, got {k!r}")
    if k > n:
        raise ValueError(f"derivative order k = {k} exceeds degree n = {n}")
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag

    if spec.kind == "kostlan" and k == 1:
        l1t = math.log1p(t)
        a = math.exp(n * l1t)
        b = n * z.conjugate() * math.exp((n - 1) * l1t)
        c = n * (n * t + 1.0) * math.exp((n - 2) * l1t)
        det = n * math.exp((2 * n - 2) * l1t)
        return KernelEntries(a=a, b=b, c=c, order=1, determinant=det)

    lw = _log_weights(spec)
    j = np.arange(n + 1, dtype=np.float64)
    lt = math.log(t) if t > 0.0 else -np.inf

    if t == 0.0:
        a = math.exp(lw[0])
        lfk = math.lgamma(k + 1.0)  # f(k,k) = k!
        b = 0j  # conj(z)^k = 0 for k >= 1
        c = math.exp(2.0 * lfk + lw[k])
        return KernelEntries(a=a, b=b, c=c, order=k, determinant=a * c)

    la = logsumexp(lw + j * lt)
    jj = np.arange(k, n + 1, dtype=np.float64)
    lfall = np.array([math.lgamma(x + 1.0) - math.lgamma(x - k + 1.0) for x in jj])
    ls = logsumexp(lw[k:] + lfall + (jj - k) * lt)       # sum f w t^(j-k)
    lc = logsumexp(lw[k:] + 2.0 * lfall + (jj - k) * lt)
    ld = _det_log_coeffs(spec, k)
    m = np.arange(ld.size, dtype=np.float64)
    ldet = logsumexp(ld + m * lt)

    def from_log(x: float) -> float:
        return math.exp(x) if x < 709.0 else math.inf

    phase = (z.conjugate() / abs(z)) ** k
    return KernelEntries(
        a=from_log(la),
        b=phase * from_log(ls + 0.5 * k * lt),
        c=from_log(lc),
        order=k,
        determinant=from_log(ldet),
    )


def conditional_variance(spec: EnsembleSpec, z: complex, k: int) -> float:
    """Variance of p^(k)(z) given p(z) = 0: (a c_k - |b_k|^2) / a."""
    n = spec.degree
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"derivative order k must be an integer >= 1, got {k!r}")
    if k > n:
        raise ValueError(f"derivative order k = {k} exceeds degree n = {n}")
    z = complex(z)
    t = z.real * z.real + z.imag * z.imag
    if spec.kind == "kostlan" and k == 1:
        return n * math.exp((n - 2) * math.log1p(t))
    lw = _log_weights(spec)
    j = np.arange(n + 1, dtype=np.float64)
    lt = math.log(t) if t > 0.0 else -np.inf
    la = logsumexp(lw + j * lt) if t > 0.0 else lw[0]
    ld = _det_log_coeffs(spec, k)
    if t == 0.0:
        ldet = ld[0]
    else:
        ldet = logsumexp(ld + np.arange(ld.size, dtype=np.float64) * lt)
    out = ldet - la
    return math.exp(out) if out < 709.0 else math.inf


class RadialKernel:
    """Vectorized scale-free kernel ratios at derivative order 1.

    The length integrand needs only 1/a, Q1 = det/a^3 and the radial factor
    s2 = S/a^2 with Re b = x S (S real, nonnegative).  Those ratios stay
    within double range long after a, c and det themselves overflow, so we
    evaluate scaled mantissas plus explicit log corrections:

      t <= 1: ascending Horner of weight polynomials scaled by W = max w;
      t  > 1: Horner in u = 1/t of the reversed polynomials, the factored
              powers of t handled in logs.

    Kostlan bypasses the polynomials with its closed forms in logs.
    """

    def __init__(self, spec: EnsembleSpec):
        self.spec = spec
        self.n = spec.degree
        self.kostlan = spec.kind == "kostlan"
        if self.kostlan:
            return
        lw = _log_weights(spec)
        self.logW = float(np.max(lw))
        w = np.exp(lw - self.logW)
        n = self.n
        j = np.arange(n + 1, dtype=np.float64)
        self.wa = w                                   # a(t)/W
        self.ws = j * w                               # S(t)/W, coefficient of t^(j-1)
        ld = _det_log_coeffs(spec, 1)                 # degree 2n-2 in t
        self.wd = np.exp(ld - 2.0 * self.logW)        # det(t)/W^2
        # reversed coefficient arrays for t > 1 (Horner in u = 1/t)
        self.wa_rev = self.wa[::-1].copy()            # a = W t^n * A(u)
        self.ws_rev = self.ws[1:][::-1].copy()        # S = W t^(n-1) * S(u)
        self.wd_rev = self.wd[::-1].copy()            # det = W^2 t^(2n-2) * D(u)

    @staticmethod
    def _horner(c: np.ndarray, x: np.ndarray) -> np.ndarray:
        acc = np.full(x.shape, c[-1])
        for cj in c[-2::-1]:
            acc *= x
            acc += cj
        return acc

    def ratios(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (inv_a, q1, s2) arrays for an array of t = |z|^2 >= 0."""
        t = np.asarray(t, dtype=np.float64)
        n = self.n
        if self.kostlan:
            l1t = np.log1p(t)
            inv_a = np.exp(-n * l1t)
            q1 = np.exp(math.log(n) - (n + 2) * l1t)
            s2 = np.exp(math.log(n) - (n + 1) * l1t)
            return inv_a, q1, s2
        inv_a = np.empty_like(t)
        q1 = np.empty_like(t)
        s2 = np.empty_like(t)
        lo = t <= 1.0
        if np.any(lo):
            tl = t[lo]
            A = self._horner(self.wa, tl)
            S = self._horner(self.ws[1:], tl)         # sum_{j>=1} j w~_j t^(j-1)
            D = self._horner(self.wd, tl)
            with np.errstate(over="ignore", under="ignore"):
                inv_a[lo] = np.exp(-self.logW) / A
                q1[lo] = np.exp(np.log(D) - 3.0 * np.log(A) - self.logW)
                s2[lo] = np.exp(np.log(S) - 2.0 * np.log(A) - self.logW)
        if np.any(~lo):
            th = t[~lo]
            u = 1.0 / th
            lt = np.log(th)
            A = self._horner(self.wa_rev, u)
            S = self._horner(self.ws_rev, u)
            D = self._horner(self.wd_rev, u)
            with np.errstate(over="ignore", under="ignore"):
                inv_a[~lo] = np.exp(-(self.logW + n * lt) - np.log(A))
                q1[~lo] = np.exp(np.log(D) - 3.0 * np.log(A) - self.logW - (n + 2) * lt)
                s2[~lo] = np.exp(np.log(S) - 2.0 * np.log(A) - self.logW - (n + 1) * lt)
        return inv_a, q1, s2

    def tail_pieces(self, t_cut: float) -> tuple[float, float]:
        """Certified majorant data for the integral beyond radius sqrt(t_cut).

        For t >= T the monotone bounds det(t) <= det(T) (t/T)^(2n-2),
        S(t) <= S(T) (t/T)^(n-1) and a(t) >= w_n t^n give power-law
        majorants of sqrt(det/a^3) and S/a^2.  Returns (p1, p2) with

          integral_{r>sqrt(T)} sqrt(q1) r dr            <= p1
          integral_{r>sqrt(T)} sqrt(t) s2 r dr          <= p2

        so the area-integral tail of the length integrand is bounded by
        2 pi p1 + 4 sqrt(pi) p2 (the |cos| factor integrates to 4).
        """
        n = self.n
        T = float(t_cut)
        lT = math.log(T)
        if self.kostlan:
            # q1 = n (1+t)^-(n+2), s2 = n (1+t)^-(n+1), both exactly monotone
            l1T = math.log1p(T)
            # int_T^inf sqrt(n) (1+t)^(-(n+2)/2) dt/2 = sqrt(n) (1+T)^(-n/2) / n
            p1 = math.exp(0.5 * math.log(n) - 0.5 * n * l1T - math.log(n))
            # int_T^inf sqrt(t) n (1+t)^-(n+1) dt/2 <= n int (1+t)^(-n-1/2) dt/2
            p2 = math.exp(math.log(n) + (0.5 - n) * l1T - math.log(2 * n - 1))
            return p1, p2
        lw_n = _log_weights(self.spec)[-1]
        u = 1.0 / T
        lA_S = math.log(self._horner(self.ws_rev, np.array([u]))[0])
        lA_D = math.log(self._horner(self.wd_rev, np.array([u]))[0])
        lS_T = self.logW + (n - 1) * lT + lA_S
        lD_T = 2.0 * self.logW + (2 * n - 2) * lT + lA_D
        # piece 1: sqrt(det/a^3) <= sqrt(det(T)) (t/T)^(n-1) / (w_n^1.5 t^1.5n)
        #   -> C1 t^(-n/2 - 1); int_T^inf C1 t^(-n/2-1) dt/2 = C1 T^(-n/2) / n
        lC1 = 0.5 * lD_T - (n - 1) * lT - 1.5 * (self.logW + math.log(self.wa[-1]))
        lp1 = lC1 - 0.5 * n * lT - math.log(n)
        # piece 2: s2 <= S(T) (t/T)^(n-1) / (w_n^2 t^2n) -> C2 t^(-n-1);
        #   int_T^inf sqrt(t) C2 t^(-n-1) dt/2 = C2 T^(1/2-n) / (2n-1)
        lC2 = lS_T - (n - 1) * lT - 2.0 * (self.logW + math.log(self.wa[-1]))
        lp2 = lC2 + (0.5 - n) * lT - math.log(2 * n - 1)
        p1 = math.exp(lp1) if lp1 < 709.0 else math.inf
        p2 = math.exp(lp2) if lp2 < 709.0 else math.inf
        return p1, p2
