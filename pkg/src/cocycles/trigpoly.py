"""Exact arithmetic for trigonometric polynomials on the circle.

A TrigPoly is a finite Fourier sum f(x) = sum_k c_k e^{2 pi i k x} stored
as a sparse-by-construction coefficient block over k in [kmin, kmax].
Coefficients whose magnitude falls below a relative threshold are dropped,
so the zero function is the empty coefficient map.

GridFunction holds samples on the uniform grid x_j = j/M with M a power
of two; to_grid/from_grid convert between the two representations by FFT
and are exact while M > 2N (no aliasing).
"""

import numpy as np

from .errors import AliasingRisk, RootFindingError

TRUNCATION_RELATIVE = 1e-12
_TWO_PI_I = 2j * np.pi


def _trimmed(kmin, c):
    """Drop sub-threshold coefficients and leading/trailing zeros."""
    c = np.asarray(c, dtype=complex)
    if c.size == 0:
        return 0, c
    mags = np.abs(c)
    top = mags.max()
    if top == 0.0:
        return 0, np.zeros(0, dtype=complex)
    keep = mags > TRUNCATION_RELATIVE * top
    c = np.where(keep, c, 0.0)
    nz = np.nonzero(keep)[0]
    lo, hi = nz[0], nz[-1]
    return kmin + int(lo), c[lo:hi + 1]


class TrigPoly:
    """Trigonometric polynomial with exact coefficient arithmetic."""

    __slots__ = ("kmin", "c")

    def __init__(self, kmin=0, coeffs=()):
        self.kmin, self.c = _trimmed(int(kmin), coeffs)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls(0, ())

    @classmethod
    def constant(cls, value):
        return cls(0, [value])

    @classmethod
    def harmonic(cls, k, amplitude=1.0):
        """amplitude * e^{2 pi i k x}"""
        return cls(k, [amplitude])

    @classmethod
    def cosine(cls, freq=1, amplitude=1.0):
        """amplitude * cos(2 pi freq x)"""
        a = amplitude / 2.0
        return cls(-freq, [a] + [0.0] * (2 * freq - 1) + [a])

    @classmethod
    def sine(cls, freq=1, amplitude=1.0):
        """amplitude * sin(2 pi freq x)"""
        a = amplitude / 2.0
        return cls(-freq, [1j * a] + [0.0] * (2 * freq - 1) + [-1j * a])

    @classmethod
    def from_dict(cls, coeffs):
        """Build from a {frequency: coefficient} mapping."""
        if not coeffs:
            return cls.zero()
        kmin = min(coeffs)
        kmax = max(coeffs)
        c = np.zeros(kmax - kmin + 1, dtype=complex)
        for k, v in coeffs.items():
            c[int(k) - kmin] = v
        return cls(kmin, c)

    # -- basic queries ------------------------------------------------

    @property
    def kmax(self):
        return self.kmin + len(self.c) - 1

    @property
    def degree(self):
        """Smallest N with all frequencies in [-N, N]; 0 for the zero function."""
        if self.is_zero:
            return 0
        return max(abs(self.kmin), abs(self.kmax))

    @property
    def is_zero(self):
        return self.c.size == 0

    def coeff(self, k):
        if self.is_zero or k < self.kmin or k > self.kmax:
            return 0.0 + 0.0j
        return complex(self.c[k - self.kmin])

    def coeffs_dict(self):
        return {self.kmin + j: complex(v) for j, v in enumerate(self.c) if v != 0}

    def max_coeff(self):
        return 0.0 if self.is_zero else float(np.abs(self.c).max())

    def sup_bound(self):
        """Upper bound for sup |f|: the l1 norm of the coefficients."""
        return 0.0 if self.is_zero else float(np.abs(self.c).sum())

    def __repr__(self):
        if self.is_zero:
            return "TrigPoly(0)"
        return f"TrigPoly(deg={self.degree}, terms={np.count_nonzero(self.c)})"

    # -- evaluation and algebra ---------------------------------------

    def eval(self, x):
        """Evaluate at x (scalar or array); exact Fourier sum."""
        if self.is_zero:
            x = np.asarray(x, dtype=float)
            out = np.zeros(x.shape, dtype=complex)
            return out[()] if out.ndim == 0 else out
        x = np.asarray(x, dtype=float)
        ks = np.arange(self.kmin, self.kmax + 1)
        phases = np.exp(_TWO_PI_I * np.multiply.outer(x, ks))
        out = phases @ self.c
        return out[()] if out.ndim == 0 else out

    def translate(self, alpha):
        """f(x + alpha): multiplies c_k by e^{2 pi i k alpha}."""
        if self.is_zero:
            return TrigPoly.zero()
        ks = np.arange(self.kmin, self.kmax + 1)
        return TrigPoly(self.kmin, self.c * np.exp(_TWO_PI_I * alpha * ks))

    def conj(self):
        """Complex conjugate function; c_k -> conj(c_{-k})."""
        if self.is_zero:
            return TrigPoly.zero()
        return TrigPoly(-self.kmax, np.conj(self.c[::-1]))

    def __add__(self, other):
        other = _as_poly(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        kmin = min(self.kmin, other.kmin)
        kmax = max(self.kmax, other.kmax)
        c = np.zeros(kmax - kmin + 1, dtype=complex)
        c[self.kmin - kmin:self.kmax - kmin + 1] += self.c
        c[other.kmin - kmin:other.kmax - kmin + 1] += other.c
        return TrigPoly(kmin, c)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return TrigPoly(self.kmin, -self.c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __mul__(self, other):
        if np.isscalar(other):
            if other == 0 or self.is_zero:
                return TrigPoly.zero()
            return TrigPoly(self.kmin, self.c * other)
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return TrigPoly.zero()
        # frequency blocks add under pointwise product: convolution
        if len(self.c) * len(other.c) > 4096:
            n = len(self.c) + len(other.c) - 1
            nfft = 1 << (n - 1).bit_length()
            prod = np.fft.ifft(np.fft.fft(self.c, nfft) * np.fft.fft(other.c, nfft))[:n]
        else:
            prod = np.convolve(self.c, other.c)
        return TrigPoly(self.kmin + other.kmin, prod)

    def __rmul__(self, other):
        return self.__mul__(other)

    # -- serialization -------------------------------------------------

    def to_json_dict(self):
        return {
            "coeffs": [
                {"k": int(self.kmin + j), "re": float(v.real), "im": float(v.imag)}
                for j, v in enumerate(self.c)
                if v != 0
            ]
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls.from_dict(
            {int(e["k"]): complex(float(e["re"]), float(e["im"])) for e in data["coeffs"]}
        )


def _as_poly(v):
    if isinstance(v, TrigPoly):
        return v
    if np.isscalar(v):
        return TrigPoly.constant(v)
    raise TypeError(f"cannot coerce {type(v)!r} to TrigPoly")


class GridFunction:
    """Samples of a function at x_j = j/M, with M a power of two."""

    __slots__ = ("samples",)

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 1:
            raise ValueError("grid samples must be one-dimensional")
        m = samples.shape[0]
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError(f"grid size must be a power of two, got {m}")
        self.samples = samples

    @property
    def size(self):
        return self.samples.shape[0]

    def __repr__(self):
        return f"GridFunction(M={self.size})"


def default_grid_size(degree):
    """Default grid for degree N: 4 * 2^ceil(log2(N+1)), at least 8."""
    n = max(int(degree), 0) + 1
    return 4 * (1 << (n - 1).bit_length())


def to_grid(f, M=None):
    """Sample f on the uniform grid of size M (exact placement via inverse FFT).

    Raises AliasingRisk unless M > 2 * degree(f).
    """
    if M is None:
        M = default_grid_size(f.degree)
    M = int(M)
    if M < 2 or (M & (M - 1)) != 0:
        raise ValueError(f"grid size must be a power of two, got {M}")
    if M <= 2 * f.degree:
        raise AliasingRisk(f"grid M={M} cannot hold degree {f.degree} (need M > 2N)")
    bins = np.zeros(M, dtype=complex)
    if not f.is_zero:
        for j, v in enumerate(f.c):
            bins[(f.kmin + j) % M] += v
    return GridFunction(np.fft.ifft(bins) * M)


def from_grid(g, N, tol=0.0):
    """Recover a TrigPoly of degree <= N from grid samples.

    Coefficients with |c_k| <= tol are dropped. Raises AliasingRisk when
    N >= M/2. Use grid_tail_mass(g, N) for the discarded out-of-band mass.
    """
    M = g.size
    N = int(N)
    if N >= M // 2:
        raise AliasingRisk(f"degree N={N} not recoverable from M={M} samples (need N < M/2)")
    spec = np.fft.fft(g.samples) / M
    coeffs = {}
    for k in range(-N, N + 1):
        v = spec[k % M]
        if abs(v) > tol:
            coeffs[k] = v
    return TrigPoly.from_dict(coeffs)


def grid_tail_mass(g, N):
    """l2 mass of the Fourier content of g outside frequencies [-N, N]."""
    M = g.size
    N = int(N)
    if N >= M // 2:
        return 0.0
    spec = np.fft.fft(g.samples) / M
    keep = np.zeros(M, dtype=bool)
    for k in range(-N, N + 1):
        keep[k % M] = True
    return float(np.sqrt(np.sum(np.abs(spec[~keep]) ** 2)))


def complex_shift(f, t):
    """Evaluate along the shifted circle x + i t: c_k -> c_k e^{-2 pi k t}.

    Fixture-construction helper; t > 0 damps positive frequencies.
    """
    if f.is_zero:
        return TrigPoly.zero()
    ks = np.arange(f.kmin, f.kmax + 1)
    return TrigPoly(f.kmin, f.c * np.exp(-2.0 * np.pi * ks * t))


def log_integral(f, on_circle_tol=1e-10, residual_tol=1e-6):
    """Mean of ln|f| over the circle, computed exactly from the roots.

    Writing f(x) = z^kmin P(z) with z = e^{2 pi i x}, the integral equals
    ln|lead(P)| + sum over roots rho of P of ln max(1, |rho|). Returns
    -inf exactly when f is the zero polynomial (an analytic f with
    integral -inf vanishes identically, so the dichotomy is sharp).

    Roots come from the companion matrix with one Newton polish each;
    roots within on_circle_tol of the unit circle contribute zero.
    """
    if f.is_zero:
        return float("-inf")
    p = f.c  # ascending powers of z, p[0] != 0, p[-1] != 0
    if len(p) == 1:
        return float(np.log(abs(p[0])))
    roots = np.roots(p[::-1])
    dp = p[1:] * np.arange(1, len(p))
    # one Newton step per root; keep original when the step is degenerate
    val = np.polyval(p[::-1], roots)
    der = np.polyval(dp[::-1], roots)
    ok = np.abs(der) > 0
    polished = np.where(ok, roots - np.where(ok, val / np.where(ok, der, 1.0), 0.0), roots)
    res_old = np.abs(val)
    res_new = np.abs(np.polyval(p[::-1], polished))
    roots = np.where(res_new <= res_old, polished, roots)
    # residual sanity at scale ~ |f| near the root's circle
    scale = np.abs(p).sum() * np.maximum(1.0, np.abs(roots)) ** (len(p) - 1)
    rel = np.abs(np.polyval(p[::-1], roots)) / scale
    worst = float(rel.max())
    if not np.isfinite(worst) or worst > residual_tol:
        raise RootFindingError(
            f"root residual {worst:.3e} exceeds {residual_tol:.1e}", residual=worst
        )
    mags = np.abs(roots)
    outside = mags > 1.0 + on_circle_tol
    total = float(np.log(abs(p[-1])) + np.sum(np.log(mags[outside])))
    return total
