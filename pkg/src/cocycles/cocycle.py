"""Quasi-periodic matrix cocycles: iteration, Lyapunov spectra, nilpotency.

A cocycle is a rotation vector together with a matrix-valued function on the
torus; its n-th iterate is the ordered product along the rotation orbit.
Lyapunov exponents are estimated by QR-reorthogonalized orbit products, rank
profiles drive nilpotency detection, and rank-one cocycles get their top
exponent in closed form from the scalar factorization.
"""

from dataclasses import dataclass, field

import numpy as np

from . import frames as fr
from .errors import (
    DegreeOverflow,
    NotPolynomializable,
    RankNotOne,
    StructureViolation,
    TailTooFat,
    UnsupportedBase,
)
from .matfun import GridMatrixFunction, MatrixFunction, max_rank
from .trigpoly import TrigPoly, default_grid_size, log_integral

GOLDEN_MEAN = 0.6180339887498949

DEGREE_CAP = 4096


@dataclass(frozen=True)
class Cocycle:
    frequencies: tuple
    matrix: object

    def __post_init__(self):
        freqs = tuple(float(a) % 1.0 for a in self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if len(freqs) < 1:
            raise ValueError("at least one frequency required")
        mat = self.matrix
        if isinstance(mat, MatrixFunction):
            if len(freqs) != 1:
                raise UnsupportedBase(
                    "exact entries require a one-dimensional base; "
                    "use grid samples for more frequencies"
                )
        elif isinstance(mat, GridMatrixFunction):
            if mat.base_dim != len(freqs):
                raise ValueError("grid dimension does not match frequency count")
        else:
            raise TypeError("matrix must be a MatrixFunction or GridMatrixFunction")
        if mat.rows != mat.cols:
            raise ValueError("cocycle matrix must be square")

    @property
    def dim(self):
        return self.matrix.rows

    @property
    def base_dim(self):
        return len(self.frequencies)

    @property
    def alpha(self):
        """The rotation number for a one-dimensional base."""
        if len(self.frequencies) != 1:
            raise UnsupportedBase("scalar frequency only defined for base_dim 1")
        return self.frequencies[0]

    @property
    def is_exact(self):
        return isinstance(self.matrix, MatrixFunction)

    def to_json_dict(self):
        return {
            "frequencies": list(self.frequencies),
            "matrix": self.matrix.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data):
        mat = data["matrix"]
        if "entries" in mat:
            matrix = MatrixFunction.from_json_dict(mat)
        else:
            matrix = GridMatrixFunction.from_json_dict(mat)
        return cls(tuple(data["frequencies"]), matrix)


@dataclass
class LyapunovReport:
    exponents: list
    raw_estimates: list
    stderr: list
    divergent: list
    n: int
    grid: int


@dataclass
class RankProfile:
    ranks: list
    stabilized_at: int
    min_rank: int
    exceptional: dict = field(default_factory=dict)


@dataclass
class NilpotencyReport:
    nilpotent: bool
    degree: int | None
    witness: dict


@dataclass
class RankOneFactor:
    c: TrigPoly
    phi: MatrixFunction
    psi: MatrixFunction
    residual: float


def iterate(C, n, degree_cap=DEGREE_CAP):
    """Ordered product A(x+(n-1)a)···A(x) as a matrix function."""
    if n < 1:
        raise ValueError("iterate count must be positive")
    if C.is_exact:
        if C.matrix.degree * n > degree_cap:
            raise DegreeOverflow(
                f"iterate degree {C.matrix.degree * n} exceeds cap {degree_cap}"
            )
        prod = C.matrix
        for j in range(1, n):
            prod = C.matrix.translate(j * C.alpha) @ prod
        return prod
    pts = C.matrix.grid_points()
    alpha = np.array(C.frequencies)
    prod = C.matrix.sample_at(pts)
    for j in range(1, n):
        prod = C.matrix.sample_at((pts + j * alpha) % 1.0) @ prod
    shape = C.matrix.samples.shape
    return GridMatrixFunction(prod.reshape(shape))


def lyapunov_spectrum(C, n=1000, M=64, flag_db=40.0):
    """Exponent estimates from M grid orbits of length n, with divergence flags.

    Products are never formed directly; a QR step per iteration keeps the
    basis orthonormal and accumulates log singular growth per direction.  An
    initial warmup fifth of the run (at most 64 steps) lets the random
    starting frame settle into the growth filtration and is excluded from the
    averages.

    stderr combines the spread over orbits with a Richardson estimate of the
    still-settling bias: a running mean converging like 1/t leaves a residual
    of three times its drift over the final quarter of the run.  Spread alone
    misses that bias because every orbit shares the transient when two
    exponents nearly coincide.

    Three independent signs mark directions as diverging to -inf:
      * a direction's R-diagonal entry dies (exactly zero, or below the
        per-sample relative floor 1e-14) on every orbit at a structural rate,
        at least once per couple of nilpotency windows;
      * fresh length-d window products collapse below 1e-11 of the product
        of their step norms, or below the absolute rounding floor
        eps * scale * (largest partial product) where a zero product is
        indistinguishable from noise, on every orbit in all but a rounding-
        grazed fraction 1/64 of windows; that flags all directions at once;
      * a direction's accumulated mean log sinks below -flag_db*ln(10) while
        still strictly decreasing over the last quarter of the run.
    """
    d = C.dim
    if C.base_dim == 1:
        starts = (np.arange(M) / M)[:, None]
    else:
        axes = [np.arange(M) / M] * C.base_dim
        mesh = np.meshgrid(*axes, indexing="ij")
        starts = np.stack([g.ravel() for g in mesh], axis=1)
    batch = starts.shape[0]

    if C.is_exact:
        freqs, cmat = C.matrix._coeff_tensor()
        phases = np.exp(2j * np.pi * np.outer(starts[:, 0], freqs))
        step = np.exp(2j * np.pi * freqs * C.alpha)
    else:
        # the orbit lattice stays a regular lattice under rotation, so a
        # phase twist of the Fourier grid plus an inverse FFT per step
        # replaces dense trigonometric interpolation; the twist is rebuilt
        # from t*alpha mod 1 each step so rounding does not accumulate
        gaxes = tuple(range(C.base_dim))
        if C.matrix.grid_shape == (M,) * C.base_dim:
            base = C.matrix.samples
        else:
            base = C.matrix.sample_at(starts).reshape(
                (M,) * C.base_dim + (d, d)
            )
        spec = np.fft.fftn(base, axes=gaxes)
        kvec = np.fft.fftfreq(M, 1.0 / M)

        def _lattice(t):
            s = spec
            for ax in range(C.base_dim):
                shp = [1] * (C.base_dim + 2)
                shp[ax] = M
                s = s * np.exp(
                    2j * np.pi * kvec * ((t * C.frequencies[ax]) % 1.0)
                ).reshape(shp)
            return np.fft.ifftn(s, axes=gaxes)
    # a fixed random orthonormal start keeps no basis vector exactly inside a
    # structural kernel, which an identity start would do for triangular input
    rng = np.random.default_rng(12345)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q0, _ = np.linalg.qr(g)
    q = np.broadcast_to(q0, (batch, d, d)).copy()

    warmup = min(n // 5, 64)
    n_eff = n - warmup
    logr = np.zeros((batch, d))
    deaths = np.zeros((batch, d), dtype=int)
    history = np.empty((n_eff, d))
    win_prod = None
    win_len = 0
    win_fros = []
    win_total = 0
    win_collapsed = np.zeros(batch, dtype=int)
    sup = 0.0

    for t in range(n):
        if C.is_exact:
            mats = (phases @ cmat).reshape(batch, d, d)
            phases *= step
        else:
            mats = _lattice(t).reshape(batch, d, d)
        if t == 0:
            sup = float(np.abs(mats).max())
        z = mats @ q
        q, r = np.linalg.qr(z)
        if t < warmup:
            continue
        diag = np.abs(np.einsum("bii->bi", r))
        floor = 1e-14 * diag.max(axis=1, keepdims=True)
        dead = diag <= floor
        deaths += dead
        logr += np.where(dead, 0.0, np.log(np.where(dead, 1.0, diag)))
        history[t - warmup] = logr.mean(axis=0)

        # fresh short-window products catch iterates vanishing to float
        # precision even when no single QR step sees a dead diagonal
        fro = np.linalg.norm(mats, axis=(1, 2))
        win_prod = mats.copy() if win_prod is None else mats @ win_prod
        win_fros.append(fro)
        win_len += 1
        if win_len == d:
            wnorm = np.linalg.norm(win_prod, axis=(1, 2))
            fros = np.stack(win_fros)
            rel = 1e-11 * fros.prod(axis=0)
            # an orbit grazing a zero of A drives the relative threshold
            # under the rounding noise of the factors, so floor it at
            # eps * scale * (largest product with one factor removed)
            partial = np.stack([
                np.prod(np.delete(fros, j, axis=0), axis=0) for j in range(d)
            ]).max(axis=0)
            noise = 64.0 * np.finfo(float).eps * sup * partial
            win_collapsed += wnorm < np.maximum(rel, noise)
            win_total += 1
            win_prod = None
            win_len = 0
            win_fros = []

    alive = n_eff - deaths
    finite_orbit = alive > 0
    per_orbit = np.where(finite_orbit, logr / np.maximum(alive, 1), -np.inf)

    # the spectrum is a set: an orbit whose QR columns lock onto a permuted
    # filtration (a structurally dead start direction, say) still estimates
    # the same exponents, so sort each orbit descending before aggregating
    ordb = np.argsort(-per_orbit, axis=1, kind="stable")
    est_sorted = np.take_along_axis(per_orbit, ordb, axis=1)
    deaths_sorted = np.take_along_axis(deaths, ordb, axis=1)

    finite_dir = np.isfinite(est_sorted).all(axis=0)
    po_safe = np.where(np.isfinite(est_sorted), est_sorted, 0.0)
    raw = np.where(finite_dir, po_safe.mean(axis=0), -np.inf)
    err = np.where(finite_dir, po_safe.std(axis=0) / np.sqrt(batch), 0.0)

    # structural deaths recur within every nilpotency window on every orbit;
    # isolated kernel hits on special grid points do not
    structural = deaths_sorted.min(axis=0) >= max(2, n_eff // (2 * d))
    # an orbit grazing a zero of A can push one window product above its
    # collapse threshold by rounding alone, so long runs may miss rarely
    if win_total >= 2 and win_collapsed.min() >= win_total - win_total // 64:
        structural = np.ones(d, dtype=bool)

    # slow analytic decay shows no deaths, so no orbit permutes its columns
    # and the per-column history lines up with the sorted slots
    quarter = max(n_eff // 4, 2)
    ravg = history / np.arange(1, n_eff + 1)[:, None]
    tail_slope = np.diff(ravg[-quarter:], axis=0)
    soft = (history[-1] < -flag_db * np.log(10.0)) & np.all(
        tail_slope < -1e-13, axis=0
    )
    flags = structural | soft

    # running mean settling like 1/t leaves a bias of 3x its final-quarter
    # drift; orbit spread cannot see it since the transient is common mode
    conv = 3.0 * np.abs(ravg[-1] - ravg[-quarter])
    err = np.where(finite_dir, err + conv, 0.0)

    order = np.lexsort((-raw, flags))
    raw = raw[order]
    err = err[order]
    flags = flags[order]
    exponents = [
        float("-inf") if flags[k] else float(raw[k]) for k in range(d)
    ]
    return LyapunovReport(exponents, [float(v) for v in raw],
                          [float(v) for v in err],
                          [bool(f) for f in flags], n, M)


def rank_profile(C, n_max=None, tol=1e-9, M=None):
    """Maximal ranks of the iterates until they stabilize.

    Singular values of the n-th iterate are measured against the n-th power
    of the cocycle's own largest singular value, so an iterate that collapses
    below float noise registers as rank zero instead of noise rank.
    """
    d = C.dim
    if n_max is None:
        n_max = d + 1
    if C.is_exact:
        from .trigpoly import default_grid_size

        samples = C.matrix.sample_grid(max(64, default_grid_size(C.matrix.degree)))
    else:
        samples = C.matrix.all_samples()
    s1 = float(np.linalg.svd(samples, compute_uv=False).max())
    ranks = []
    exceptional = {}
    stabilized = None
    for n in range(1, n_max + 1):
        F = iterate(C, n)
        r, exc = max_rank(F, M=M, tol=tol, scale=s1 ** n)
        if ranks and r > ranks[-1]:
            raise StructureViolation(
                f"rank increased from {ranks[-1]} to {r} at step {n}; "
                "tolerance too loose for this grid"
            )
        if ranks and r == ranks[-1]:
            stabilized = n - 1
            break
        ranks.append(r)
        exceptional[n] = exc
        if r == 0 or (n == 1 and r == d):
            # zero iterates stay zero; a somewhere-invertible product of
            # somewhere-invertible factors keeps full maximal rank
            stabilized = n
            break
    # stabilized stays None when the sequence was still falling at n_max
    return RankProfile(ranks, stabilized, ranks[-1], exceptional)


def detect_nilpotency(C, tol=1e-10):
    """Decide whether some iterate vanishes identically, with a certificate.

    The rank of the first iterate bounds the search: if no iterate up to
    max_rank(A)+1 vanishes, none ever does.
    """
    scale = C.matrix.sup_bound() if C.is_exact else float(
        np.abs(C.matrix.samples).max()
    )
    if scale == 0.0:
        return NilpotencyReport(True, 1, {"certificate": 0.0, "scale": 0.0})
    r1, _ = max_rank(C.matrix)
    for n in range(1, r1 + 2):
        F = iterate(C, n)
        if C.is_exact:
            cert = F.max_coeff()
        else:
            cert = float(np.abs(F.samples).max())
        if cert <= tol * scale:
            return NilpotencyReport(True, n, {"certificate": cert, "scale": scale})
    last = iterate(C, r1 + 1)
    if C.is_exact:
        M = max(64, default_grid_size(last.degree))
        samples = last.sample_grid(M)
        norms = np.linalg.norm(samples, ord=2, axis=(1, 2))
        j = int(norms.argmax())
        witness = {"max_sample_norm": float(norms[j]), "at": j / M, "scale": scale}
    else:
        norms = np.abs(last.samples).max(axis=(-2, -1))
        j = np.unravel_index(int(norms.argmax()), norms.shape)
        witness = {"max_sample_norm": float(norms[j]), "at": tuple(int(i) for i in j),
                   "scale": scale}
    return NilpotencyReport(False, None, witness)


def rank_one_factor(C, M=None, tol=1e-9):
    """Scalar times outer-product form c(x) phi(x) psi*(x) for rank-one cocycles.

    phi spans the range of A and psi the range of A*; both are built from the
    best-conditioned column (largest maximal norm), phase-aligned around the
    circle, and returned as unit-norm trig-polynomial columns.
    """
    if not C.is_exact:
        raise UnsupportedBase("rank-one factorization needs exact entries")
    A = C.matrix
    r, _ = max_rank(A)
    if r != 1:
        raise RankNotOne(f"maximal rank is {r}, not 1")
    if M is None:
        M = max(256, default_grid_size(4 * max(A.degree, 1)))
    samples = A.sample_grid(M)

    phi = _aligned_column_lift(samples, A.degree, M)
    psi = _aligned_column_lift(np.conj(np.swapaxes(samples, 1, 2)), A.degree, M)

    c_mat = phi.adjoint() @ A @ psi
    c = c_mat.entries[0][0]

    recon = phi @ c_mat @ psi.adjoint()
    residual = float(
        np.abs(recon.sample_grid(M) - samples).max()
    )
    scale = float(np.abs(samples).max())
    if residual > 1e-6 * scale:
        raise RankNotOne(
            f"factor reconstruction residual {residual:.3e} too large"
        )
    return RankOneFactor(c, phi, psi, residual)


def _aligned_column_lift(samples, degree, M):
    norms = np.linalg.norm(samples, axis=1)
    j = int(norms.max(axis=0).argmax())
    field = fr.field_from_vectors(samples[:, :, j], degree)
    aligned = fr.phase_align(field)
    try:
        return fr.to_analytic_frame(aligned, N=M // 2 - 1, tol=1e-7)
    except TailTooFat as e:
        raise NotPolynomializable(str(e)) from e


def exact_L1_rank_one(C, zero_tol=1e-10):
    """Top exponent of a rank-one cocycle in closed form.

    Splits as the log integral of the scalar factor plus the log integral of
    the coupling psi*(x+a) phi(x); the result is -inf exactly when the
    coupling vanishes identically, which forces the second iterate to vanish
    (verified before returning).
    """
    f = rank_one_factor(C)
    coupling_mat = f.psi.adjoint().translate(C.alpha) @ f.phi
    coupling = coupling_mat.entries[0][0]
    if coupling.max_coeff() < zero_tol:
        coupling = TrigPoly.zero()
    if coupling.is_zero:
        a2 = iterate(C, 2)
        scale = C.matrix.sup_bound()
        if a2.max_coeff() > 1e-8 * scale * scale:
            raise StructureViolation(
                "coupling vanishes but the second iterate does not; "
                "lift tolerance too loose"
            )
        return float("-inf")
    return log_integral(f.c) + log_integral(coupling)
