"""Analytically varying subspaces as phase-aligned orthonormal frames on a grid.

A SubspaceField stores one orthonormal frame per grid sample.  Constructors
(kernel, range, preimage, sum, intersection) mark samples where the defining
rank degenerates as exceptional and fill them by continuation from neighbors,
then gauge the frames along the grid so adjacent frames are maximally aligned.
phase_align additionally treats the closure around the circle, recording the
integer winding it removed; to_analytic_frame converts an aligned closed field
into trigonometric-polynomial form.
"""

import numpy as np

from .errors import ClosureDefect, DimensionUnstable, TailTooFat
from .matfun import MatrixFunction
from .trigpoly import TrigPoly


def cont_budget_default(degree, M, k):
    # Lipschitz budget for one grid step of a frame built from data of the
    # given trigonometric degree, with slack factor 10
    return 10.0 * (2.0 * np.pi * max(degree, 1) / M) * max(k, 1)


def polar_unitary(a):
    """Unitary factor of the polar decomposition (batched over leading axes)."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


class SubspaceField:
    """Per-sample orthonormal frames for a subspace moving over the grid.

    align_phase accumulates the determinant phase of every gauge correction
    applied to the raw frames so far; phase_align folds it into the winding
    count when it closes the loop.
    """

    __slots__ = ("frames", "exceptional", "winding", "closure_residual",
                 "cont_budget", "align_phase")

    def __init__(self, frames, exceptional=(), winding=None, closure_residual=None,
                 cont_budget=None, align_phase=0.0):
        frames = np.asarray(frames, dtype=complex)
        if frames.ndim != 3:
            raise ValueError("frames must be (M, d, k)")
        self.frames = frames
        self.exceptional = sorted(set(int(i) for i in exceptional))
        self.winding = list(winding) if winding is not None else [0] * frames.shape[2]
        self.closure_residual = closure_residual
        self.cont_budget = cont_budget
        self.align_phase = float(align_phase)

    @property
    def M(self):
        return self.frames.shape[0]

    @property
    def d(self):
        return self.frames.shape[1]

    @property
    def k(self):
        return self.frames.shape[2]

    def projectors(self):
        return self.frames @ np.conj(np.swapaxes(self.frames, 1, 2))

    def orthonormality_defect(self):
        f = self.frames
        g = np.conj(np.swapaxes(f, 1, 2)) @ f
        eye = np.eye(self.k)
        return float(np.abs(g - eye).max()) if self.k else 0.0


def subspace_distance(s, t):
    """Max over samples of the spectral norm gap between the projectors."""
    diff = s.projectors() - t.projectors()
    return float(np.linalg.norm(diff, ord=2, axis=(1, 2)).max())


def _fill_exceptional(frames, exceptional):
    # overwrite each degenerate sample with the reorthonormalized average of
    # its nearest valid neighbors on both sides (cyclically)
    M = frames.shape[0]
    exc = set(exceptional)
    good = np.array(sorted(set(range(M)) - exc), dtype=int)
    if good.size == 0:
        raise DimensionUnstable("no non-exceptional samples to continue from")
    out = frames.copy()
    for e in sorted(exc):
        pos = np.searchsorted(good, e)
        gl = good[pos - 1] if pos > 0 else good[-1]
        gr = good[pos % good.size]
        a, b = out[gl], frames[gr]
        w = polar_unitary(np.conj(b.T) @ a)
        avg = 0.5 * (a + b @ w)
        u, _, vh = np.linalg.svd(avg, full_matrices=False)
        out[e] = u @ vh
    return out


def _rolling_align(frames):
    # gauge each frame to follow the previous one (Procrustes per step);
    # returns the aligned frames and the continuously lifted det-phase of the
    # corrections, which phase_align turns into a winding count.  The lift
    # accumulates increments between consecutive cumulative corrections, so
    # it never wraps as long as adjacent frames stay close.
    M, _, k = frames.shape
    if k == 0:
        return frames.copy(), 0.0
    out = frames.copy()
    theta = 0.0
    prev = np.eye(k, dtype=complex)
    for m in range(1, M):
        w = polar_unitary(np.conj(out[m].T) @ out[m - 1])
        out[m] = out[m] @ w
        theta += float(np.angle(np.linalg.det(np.conj(prev.T) @ w)))
        prev = w
    return out, theta


def _finish(frames, exceptional, budget):
    if len(exceptional) > 0.1 * frames.shape[0]:
        raise DimensionUnstable(
            f"{len(exceptional)} of {frames.shape[0]} samples degenerate"
        )
    filled = _fill_exceptional(frames, exceptional) if exceptional else frames
    aligned, theta = _rolling_align(filled)
    return SubspaceField(aligned, exceptional, cont_budget=budget,
                         align_phase=theta)


def _svd_rank_split(samples, tol):
    u, s, vh = np.linalg.svd(samples)
    smax = float(s[..., 0].max()) if s.size else 0.0
    thresh = tol * max(smax, 1e-300)
    local = (s > thresh).sum(axis=-1)
    return u, s, vh, local


def kernel_field(F, M=None, tol=1e-9):
    """Field of right null spaces of F, at the generic (maximal-rank) dimension."""
    if M is None:
        M = _default_field_grid(F)
    samples = F.sample_grid(M)
    return kernel_field_from_samples(samples, F.degree, tol)


def kernel_field_from_samples(samples, degree, tol=1e-9):
    samples = np.asarray(samples, dtype=complex)
    _, _, vh, local = _svd_rank_split(samples, tol)
    r = int(local.max())
    k = samples.shape[2] - r
    frames = np.conj(np.swapaxes(vh[:, r:, :], 1, 2))
    exc = [int(i) for i in np.nonzero(local < r)[0]]
    return _finish(frames, exc, cont_budget_default(degree, samples.shape[0], max(k, 1)))


def range_field(F, M=None, tol=1e-9):
    """Field of column spans of F, at the generic dimension."""
    if M is None:
        M = _default_field_grid(F)
    samples = F.sample_grid(M)
    return range_field_from_samples(samples, F.degree, tol)


def range_field_from_samples(samples, degree, tol=1e-9):
    samples = np.asarray(samples, dtype=complex)
    u, _, _, local = _svd_rank_split(samples, tol)
    r = int(local.max())
    frames = u[:, :, :r]
    exc = [int(i) for i in np.nonzero(local < r)[0]]
    return _finish(frames, exc, cont_budget_default(degree, samples.shape[0], max(r, 1)))


def field_from_vectors(vecs, degree, tol=1e-7):
    """One-dimensional field from raw vector samples; vanishing samples are filled."""
    vecs = np.asarray(vecs, dtype=complex)
    norms = np.linalg.norm(vecs, axis=1)
    scale = float(norms.max())
    if scale == 0.0:
        raise DimensionUnstable("all vector samples vanish")
    exc = [int(i) for i in np.nonzero(norms < tol * scale)[0]]
    safe = np.where(norms[:, None] < tol * scale, 1.0, norms[:, None])
    frames = (vecs / safe)[:, :, None]
    return _finish(frames, exc, cont_budget_default(degree, vecs.shape[0], 1))


def orthocomplement(S):
    """Per-sample orthogonal complement; dimensions add up to d."""
    M, d, k = S.frames.shape
    if k == 0:
        eye = np.broadcast_to(np.eye(d, dtype=complex), (M, d, d)).copy()
        return SubspaceField(eye, S.exceptional, cont_budget=S.cont_budget)
    u, _, _ = np.linalg.svd(S.frames)
    frames = u[:, :, k:]
    aligned, theta = _rolling_align(frames)
    return SubspaceField(aligned, S.exceptional, cont_budget=S.cont_budget,
                         align_phase=theta)


def preimage_field(F, S, M=None, tol=1e-9):
    """Field of preimages F(x)^{-1} S(x), via the complement of ran(F* S-perp)."""
    if M is None:
        M = S.M
    if M != S.M:
        raise ValueError("grid size must match the field")
    fsamp = F.sample_grid(M)
    perp = orthocomplement(S)
    w = np.conj(np.swapaxes(fsamp, 1, 2)) @ perp.frames
    u, s, _ = np.linalg.svd(w)
    smax = float(s[..., 0].max()) if s.size and s.shape[-1] else 0.0
    local = (s > tol * max(smax, 1e-300)).sum(axis=-1) if smax else np.zeros(M, int)
    r = int(local.max()) if s.size and s.shape[-1] else 0
    frames = u[:, :, r:]
    exc = sorted(set(S.exceptional) | {int(i) for i in np.nonzero(local < r)[0]})
    budget = cont_budget_default(F.degree, M, max(frames.shape[2], 1))
    if S.cont_budget:
        budget = max(budget, S.cont_budget)
    return _finish(frames, exc, budget)


def sum_field(S, T, tol=1e-9):
    """Pointwise span of the union, at the generic dimension."""
    if S.M != T.M:
        raise ValueError("grid size mismatch")
    stacked = np.concatenate([S.frames, T.frames], axis=2)
    if stacked.shape[2] == 0:
        return SubspaceField(stacked, cont_budget=S.cont_budget)
    u, s, _, local = _svd_rank_split(stacked, tol)
    r = int(local.max())
    frames = u[:, :, :r]
    exc = sorted(set(S.exceptional) | set(T.exceptional)
                 | {int(i) for i in np.nonzero(local < r)[0]})
    budget = max(S.cont_budget or 0.0, T.cont_budget or 0.0) or None
    return _finish(frames, exc, budget)


def intersect_field(S, T, tol=1e-9):
    """Pointwise intersection, computed as the complement of the sum of complements."""
    return orthocomplement(sum_field(orthocomplement(S), orthocomplement(T), tol))


def complement_within(inner, outer, tol=1e-9):
    """Vectors of `outer` orthogonal to `inner`; requires inner ⊆ outer pointwise."""
    return intersect_field(outer, orthocomplement(inner), tol)


def phase_align(S):
    """Gauge the frames into a continuous closed loop, removing the winding.

    Consecutive frames are aligned by orthogonal Procrustes; the leftover
    closure holonomy is split into its determinant phase and an SU(k) part and
    both are distributed evenly over the grid.  The integer number of full
    turns the corrections made is recorded in winding (first entry for k > 1,
    where per-column turns are not separable).  A residual above the
    continuity budget means the subspace path itself jumps somewhere, so no
    gauge can close it; that raises ClosureDefect.
    """
    M, d, k = S.frames.shape
    budget = S.cont_budget if S.cont_budget else cont_budget_default(1, M, max(k, 1))
    if k == 0:
        return SubspaceField(S.frames.copy(), S.exceptional, [], 0.0, budget,
                             S.align_phase)

    g, theta_acc = _rolling_align(S.frames)

    c = np.conj(g[0].T) @ g[-1]
    u, _, vh = np.linalg.svd(c)
    defect = u @ vh
    theta_d = float(np.angle(np.linalg.det(defect)))
    su = defect * np.exp(-1j * theta_d / k)
    evals, q = np.linalg.eig(su)
    log_angles = np.angle(evals)

    ms = np.arange(M, dtype=float) / M
    qinv = np.linalg.inv(q)
    su_steps = (q * np.exp(-1j * np.outer(ms, log_angles))[:, None, :]) @ qinv
    det_steps = np.exp(-1j * theta_d / k * ms)
    out = g @ (su_steps * det_steps[:, None, None])

    theta_total = S.align_phase + theta_acc + theta_d
    w = int(np.round(-theta_total / (2.0 * np.pi)))
    winding = [w] + [0] * (k - 1)

    diffs = np.linalg.norm(out - np.roll(out, 1, axis=0), axis=(1, 2))
    residual = float(diffs.max())
    if residual > budget:
        j = int(diffs.argmax())
        raise ClosureDefect(f"frame jump {residual:.3e} at sample {j} "
                            f"exceeds budget {budget:.3e}", residual, budget)
    closure = float(np.linalg.norm(out[0] - out[-1]))
    return SubspaceField(out, S.exceptional, winding, closure, budget,
                         theta_total)


def to_analytic_frame(S, N=None, tol=1e-8):
    """Trigonometric-polynomial frame from an aligned, closed field."""
    if S.closure_residual is None:
        raise ValueError("field must be phase_aligned before extracting a frame")
    if S.cont_budget is not None and S.closure_residual > S.cont_budget:
        raise ValueError("field does not close; no analytic frame exists")
    M, d, k = S.frames.shape
    if N is None:
        N = M // 4
    coeffs = np.fft.fft(S.frames, axis=0) / M
    freqs = np.rint(np.fft.fftfreq(M, d=1.0 / M)).astype(int)
    keep = np.abs(freqs) <= N
    total = float((np.abs(coeffs) ** 2).sum())
    dropped = float((np.abs(coeffs[~keep]) ** 2).sum())
    # summing the excluded mass directly avoids the sqrt(eps) cancellation
    # floor of total-minus-kept
    tail = np.sqrt(dropped / total) if total > 0 else 0.0
    if tail > tol:
        raise TailTooFat(tail, f"frame spectrum tail {tail:.3e} exceeds {tol:.1e}")
    rows = []
    for i in range(d):
        row = []
        for j in range(k):
            terms = {int(f): coeffs[m, i, j]
                     for m, f in enumerate(freqs) if keep[m]}
            row.append(TrigPoly.from_dict(terms))
        rows.append(row)
    return MatrixFunction(rows)


def _default_field_grid(F):
    from .trigpoly import default_grid_size

    return max(128, default_grid_size(F.degree))
