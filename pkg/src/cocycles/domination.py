"""Splitting a partially degenerate cocycle along its stable kernel bundle.

When the rank profile stabilizes at 0 < k < d, the kernel of A_p is an
invariant analytic subbundle carrying all the divergent directions.  In an
adapted unitary frame the cocycle becomes [[a, b], [0, d]] with a nilpotent
and d generically invertible; whether the coupling b can be conjugated away
entirely is exactly the question of dominated splitting, decided here by two
independent criteria that must agree.
"""

from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle, iterate, rank_profile
from .errors import (
    FullyNilpotent,
    InversionBlowup,
    NoInfinitePart,
    NotDominated,
    StructureViolation,
    TailTooFat,
    UnsupportedBase,
)
from .frames import kernel_field, orthocomplement
from .matfun import MatrixFunction, hstack, poly_det, vstack
from .normalform import _analytic_gauge, _poly_from_samples, _shift_samples
from .trigpoly import default_grid_size


@dataclass
class SplitForm:
    """Adapted frame U*(x+a) A(x) U(x) = [[a, b], [0, d]].

    The first d-k columns of U span ker A_p; a is nilpotent of degree at
    most p and d is invertible off finitely many samples.
    """

    cocycle: Cocycle
    k: int
    p: int
    U: MatrixFunction
    a: MatrixFunction
    b: MatrixFunction
    d: MatrixFunction
    residual: float


@dataclass
class SplittingResult:
    dominated: bool
    M: MatrixFunction
    C: MatrixFunction
    gap_certificate: dict
    residual: float


def split_infinite_part(C, M=None, tol=1e-9):
    """Adapted frame separating the divergent directions from the finite ones.

    Needs the rank profile to stabilize at some 0 < k < d; the kernel bundle
    of A_p then has constant dimension d-k and the complementary block d
    carries the k finite exponents.
    """
    if C.base_dim != 1:
        raise UnsupportedBase("splitting needs a one-frequency base")
    prof = rank_profile(C, tol=tol)
    k = prof.min_rank
    if prof.stabilized_at is None:
        raise NoInfinitePart("rank profile still falling; no stable kernel bundle")
    if k == C.dim:
        raise NoInfinitePart("cocycle keeps full rank; every exponent is finite")
    if k == 0:
        raise FullyNilpotent("all exponents degenerate; use the normal forms")
    p = prof.ranks.index(k) + 1
    d = C.dim
    nk = d - k
    if M is None:
        base = max(256, default_grid_size(C.matrix.degree * p))
        grids = [base, 2 * base, 4 * base, 8 * base]
    else:
        grids = [M]
    err = None
    for Mg in grids:
        ker = kernel_field(iterate(C, p), Mg, tol)
        if ker.k != nk:
            raise StructureViolation(
                f"kernel of iterate {p} has dimension {ker.k}, expected {nk}"
            )
        fields = [ker, orthocomplement(ker)]
        try:
            blocks = [_poly_from_samples(_analytic_gauge(S), tol=1e-9) for S in fields]
        except TailTooFat as exc:
            err = exc
            continue
        break
    else:
        raise err
    U = hstack(blocks)
    B = U.adjoint().translate(C.alpha) @ C.matrix @ U
    a = B.block(0, nk, 0, nk)
    b = B.block(0, nk, nk, d)
    dd = B.block(nk, d, nk, d)
    low = B.block(nk, d, 0, nk)
    Mv = 2 * Mg
    usamp = U.sample_grid(Mv)
    gram = np.conj(np.swapaxes(usamp, 1, 2)) @ usamp
    unit_defect = float(np.abs(gram - np.eye(d)).max())
    low_mass = float(np.abs(low.sample_grid(Mv)).max()) if nk and k else 0.0
    # invariance forces the kernel block to die by step p
    ap = a
    for j in range(1, p):
        ap = a.translate(j * C.alpha) @ ap
    scale = max(a.sup_bound(), 1.0)
    ap_mass = float(np.abs(ap.sample_grid(Mv)).max()) / scale ** p
    if ap_mass > 1e-6:
        raise StructureViolation(
            f"kernel block is not nilpotent of degree {p}: |a_p| = {ap_mass:.3e}"
        )
    if poly_det(dd).is_zero:
        raise StructureViolation("finite block degenerates identically")
    residual = max(unit_defect, low_mass, ap_mass)
    return SplitForm(C, k, p, U, a, b, dd, residual)


def is_dominated(S, C=None, tol=1e-9):
    """Decide domination by the iterate-rank and block-determinant criteria.

    Both quantities are compared against tol times their own geometric mean
    over the grid, which makes the test scale covariant; the two verdicts
    must agree and the minimizing sample is reported as evidence.
    """
    if C is None:
        C = S.cocycle
    k, p, d = S.k, S.p, C.dim
    nstar = max(p + 1, d - k)
    F = iterate(C, nstar)
    Mg = max(256, default_grid_size(F.degree))
    sv = np.linalg.svd(F.sample_grid(Mg), compute_uv=False)
    sk = sv[:, k - 1]
    gm_rank = float(np.exp(np.log(np.maximum(sk, 1e-300)).mean()))
    rank_ok = bool(sk.min() > tol * gm_rank)
    dsamp = S.d.sample_grid(Mg)
    dets = np.abs(np.linalg.det(dsamp))
    gm_det = float(np.exp(np.log(np.maximum(dets, 1e-300)).mean()))
    det_ok = bool(dets.min() > tol * gm_det)
    if rank_ok != det_ok:
        raise StructureViolation(
            f"domination criteria disagree: rank says {rank_ok}, det says {det_ok}"
        )
    j = int(dets.argmin())
    evidence = {
        "n_star": nstar,
        "sigma_k_min": float(sk.min()),
        "sigma_k_scale": gm_rank,
        "det_min": float(dets.min()),
        "det_scale": gm_det,
        "minimizer": j / Mg,
        "minimizer_sample": j,
    }
    return {"dominated": rank_ok, "evidence": evidence}


def dominated_splitting(S, tol=1e-9):
    """Conjugate the coupling away: p steps of the block recursion.

    Starting from c = b, each step divides by the invertible block one
    translate back and feeds the result through a; nilpotency of a kills c
    after exactly p steps and the accumulated M solves
    a(x) M(x) + b(x) = M(x+alpha) d(x), so [[I, M], [0, I]] block-diagonalizes
    the split form.
    """
    C = S.cocycle
    verdict = is_dominated(S, C, tol)
    if not verdict["dominated"]:
        raise NotDominated(
            f"finite block vanishes near x = {verdict['evidence']['minimizer']:.6f}"
        )
    k, p = S.k, S.p
    nk = S.a.rows
    deg = max(S.a.degree, S.b.degree, S.d.degree, 1)
    Mg = max(512, default_grid_size(4 * deg))
    dshift = S.d.sample_grid(Mg, shift=-C.alpha)
    conds = np.linalg.cond(dshift)
    if float(conds.max()) > 1.0 / tol:
        raise InversionBlowup(
            f"finite block condition number {conds.max():.3e} exceeds 1/tol"
        )
    dinv_shift = np.linalg.inv(dshift)
    asamp = S.a.sample_grid(Mg)
    csamp = S.b.sample_grid(Mg)
    msum = np.zeros((Mg, nk, k), dtype=complex)
    for _ in range(p):
        mn = _shift_samples(csamp, -C.alpha) @ dinv_shift
        msum = msum + mn
        csamp = asamp @ mn
    cp_mass = float(np.abs(csamp).max())
    mfun = _poly_from_samples(msum, tol=1e-6)
    Mv = 2 * Mg
    msamp = mfun.sample_grid(Mv)
    mshift = mfun.sample_grid(Mv, shift=C.alpha)
    off = S.a.sample_grid(Mv) @ msamp + S.b.sample_grid(Mv) - mshift @ S.d.sample_grid(Mv)
    residual = max(cp_mass, float(np.abs(off).max()))
    zero_tr = MatrixFunction.zero(nk, k)
    zero_bl = MatrixFunction.zero(k, nk)
    cdiag = vstack([hstack([S.a, zero_tr]), hstack([zero_bl, S.d])])
    bfull = Cocycle(C.frequencies, vstack([hstack([S.a, S.b]),
                                           hstack([zero_bl, S.d])]))
    cert = {}
    for n in range(1, 3 * p + 1):
        F = iterate(bfull, n)
        sv = np.linalg.svd(
            F.sample_grid(max(256, default_grid_size(F.degree))), compute_uv=False
        )
        # ratios saturate at 1/eps once the lower part is degenerate to noise
        floor = np.finfo(float).eps * sv[:, 0]
        cert[n] = float((sv[:, k - 1] / np.maximum(sv[:, k], floor)).min())
    return SplittingResult(True, mfun, cdiag, cert, residual)
