"""Move subspaces analytically around the circle.

Kernels and ranges of analytic matrix functions with constant rank form
analytic subbundles. The frames module samples them, transports orthonormal
frames continuously, removes the closing phase obstruction (recording its
integer part as the winding), and converts the result back to an exact
polynomial frame. Fields that genuinely fail to close are rejected.
"""

import numpy as np

from cocycles import fixtures as fx
from cocycles.frames import (
    SubspaceField, field_from_vectors, intersect_field, kernel_field,
    kernel_field_from_samples, orthocomplement, phase_align,
    subspace_distance, sum_field, to_analytic_frame,
)
from cocycles.errors import ClosureDefect

C, _, _ = fx.random_constant_rank_jordan(5)
S = kernel_field(C.matrix, M=256)
print("kernel bundle rank:", S.k, "of dim", S.d)

T = orthocomplement(S)
print("S cap S-perp has dim", intersect_field(S, T).k,
      " S + S-perp has dim", sum_field(S, T).k)

al = phase_align(S)
print("winding:", al.winding, " closure residual %.1e (budget %.1e)"
      % (al.closure_residual, al.cont_budget))

F = to_analytic_frame(al)
resampled = F.sample_grid(S.M)
q = np.linalg.qr(resampled)[0]
print("analytic round trip distance %.1e"
      % subspace_distance(SubspaceField(q), S))

# a frame with a pure phase twist: the alignment unwinds it and records 1
M = 256
x = np.arange(M) / M
vecs = np.zeros((M, 2), dtype=complex)
vecs[:, 0] = np.exp(2j * np.pi * x)
out = phase_align(field_from_vectors(vecs, degree=1))
print("phase loop winding:", out.winding[0])

# a kernel path through a rank-drop corner has no continuous limit there
try:
    phase_align(kernel_field_from_samples(fx.kernel_loop_samples(M=256),
                                          degree=1))
except ClosureDefect as e:
    print("loop through the crossing rejected:", e)
