"""Split a degenerate spectrum with an arbitrarily small perturbation.

All exponents of a nilpotent cocycle sit at -inf. Adding eps * U(x+a)
diag(b) U(x)* in the triangularizing frames makes the cocycle triangular
with constant diagonal eps*b, so the exponents jump to ln(eps |b_j|): finite,
simple, and at gaps chosen in advance.
"""

import numpy as np

from cocycles import lyapunov_spectrum, perturb_simple, triangularize
from cocycles import fixtures as fx

T = triangularize(fx.nilpotent_3x3_variable_rank())
P, predicted = perturb_simple(T, (4.0, 2.0, 1.0), 0.01)

rep = lyapunov_spectrum(P, n=5000, M=64)
print("predicted:", np.round(predicted, 6))
print("measured: ", np.round(rep.exponents, 6))

gaps = -np.diff(rep.exponents)
print("gaps:", np.round(gaps, 6), " target ln 2 =", round(np.log(2), 6))

# smaller eps only shifts the ladder down, the gaps stay at ln|b_j/b_{j+1}|
P2, predicted2 = perturb_simple(T, (4.0, 2.0, 1.0), 1e-6)
rep2 = lyapunov_spectrum(P2, n=5000, M=64)
print("eps = 1e-6 measured gaps:", np.round(-np.diff(rep2.exponents), 6))
