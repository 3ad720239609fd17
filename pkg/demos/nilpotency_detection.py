"""Detect finite-step vanishing of analytic cocycles.

A cocycle can have every sample matrix nonzero and still kill every vector
after finitely many steps, because the rotation feeds each matrix a different
point of the torus. The detector bounds how far it has to look by the maximal
rank of the generator and certifies the verdict with the coefficient norm of
the exact iterate.
"""

import numpy as np

from cocycles import detect_nilpotency, iterate, rank_profile
from cocycles import fixtures as fx

for name, C in [("3x3 variable rank", fx.nilpotent_3x3_variable_rank()),
                ("4x4 variable rank 2", fx.nilpotent_4x4_variable_rank2())]:
    rep = detect_nilpotency(C)
    prof = rank_profile(C)
    print(name)
    print("  iterate ranks:", prof.ranks)
    print("  nilpotent:", rep.nilpotent, " degree:", rep.degree)
    print("  certificate %.3e of scale %.3e" % (rep.witness["certificate"],
                                                rep.witness["scale"]))
    a3 = iterate(C, rep.degree)
    print("  exact coefficient mass of the vanishing iterate:",
          a3.max_coeff())
    print()

# a seeded synthetic: unitary conjugation of a strictly upper generator
C = fx.random_nilpotent(7)
rep = detect_nilpotency(C)
print("random seed 7: dim", C.dim, " degree", rep.degree)

# an invertible cocycle is reported non-nilpotent with a sample witness
C = fx.random_invertible(0)
rep = detect_nilpotency(C)
print("random invertible: nilpotent =", rep.nilpotent,
      " witness sample norm %.3f at x = %.4f"
      % (rep.witness["max_sample_norm"], rep.witness["at"]))
