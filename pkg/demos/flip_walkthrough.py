"""Flip an arc of the once-punctured torus and watch QP mutation follow.

The triangulation side performs the flip combinatorially; the algebra
side premutates the quiver with potential at the matching vertex, cancels
the degree-2 part, and transports the result back along an arrow renaming
and a right equivalence.  The final comparison is exact, coefficient by
coefficient, up to the truncation order.

Run with:  python3 demos/flip_walkthrough.py
"""

from fractions import Fraction

from qpsurf.qp_mutation import verify_flip_compatibility
from qpsurf.surface import build_quiver, flip, once_punctured_torus

tau = once_punctured_torus()
tq = build_quiver(tau)
print("triangles:", list(tau.triangles))
print("arrows:")
for a in tq.quiver.arrows:
    print("  %s: %r -> %r" % (a.name, a.tail, a.head))

sigma = flip(tau, 1)
print()
print("after flipping arc 1:", list(sigma.triangles))

# One weighted puncture cycle, power n = 1, coefficient x = -1/3, at the
# default headroom degree for that data.
x, n, degree = Fraction(-1, 3), 1, 18
print()
print("checking flip/mutation compatibility at arc 1, x=%s, n=%d, D=%d" % (x, n, degree))
report = verify_flip_compatibility(tau, 1, x, n, degree)
for line in report.summary_lines():
    print("  " + line)
print("compatible:", report.ok)
