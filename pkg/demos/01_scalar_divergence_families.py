"""
Scalar divergence families and their branch structure
=====================================================

Walks the three families on the positive half-line: the asymmetric
two-parameter family, its symmetric counterpart, and the one-parameter
family, showing branch dispatch, the symmetrization identity, homogeneity,
and continuity across the singular parameter lines.
"""

import numpy as np

from abkernels import (
    DivergenceSpec,
    ab_divergence,
    abs_divergence,
    branch_select,
    dt_squared,
    symmetrize_type1,
)

# Branch selection is purely a function of (alpha, beta): the generic
# product form, two log branches, the skew pair alpha = -beta, and the
# fully degenerate origin.
for alpha, beta in [(1, 1), (1, 0), (0, 2), (1.5, -1.5), (0, 0)]:
    print(f"(alpha={alpha}, beta={beta}) -> {branch_select(alpha, beta).value}")

# A few closed-form values.  The symmetric family at (1, 1) is the squared
# difference; at (1/2, 1/2) four times the squared Hellinger affinity gap.
print("\nabs(1,1)     at (2,1):", abs_divergence(1, 1, 2, 1))
print("abs(1/2,1/2) at (4,1):", abs_divergence(0.5, 0.5, 4, 1))
print("dt(t=1/2)    at (4,1):", dt_squared(0.5, 4, 1))

# The symmetric family is exactly the sum of both orientations of the
# asymmetric one (the type-1 construction) away from the singular lines.
a, b, x, y = 1.3, -0.4, 2.0, 0.7
print("\ntype-1 identity:",
      abs_divergence(a, b, x, y), "==",
      2 * symmetrize_type1(a, b, x, y))

# Scaling both arguments by c scales the divergence by c^(alpha+beta); the
# one-parameter family scales by c^(2t).
c = 3.0
print("\nhomogeneity degree alpha+beta:",
      abs_divergence(a, b, c * x, c * y) / abs_divergence(a, b, x, y),
      "== c^(a+b) =", c ** (a + b))

# Evaluation is continuous in the parameters across each singular line.
for beta_near in (1e-2, 1e-5, 1e-7):
    print(f"abs(1.2, {beta_near:g}) ->",
          abs_divergence(1.2, beta_near, 2.4, 0.7),
          "   limit:", abs_divergence(1.2, 0.0, 2.4, 0.7))

# Vectorized evaluation over arrays comes for free.
xs = np.linspace(0.5, 4.0, 8)
print("\nabs(1,1) against y=1 on a grid:", abs_divergence(1, 1, xs, 1.0))

# Every family is available behind one spec type.
spec = DivergenceSpec.dt(-0.5)
print("\nspec", spec.label(), "has homogeneity degree", spec.homogeneity,
      "and value", spec.evaluate(2.0, 1.0), "at (2, 1)")
