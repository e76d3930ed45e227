"""The stochastic backtracking-Armijo search and the l1 proximal step.

The line search sees only the current mini-batch: it returns the largest
step eta0 * shrink^j meeting the Armijo sufficient-decrease test, falls back
to the last tried step when that still reduced the batch objective, and
returns the 0.0 sentinel otherwise. The proximal step is a coordinatewise
soft-threshold that owns the l1 term entirely.
"""

import numpy as np

from saag import (ObjectiveSpec, Regularizer, SBASParams, batch_grad,
                  batch_smooth_value, make_synthetic, prox, sbas)

data = make_synthetic(40, 6, seed=1)
spec = ObjectiveSpec("logistic", Regularizer(lambda2=1e-3), data)
params = SBASParams()  # alpha=0.1, shrink=0.5, eta0=1.0, 10 backtracks
rng = np.random.default_rng(0)

# ------------------------------------------------ accepted steps on batches
print("line search along the batch gradient:")
w = rng.standard_normal(6)
for trial in range(4):
    batch = np.sort(rng.choice(40, size=8, replace=False))
    direction = batch_grad(spec, w, batch)
    f_batch = lambda v, b=batch: batch_smooth_value(spec, v, b)
    eta, evals = sbas(params, f_batch, w, direction)
    drop = f_batch(w) - f_batch(w - eta * direction)
    print(f"  batch {trial}: eta = {eta:<8g} f_B drop = {drop:.3e} "
          f"({evals} evaluations)")

# ------------------------------------------------------- the 0.0 sentinel
# along an ascent direction no trial step can reduce the batch objective
quad = lambda v: 0.5 * float(v @ v)
eta, evals = sbas(params, quad, np.array([1.0]), np.array([-1.0]))
print(f"\nascent direction: eta = {eta} after {evals} evaluations (sentinel)")

# ------------------------------------------------------------- prox step
reg = Regularizer(lambda2=1e-3, lambda1=0.5)
z = np.array([2.0, -0.3, 0.0, 1.1, -4.0])
print("\nsoft-threshold with eta*lambda1 = 0.5:")
print("  z      =", z)
print("  prox z =", prox(z, 1.0, reg))
print("entries inside the threshold band collapse to exactly zero,")
print("which is where elastic-net runs get their sparsity from")
