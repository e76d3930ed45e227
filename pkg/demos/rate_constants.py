"""Linear-rate constants C for the four smoothness / strong-convexity regimes.

Each regime's contraction factor is an exact rational function of the batch
size b, the batch count m, the coupling constant c, and a free analysis
constant beta; convergence is linear whenever C < 1, up to a neighborhood
term driven by batch gradients at the optimum.
"""

from saag import ProblemConstants, RateParams, alpha_b, best_beta
from saag.verify import RegimeError, theoretical_rate

n, b = 1000, 10
m = n // b
print(f"n = {n}, b = {b}, m = {m}, alpha(b) = {alpha_b(n, b)} "
      f"~= {float(alpha_b(n, b)):.6f}\n")

# ------------------------------------------- theorem 1 (smooth, no mu > 0)
print("theorem 1: C as beta grows (smaller beta -> tighter but riskier)")
for beta in (2.0, 5.0, 10.0, 100.0):
    try:
        rep = theoretical_rate(1, RateParams(beta=beta, c=1.0, m=m, b=b, n=n))
        print(f"  beta = {beta:<6g} C = {rep.C:.6f}  contraction: {rep.contraction}")
    except RegimeError as err:
        print(f"  beta = {beta:<6g} invalid: {err}")

# the regime boundary: beta must exceed 1 + 4*alpha(b)
try:
    theoretical_rate(1, RateParams(beta=1.2, c=1.0, m=m, b=b, n=n))
except RegimeError as err:
    print(f"  beta = 1.2    invalid: {err}")

# ------------------------------------- theorems 2 and 4 need L and mu > 0
# contraction needs c*L*beta/(m*mu) < 1, i.e. m large against the condition
# number L/mu and c small
constants = ProblemConstants(L=1.0, mu=0.1)
print("\nstrong-convexity regimes at L = 1, mu = 0.1, c = 0.1:")
for theorem in (2, 4):
    beta, rep = best_beta(theorem, c=0.1, m=m, b=b, n=n, constants=constants)
    print(f"  theorem {theorem}: best beta ~= {beta:.3f} gives C = {rep.C:.6f} "
          f"(contraction: {rep.contraction})")

# ------------------------------------------------------- degenerate limit
rep = theoretical_rate(1, RateParams(beta=2.0, c=1.0, m=1, b=n, n=n))
print(f"\nb = n (full batch): alpha = 0, m = 1 -> C = {rep.C} exactly")
print("the neighborhood constant also vanishes there: full-batch gradients")
print("at the optimum are zero, so the method reduces to plain descent")
