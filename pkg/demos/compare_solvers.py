"""Benchmark-style comparison of the SAAG solvers against SVRG and VR-SGD.

Builds a synthetic logistic problem, runs each solver with the stochastic
backtracking-Armijo line search, and prints suboptimality / accuracy /
gradient-budget columns per epoch. Writes the full trace CSV next to this
script.
"""

import numpy as np

from saag import (ObjectiveSpec, Regularizer, RunConfig, emit_csv,
                  finalize_suboptimality, make_synthetic, objective_value,
                  reference_optimum, run, split_train_test)

# ----------------------------------------------------------------- problem
# n=500 points, 20 features, separable with a unit margin, 1% label noise
data = make_synthetic(500, 20, seed=0, margin=1.0, flip=0.01)
train, test = split_train_test(data, 0.8, seed=0)
spec = ObjectiveSpec("logistic", Regularizer(lambda2=1e-4), train)
print(f"train n={train.n} d={train.d}, test n={test.n}")

# a high-budget reference run pins F* for the suboptimality axis
reference = reference_optimum(spec, budget=500)
print(f"reference optimum F* = {reference.value:.12f} "
      f"(converged: {reference.converged})\n")

# ------------------------------------------------------------------- runs
solvers = ("saag1", "saag3", "saag4", "svrg", "vrsgd", "sgd")
traces = []
for kind in solvers:
    config = RunConfig(solver=kind, objective=spec, epochs=20, batch_size=16,
                       seed=0)
    _, trace = run(config, test=test)
    traces.append(trace)
fstar = finalize_suboptimality(traces, reference.value)

print(f"{'solver':<8} {'subopt@5':>12} {'subopt@20':>12} {'acc@20':>8} "
      f"{'grads/n':>8} {'seconds':>8}")
for trace in traces:
    p5, p20 = trace.points[5], trace.points[-1]
    print(f"{trace.solver:<8} {p5.suboptimality:12.3e} "
          f"{p20.suboptimality:12.3e} {p20.test_accuracy:8.4f} "
          f"{p20.grads_over_n:8.1f} {p20.wall_seconds:8.3f}")

emit_csv(traces, "compare_solvers.csv",
         metadata=["note: demo comparison on synthetic logistic data"])
print("\nwrote compare_solvers.csv")

# -------------------------------------------------- what the numbers show
# SAAG-III/IV descend fastest per epoch but level off at a noise floor set
# by the biased estimator; SVRG / VR-SGD keep contracting since their
# correction vanishes at the optimum; SGD's decreasing steps trail behind.
init = objective_value(spec, np.zeros(train.d)) - fstar
print(f"initial suboptimality was {init:.3e}")
