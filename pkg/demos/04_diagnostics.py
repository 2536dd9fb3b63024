# %% [markdown]
# # How much does swapping expectation and minimization cost?
#
# `E[min_x f]` and `min_x E[f]` differ in general. The gap is bounded by a
# Lipschitz constant of `f` in `x` times the average distance between the
# per-sample minimizers and the minimizer of the mean. The constant is
# estimated by sampling, so the bound is empirical.

# %%
from pcopt import builtin
from pcopt.diagnostics import convexity_probe, interchange_gap_bound
from pcopt.expressions import parse_expr
from pcopt.orthopoly import Basis, PolynomialFamily
from pcopt.problem import parse_problem
from pcopt.quadrature import gauss_rule
from pcopt.solver import classify_stationary_point
from pcopt.transform import default_rule, transform

H = PolynomialFamily.HERMITE


def one_dim(objective):
    return parse_problem(f"[decision]\nx\n[random]\nlambda ~ normal(0, 1)\n[objective]\nminimize {objective}\n")


cases = {
    "additive noise (x-3)^2 + lambda": one_dim("(x - 3)^2 + lambda"),
    "shifted square (x-lambda)^2": one_dim("(x - lambda)^2"),
    "random curvature": builtin.quadratic_problem(),
}
for name, prob in cases.items():
    rep = interchange_gap_bound(prob, gauss_rule(H, 6), [0.0])
    print(f"{name:34s} gap {rep.observed_gap:.4f} <= bound {rep.bound:.4f} (L = {rep.lipschitz_L:.3f})")

# %% [markdown]
# Convex objectives stay convex in the coefficients.

# %%
for name, prob in cases.items():
    basis = Basis((H,), 3)
    dp = transform(prob, basis, default_rule(basis))
    count, worst = convexity_probe(dp.F, dp.dim, trials=1000)
    print(f"{name:34s} violations {count}, worst excess {worst:.1e}")

# %% [markdown]
# A stationary point of a Lagrangian is a saddle in the joint
# (variable, multiplier) space whenever the constraint gradient is nonzero.

# %%
print(classify_stationary_point(parse_expr("x^2"), parse_expr("x - 1"), 1.0, -2.0).value)
print(classify_stationary_point(parse_expr("x^4"), parse_expr("x - 1"), 1.0, -4.0).value)
