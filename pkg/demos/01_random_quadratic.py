# %% [markdown]
# # A quadratic with a random curvature
#
# Minimize `(1 + lambda) x^2 + x` where `lambda ~ N(0, 0.1^2)`. For every
# fixed `lambda` the minimizer is `-1 / (2 (1 + lambda))`, so the random
# optimum has a mean and spread we can check directly.

# %%
import numpy as np

from pcopt import builtin
from pcopt.orthopoly import Basis, PolynomialFamily
from pcopt.pce import Expansion, moments
from pcopt.quadrature import gauss_rule
from pcopt.runs import run_mc
from pcopt.solver import minimize_unconstrained
from pcopt.transform import default_rule, transform

prob = builtin.quadratic_problem()
print(prob.to_text())

# %% [markdown]
# Expand `x(xi) = a0 + a1 psi1(xi) + a2 psi2(xi)` in orthonormal Hermite
# polynomials and integrate the objective over `xi` with a Gauss rule. The
# result is an ordinary function of the three coefficients.

# %%
basis = Basis((PolynomialFamily.HERMITE,), 2)
rule = default_rule(basis)  # 2r + 2 = 6 nodes
dp = transform(prob, basis, rule)
print("F(1, 1, 0) =", dp.F(np.array([1.0, 1.0, 0.0])))

res = minimize_unconstrained(dp.F, dp.grad_F, np.zeros(3))
print("coefficients:", res.a_star, "after", res.iterations, "BFGS iterations")

# %% [markdown]
# Mean and standard deviation read straight off the coefficients:
# `a0` and `sqrt(a1^2 + a2^2)`.

# %%
exp = Expansion.from_vector(basis, res.a_star, 1)
m = moments(exp, gauss_rule(PolynomialFamily.HERMITE, 8))
print(f"PC mean {m.mean[0]:.4f}, std {m.std[0]:.4f}")

# %% [markdown]
# Monte Carlo: draw `lambda`, solve each deterministic problem, average.

# %%
mc, raw = run_mc(prob, 1000, seed=0, start=[0.0])
print(f"MC mean {mc.mean[0]:.4f}, std {mc.std[0]:.4f}")
closed = -1.0 / (2.0 * (1.0 + raw.params[:, 0]))
print("largest per-sample deviation from the closed form:", np.abs(raw.optima[:, 0] - closed).max())

# %% [markdown]
# Raising the order drives the PC mean onto the exact mean of the random
# optimum, computed here with a 64-node rule.

# %%
xi, w = np.polynomial.hermite_e.hermegauss(64)
exact = np.sum(w * -1.0 / (2.0 * (1.0 + 0.1 * xi))) / w.sum()
for r in (1, 2, 4, 6):
    b = Basis((PolynomialFamily.HERMITE,), r)
    dp_r = transform(prob, b, default_rule(b))
    sol = minimize_unconstrained(dp_r.F, dp_r.grad_F, np.zeros(r + 1))
    print(f"r = {r}: |mean error| = {abs(sol.a_star[0] - exact):.2e}")
