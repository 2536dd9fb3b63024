# %% [markdown]
# # Four equilibria of a shifted Himmelblau function
#
# `f = (x1^2 + x2 - 11 + 2 lambda)^2 + (x1 + x2^2 - 7)^2`, `lambda ~ N(0, 1)`.
# Without the shift there are four minima. A local solver finds each one
# from a start in its basin; with the shift, each minimum becomes a
# random point whose mean and spread we estimate two ways.

# %%
import numpy as np

from pcopt import builtin
from pcopt.runs import compare, format_comparison, run_mc, run_pc
from pcopt.solver import SolveOptions, solve
from pcopt.transform import fixed_parameter_problem

det = fixed_parameter_problem(builtin.himmelblau_deterministic(), [])
for start in builtin.HIMMELBLAU_STARTS:
    x = solve(det, SolveOptions(initial_point=np.array(start))).a_star
    print(f"start {start} -> ({x[0]: .4f}, {x[1]: .4f})")

# %% [markdown]
# The cost surface on `[-5, 5]^2`, ready for any plotting tool.

# %%
grid = builtin.himmelblau_grid(101)
print(grid.shape, "lowest grid value", grid[:, 2].min())

# %% [markdown]
# Order-1 expansions per equilibrium next to 500 Monte Carlo samples.
# Equilibrium 1 has the largest spread in `x1`, where the linear
# expansion is least accurate.

# %%
prob = builtin.himmelblau_problem()
for i, start in enumerate(builtin.HIMMELBLAU_STARTS, start=1):
    pc = run_pc(prob, 1, start=start).report
    mc, _ = run_mc(prob, 500, seed=i, start=start)
    print(format_comparison(compare(pc, mc), title=f"equilibrium {i}"))
    print()
