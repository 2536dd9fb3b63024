# %% [markdown]
# # Scheduling under a random load threshold
#
# Three work tasks (load 3) and three rest tasks (load -1) share ten time
# slots. Fractions `x[i, j]` of each task go into each slot, every task can
# be done at most once, rest is capped by the threshold `beta`, and so is
# the net load in each slot. `beta ~ N(1, 0.2^2)`. We maximize the total
# reward.
#
# With the constraints only enforced on average the higher-order
# coefficients of an LP are undetermined. Enforcing them at every
# quadrature node (collocation) lets the schedule follow `beta`.

# %%
import numpy as np

from pcopt import builtin
from pcopt.runs import compare, format_comparison, run_mc, run_pc

inst = builtin.scheduling_instance()
prog = inst.program
print(f"{prog.d} variables, {prog.m} inequality rows")
metrics = inst.metric_weights()

# %% [markdown]
# Order 4 with five nodes: as many nodes as basis terms, so the nodal
# optima are interpolated exactly.

# %%
pc = run_pc(prog, 4, quad=5, mode="collocation", metrics=metrics).report
print("converged:", pc.converged, "| KKT:", pc.kkt)
for name, s in pc.summaries.items():
    print(f"PC {name}: mean {s['mean']:.2%}, std {s['std']:.2%}")

# %%
mc, raw = run_mc(prog, 300, seed=0, start=np.zeros(prog.d), metrics=metrics)
print(format_comparison(compare(pc, mc)[-2:], title="PC vs MC (300 samples)"))

# %% [markdown]
# Each sampled LP has a closed-form optimum: rest usage `min(1, beta)`,
# work `min(1, (10 beta + 3 rest) / 9)`.

# %%
beta = raw.params[:, 0]
rest = np.minimum(1.0, beta)
work = np.minimum(1.0, (10 * beta + 3 * rest) / 9)
print("max deviation, work:", np.abs(raw.optima @ metrics["task_completion"] - work).max())
print("max deviation, rest:", np.abs(raw.optima @ metrics["rest_usage"] - rest).max())
