# %% [markdown]
# # The rotation problem on the quarter disc
#
# ``T`` rotates the plane by -pi/4 about ``(0.5, 1)`` and subtracts the
# identity. It is anti-monotone, ``<T(y) - T(x), y - x> = -|y - x|^2``, so the
# usual monotonicity assumption fails, yet the variational inequality on the
# quarter disc has a single solution on the arc.

# %%
import numpy as np

from vicond import (NormalStrategy, SolverConfig, example31_problem,
                    reference_solution_example31, residual, solve)

P = example31_problem()
xs = reference_solution_example31()
print("x*      =", xs)
print("T(x*)   =", P.op(xs))
print("gamma   =", -P.op(xs) @ xs)          # T(x*) = -gamma x*
print("residual at x* =", residual(P, xs))

# %% [markdown]
# ## Constant-step method with and without normal vectors
#
# The step size must stay below ``1/(L+1) = 1/3``. Feeding unit normals of
# the active constraints into both projections moves the first iterates
# further along the arc.

# %%
x0 = np.array([0.0, 1.0])
for normals in ("zero", "unit"):
    s = NormalStrategy.parse(normals)
    cfg = SolverConfig("cond-ext", beta=0.25, normal_u=s, normal_v=s, max_iters=5)
    r = solve(P, cfg, x0)
    print(f"{normals:>4}: after 5 steps |x - x*| = {r.final_distance:.6f}")

# %%
cfg = SolverConfig("cond-ext", beta=0.25, normal_u=NormalStrategy.unit(),
                   normal_v=NormalStrategy.unit(), tol=1e-8)
r = solve(P, cfg, x0)
d = np.array([t.dist_to_solution for t in r.trajectory])
print(r.termination, "after", r.iterations, "iterations, final distance", d[-1])
print("distance every 10 steps:", np.round(d[::10], 8))
