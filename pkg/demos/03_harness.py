# %% [markdown]
# # Run specs, trajectories and comparison tables
#
# The harness wraps the solvers in TOML-describable runs. Every run writes a
# CSV trajectory and a JSON report; several runs on one problem make a
# comparison table.

# %%
import tempfile
from pathlib import Path

import numpy as np

from vicond import RunSpec, compare_runs, parse_run_spec, run_experiment

out = Path(tempfile.mkdtemp(prefix="vicond-demo-"))

spec = parse_run_spec("""
algorithm = "F"
variant = 2
normal_u = "unit"
normal_v = "unit"
trajectory = "f2.csv"
report = "f2.json"
""")
report = run_experiment(spec, out_dir=out)
print(report.termination, report.iterations, report.final_distance)
print((out / "f2.csv").read_text().splitlines()[:3])

# %% [markdown]
# ## An inline problem
#
# Any box, ball, halfspace or polyhedron with an affine operator can be
# described directly in the spec.

# %%
box = parse_run_spec("""
algorithm = "B"
variant = 2
x0 = [1.0, 1.0]

[problem]
name = "box"
set = { type = "box", lo = [-1, -1], hi = [1, 1] }
operator = { A = [[4, 3], [-3, 4]], b = [-1, 2], lipschitz = 5 }
""")
r = run_experiment(box)
print(r.termination, r.final_x, "exact:", np.linalg.solve([[4, 3], [-3, 4]], [1, -2]))

# %% [markdown]
# ## Comparing variants with and without normal vectors

# %%
specs = [RunSpec(algorithm=a, variant=v, normal_u=n, normal_v=n, max_iters=200)
         for a in "BF" for v in (2, 3) for n in ("zero", "unit")]
table = compare_runs(specs, table_path="table.csv", out_dir=out, workers=2)
for row in table:
    print(f"{row.label:<22}{row.termination:<12}{row.iterations:>5}{row.final_distance:>12.3g}")
print("table written to", out / "table.csv")
