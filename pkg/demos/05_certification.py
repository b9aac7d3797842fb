"""Certify every structural property of the computed tables.

Each claim is swept over the grid (bivariate claims on a coarsened mesh)
and reported with its worst signed slack; negative slack beyond the
tolerance would be a violation.
"""

from altsel import (GridSpec, certify_all, certify_figure1,
                    compute_derivatives, compute_thresholds, compute_values)
from altsel.verify import render_text

grid = GridSpec.from_step(1e-3)
vt = compute_values(grid, 50)
tf = compute_thresholds(vt)
dt = compute_derivatives(vt, tf)

reports = certify_all(vt, tf, dt) + [certify_figure1(tf)]
print(render_text(sorted(reports, key=lambda r: r.lemma_id)))
print(f"\n{sum(r.passed for r in reports)}/{len(reports)} claims pass "
      f"at h = {grid.step:g}, horizon {vt.horizon}")
