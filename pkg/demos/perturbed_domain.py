"""Continue the 2-zone solution from the annulus to a domain with a wavy outer boundary."""
import numpy as np

from nodal_annulus import (AnnulusSpec, DeformationSpec, PolarGrid, morse_index_2d, morse_index_at,
                           newton_solve, nodal_count_2d, safety_bound, shoot_nodal)

spec = AnnulusSpec(1.0, 2.0, 2)
radial = shoot_nodal(spec, 3.0, 2)
deform = DeformationSpec.one_mode(1.0, 2.0, 2, 0.1)
grid = PolarGrid(1.0, 2.0, 64, 64)
print(f"admissible |t| up to {safety_bound(deform):.3f}")

v0 = radial.shape_at(grid.radii)[:, None]
for t in (0.01, 0.02, 0.05, 0.1):
    sol = newton_solve(radial, deform, grid, t)
    dist = np.max(np.abs(sol.shape - v0))
    print(f"t={t:5.2f}  newton {sol.newton_iterations}  residual {sol.residual_norm:.1e}  "
          f"zones {nodal_count_2d(sol)}  |v_t - v|/t = {dist / t:.4f}")

print("Morse index at t = 0.1:", morse_index_2d(sol),
      "  radial formula:", morse_index_at(spec, 3.0, 2).morse_index)
