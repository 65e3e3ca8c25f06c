"""Radial nodal solutions of -Laplace(u) = |u|^(p-1) u on annuli, their
linearized spectra, degeneracy exponents, Morse indices, and continuation
onto deformed annuli."""

from .asymptotics import (LaplaceEigenpair, large_p_bound_check, laplace_radial_eigen,
                          p_to_1_diagnostics)
from .degeneracy import (DegeneracyPoint, DegeneracyScan, MorseReport, admissible_pairs,
                         find_degeneracies, morse_index, morse_index_at, nu_curve,
                         spherical_multiplicity)
from .errors import (BlowUpError, BracketError, ClusteredSpectrumError, ConvergenceError,
                     DegenerateExponentError, DegenerateLinearizationError, FoldError,
                     InconsistentSpectrumError, InvalidPlacementError, SolverError)
from .perturbed import (DeformationSpec, PerturbedSolution, PolarGrid, build_deformation,
                        morse_index_2d, newton_solve, nodal_count_2d, safety_bound,
                        shape_compare)
from .radial import (AnnulusSpec, NehariResult, NodalZoneReport, RadialProfile, Trajectory,
                     integrate_radial_ivp, nehari_minimize, nehari_report, ode_residual,
                     shoot_nodal)
from .spectrum import (AuxiliaryReport, SLPencil, SpectrumSlice, assemble_pencil,
                       auxiliary_diagnostics, eigen_smallest, radial_spectrum, rayleigh,
                       sign_changes, sl_pencil)

__version__ = "0.1.0"
