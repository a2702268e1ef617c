"""degeig: eigenvalues of -div(|x|^alpha grad u) = lambda g(x) u on truncated domains.

The positive spectrum of the degenerate pencil is computed by successive
constrained Rayleigh-quotient minimization with energy-orthogonal deflation,
cross-checked against a dense congruence solver and an independent shooting
oracle, and supported by numerical verification of the weighted Hardy,
Sobolev, and interpolation inequalities the method rests on.
"""

from .assembly import (DiscreteOperatorPair, assemble_grid3d, assemble_radial,
                       energy_inner, hardy_inner, lp_norm, mass_inner)
from .config import ConfigError, PRESETS, load_config, load_preset
from .eigensolve import (EigenSequence, SolverSettings, growth_diagnostics,
                         residual, solve_dense, solve_successive)
from .inequalities import (CknParams, check_ckn_radial, check_hardy,
                           check_sobolev, critical_exponent, hardy_constant)
from .mesh import Grid3D, RadialMesh, build_grid3d, build_radial_mesh
from .oracle import ShootingResult, shoot, shooting_eigenvalue
from .weights import (WeightSpec, borderline_log, borderline_log_value,
                      compact_bump, gaussian_bump, indicator_ball, power_weight,
                      sign_changing_ring, tabulated, verify_weight_split,
                      weight_split, weight_value)

__version__ = "0.1.0"
