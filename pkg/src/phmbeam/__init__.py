"""phmbeam: kinetic beam schemes for the perfectly hyperbolic Maxwell system.

Solvers: Beam-ET (exact transport), Beam-CTU (corner transport upwind) and
a dimension-split FVS reference on Cartesian grids; Beam-U and FVS-U on
unstructured meshes; a Yee FDTD baseline. A scenario library reproduces
the plane-wave convergence, current-pulse, antenna, sphere-scattering and
charge-conservation test cases at desk scale.
"""

from .em import (
    EX, EY, EZ, BX, BY, BZ, PHI, PSI, NCOMP,
    EmError, PhmParams, SourceDensities, WaveConfig,
    analytic_plane_wave, eigensystem_a1, flux, flux_normal, jacobian,
    jacobian_normal, rotate_to_global, rotate_to_local, source_eval,
)
from .kinetic import (
    KineticError, Lattice, RelaxationPolicy,
    collide, equilibrium, flux_moments, moments, omega_from_tau,
    smoothness_omega, tau_effective,
)

__version__ = "0.1.0"
