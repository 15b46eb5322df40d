"""Sloshing eigenvalues of vertical-wall containers and the sharp
isoperimetric bounds they obey."""

from .geometry import (
    Shape,
    ShapeSpec,
    SymmetryReport,
    TriMesh,
    build_shape,
    check_symmetry,
    load_shape_spec,
    refine,
    save_mesh,
    spec_from_dict,
    triangulate,
)
from .fem import (
    DEFAULT_SEED,
    ExtrapolationResult,
    NoConvergenceError,
    SparseSym,
    Spectrum,
    ZeroAfterDeflationError,
    assemble,
    extrapolate,
    neumann_eigs,
    rayleigh_quotient,
)
from .sloshing import (
    DepthSpec,
    PhysicalContext,
    angular_frequency,
    depth_curve,
    nu_from_angular_frequency,
    slosh_eig,
)
from .inequalities import (
    BesselConstant,
    InequalityReport,
    bessel_constant,
    bounds,
    estimate_mu1,
    evaluate,
    j1prime_zero,
    reports_from_csv,
    reports_to_csv,
    sweep_family,
)
from .troesch import (
    RadialBasin,
    RadialSpectrum,
    TroeschReport,
    load_tabulated_basin,
    parabolic_basin,
    radial_slosh_eig,
    troesch_bound,
    verify_troesch,
)

__version__ = "0.1.0"
