"""Numerical toolkit for colinear n-body central configurations, spectral
admissibility of the mass-scaled Hessian, and restricted integrable models."""

__version__ = "0.1.0"

from . import errors  # noqa: F401
from .potential import (  # noqa: F401
    COLLISION_FLOOR,
    Configuration,
    HessianW,
    MassVector,
    eval_potential,
    gradient,
    acceleration,
    hessian_w,
    third_contract,
)
from .central import (  # noqa: F401
    CentralConfiguration,
    MassLine3,
    MassLine4,
    euler_quintic,
    mass_line_3body,
    mass_line_4body,
    masses_from_rho,
    moulton_solve,
    normalize_cc,
    positivity_interval,
    solve_masses_4body,
)
from .admissibility import (  # noqa: F401
    SpectrumReport,
    admissible_values,
    admissible_index,
    exceptional_masses,
    exceptional_point,
    eigenvalue_range,
    nontrivial_eigenvalue,
    odd_family_predicate,
    order2_obstruction_3body,
    order2_vanishing_factor,
    order3_obstruction_k9,
    order3_k9_positive_roots,
    planar_spectrum,
    reachable_eigenvalues,
    spectrum_report,
)
from .fourbody import (  # noqa: F401
    PairCandidate,
    TraceSweepResult,
    boundary_maxima,
    classify_pairs,
    condition_count,
    enumerate_pairs,
    feasible_mass_interval,
    order2_exclusion_4body,
    pair_feasibility,
    trace_4body,
    trace_sweep,
)
from .models import (  # noqa: F401
    FIVE_BODY_MASSES,
    CentralForceChart,
    InvariantSubspace,
    NBodyChart,
    PairedOrbitsChart,
    RotatedChart,
    TrajectoryRecord,
    absolute_equilibrium_check,
    check_invariant_subspace,
    central_mass_cancellation_check,
    circular_orbit_state,
    colinear_subspace,
    conic_residual,
    decouple_5body,
    decouple_matrix,
    five_body_midpoints,
    five_body_subspace,
    kepler_period,
    n3_configuration,
    n3_effective_potential,
    n3_masses,
    n3_subspace,
    polygon_alpha,
    polygon_configuration,
    restricted_potential_5body,
    simulate,
)
