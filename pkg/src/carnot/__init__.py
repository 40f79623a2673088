"""Numerical calculus on Carnot groups.

Group operations, left-invariant derivatives, homogeneous norms, graded
quadrature, Hardy-type Rayleigh quotients, and a degenerate parabolic
solver on the first Heisenberg group.
"""

from .errors import (
    CarnotError,
    DegenerateTestFunctionError,
    EvaluationError,
    InvalidParameterError,
    NotHTypeError,
    OutOfRangeError,
    ResolutionError,
    SingularPointError,
)
from .groups import (
    CarnotGroup,
    GroupKind,
    dilate,
    group_from_json,
    group_to_json,
    homogeneous_dimension,
    inverse,
    make_euclidean,
    make_heisenberg,
    make_htype,
    make_quaternionic_htype,
    multiply,
    origin,
)
from .calculus import (
    FDScheme,
    ScalarField,
    apply_vector_field,
    commutator_apply,
    elementary_inequality_margin,
    frame,
    fundamental_profile,
    fundamental_solution_field,
    hardy_weight,
    homogeneous_norm,
    horizontal_gradient,
    subquadratic_convexity_ratio,
    superquadratic_convexity_ratio,
    infinity_laplacian,
    norm_field,
    norm_gradient,
    norm_gradient_magnitude,
    radial_field,
    random_annulus_points,
    sub_p_laplacian,
)
from .quadrature import (
    AnnularMesh,
    BoxMesh,
    build_annular_mesh,
    build_box_mesh,
    integrate,
    radial_integrate,
    unit_ball_volume,
)
from .hardy import (
    ConcentratingFamilySpec,
    ExtremalFamilySpec,
    PotentialKind,
    PotentialSpec,
    concentrating_profile,
    evaluate_potential,
    extremal_profile,
    hardy_constant,
    make_extremal,
    radial_sharpness_scan,
    radial_sigma_inf_probe,
    random_test_fields,
    rayleigh_parts,
    rayleigh_quotient,
    sharpness_scan,
    sigma_inf_probe,
    sobolev_quotient,
)
from .parabolic import (
    Diagnostics,
    DivergenceError,
    EvolutionConfig,
    EvolutionState,
    GridSpec,
    evolve,
    init_state,
    potential_grid,
    refinement_study,
    stable_dt,
    step,
)
from ._kernels import available_backends, default_backend

__version__ = "0.1.0"
