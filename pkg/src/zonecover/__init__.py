"""Deep points, covering radii and product maximizers for great-circle arrangements."""

from zonecover.errors import (
    DegenerateOrthogonal,
    DimensionMismatch,
    GridTooCoarse,
    HypothesisNotViolated,
    InsufficientSamples,
    InvalidCount,
    InvalidDimension,
    NoValidStart,
    NotCritical,
    OnHyperplane,
    UncertifiedDimension,
    WrongDimension,
    ZeroVector,
    ZoneCoverError,
)
from zonecover.sphere import (
    Arrangement,
    UnitVector,
    ZoneSet,
    apple_peel,
    circle_distance,
    hyperplane_distance,
    normalize,
    random_arrangement,
)
from zonecover.solver import (
    SolveReport,
    SolverConfig,
    check_theorem,
    log_objective,
    log_objective_gradient,
    objective,
    solve,
)
from zonecover.coverage import (
    CoverReport,
    GridCertificate,
    covering_radius,
    covering_radius_2d_exact,
    default_certificate,
    depth,
    zones_cover,
)
from zonecover.prooflab import (
    ProofTrace,
    TrigPoly,
    build_trace,
    construct_w,
    count_sign_changes,
    critical_identity_residual,
    eval_f,
    find_tangencies,
    fit_trig,
    psi2_residual,
)

__version__ = "0.1.0"
