"""Minsum location with gauge distances: solvers, certificates, geometry."""

from .errors import (
    CertificateError,
    DimensionMismatchError,
    EmptyInstanceError,
    GaugeDefinitionError,
    InputError,
    NonattainmentSuspected,
    PreconditionError,
    SetDefinitionError,
)
from .euclid import (
    EuclidInstance,
    FlatPointVerdict,
    Multiplicity,
    directional_derivative,
    euclid_optimal,
    euclid_optimal_report,
    flat_case_test,
    flat_point_absorbed_test,
    minkowski_cap_membership,
    multiplicity_classify,
)
from .ftcore import (
    Certificate,
    CertificateReport,
    Instance,
    SiteSpec,
    Solution,
    certify_heron,
    certify_points,
    certify_sets,
    find_certificate,
    instance,
    objective_eval,
    objective_many,
    point_instance,
    solve,
)
from .gauge import (
    Gauge,
    HPolytope,
    NormingFunctionals,
    ShiftedEllipsoid,
    VPolytope,
    asymmetry_witness,
    ball_facets,
    ball_vertices,
    euclidean_gauge,
    gauge_eval,
    gauge_eval_many,
    gauge_opposite,
    gauge_polar_eval,
    is_symmetric,
    l1_gauge,
    linf_gauge,
    lipschitz_bound,
    norming_functionals,
    scale_gauge,
)
from .geometry2d import (
    NormReport,
    Polygon,
    dseg_contains,
    dseg_polygon,
    ft_locus_polygon,
    norm_characterization_report,
    point_to_polygon_distance,
    polygon_contains,
    polygon_hausdorff,
    sublevel_polygon,
    triangle_equality_face,
    verify_extreme_point_form,
)
from .oracle import (
    GridResult,
    GridSpec,
    argmin_set_matches,
    default_grid_spec,
    grid_minimize,
    instance_lipschitz,
)
from .sets import (
    AffineFlat,
    ConvexSet,
    Distance,
    EuclideanBall,
    Singleton,
    SupportValue,
    VPolytopeSet,
    contains,
    dist_many,
    dist_subdifferential_contains,
    euclidean_project,
    normal_cone_contains,
    segment,
    set_distance,
    support_value,
)

__version__ = "0.1.0"
