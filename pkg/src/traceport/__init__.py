"""Transport distances between measures, monotone rearrangements on the
line, eigenvalue-map families with their matching distances, and an
intermittent-map almost-sure CLT harness."""

from .chaotic_clt import (
    CLTResult,
    PMParams,
    center_observable,
    clt_experiment,
    invariant_measure_estimate,
    log_weights,
    measure_integral,
    orbit,
    pm_map,
    scaled_birkhoff,
    w1_to_normal,
)
from .errors import DegenerateComputationError, ValidationError
from .matching import (
    bottleneck_distance,
    bottleneck_matching,
    bottleneck_matching_value,
    min_cost_assignment,
    rationalize_weights,
)
from .metric_measure import (
    ArcSpace,
    DiscreteMeasure,
    FiniteMetricSpace,
    GeodesicGraph,
    Measure1D,
    UnitInterval,
    cdf_distance,
    empirical_measure,
    pushforward,
    pushforward_function,
    quantile,
    shortest_path_metric,
    validate_metric,
)
from .nccw import (
    DimensionDropSpec,
    EigenvalueMapFamily,
    EigenvalueProfile,
    RazakSpec,
    StepPlan,
    apply_observable,
    d_diagonal,
    d_w_matrices,
    d_w_profiles,
    dw_sampled,
    expand_multiset,
    gl_profile,
    gl_separation_check,
    intertwining_defect,
    is_eps_dense,
    jiangsu_step,
    lipschitz_battery,
    pushforward_trace,
    simulate_tower,
    wp_diagonal_pair,
)
from .pwlinear import (
    MonotoneCurve,
    PLFunction,
    integrate_abs_power,
    integrate_abs_power_measure,
    integrate_measure,
    sup_abs_diff,
)
from .transport import (
    MonotoneMap,
    TransportWitness,
    arc_pair,
    arc_transport_ratio,
    displacement_norm,
    geodesic_transport_witness,
    increasing_rearrangement,
)
from .wasserstein import (
    DistanceReport,
    TransportPlan,
    levy_prokhorov,
    schatten_p_seminorm,
    w1_dual,
    winf,
    winf_quantile,
    wp_primal,
    wp_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "ArcSpace",
    "CLTResult",
    "DegenerateComputationError",
    "DimensionDropSpec",
    "DiscreteMeasure",
    "DistanceReport",
    "EigenvalueMapFamily",
    "EigenvalueProfile",
    "FiniteMetricSpace",
    "GeodesicGraph",
    "Measure1D",
    "MonotoneCurve",
    "MonotoneMap",
    "PLFunction",
    "PMParams",
    "RazakSpec",
    "StepPlan",
    "TransportPlan",
    "TransportWitness",
    "UnitInterval",
    "ValidationError",
    "apply_observable",
    "arc_pair",
    "arc_transport_ratio",
    "bottleneck_distance",
    "bottleneck_matching",
    "bottleneck_matching_value",
    "cdf_distance",
    "center_observable",
    "clt_experiment",
    "d_diagonal",
    "d_w_matrices",
    "d_w_profiles",
    "displacement_norm",
    "dw_sampled",
    "empirical_measure",
    "expand_multiset",
    "geodesic_transport_witness",
    "gl_profile",
    "gl_separation_check",
    "increasing_rearrangement",
    "integrate_abs_power",
    "integrate_abs_power_measure",
    "integrate_measure",
    "intertwining_defect",
    "invariant_measure_estimate",
    "is_eps_dense",
    "jiangsu_step",
    "levy_prokhorov",
    "lipschitz_battery",
    "log_weights",
    "measure_integral",
    "min_cost_assignment",
    "orbit",
    "pm_map",
    "pushforward",
    "pushforward_function",
    "pushforward_trace",
    "quantile",
    "rationalize_weights",
    "scaled_birkhoff",
    "schatten_p_seminorm",
    "shortest_path_metric",
    "simulate_tower",
    "sup_abs_diff",
    "validate_metric",
    "w1_dual",
    "w1_to_normal",
    "winf",
    "winf_quantile",
    "wp_diagonal_pair",
    "wp_primal",
    "wp_quantile",
]
