"""Width dimension of l^p balls: bounds, explicit embeddings and extremal configurations."""

from .bounds import (
    BoundRecord,
    Metric,
    WdimInterval,
    b_lower,
    borsuk_ulam_floor,
    dim2_threshold,
    dim3_threshold,
    known_upper,
    urysohn_widths,
    wdim_cube,
    wdim_interval,
    wdim_lp_ball_sup_metric,
)
from .embeddings import (
    ConicCoordinates,
    EmbeddingSpec,
    FiberSample,
    HypothesisReport,
    MapKind,
    cascade_projection,
    collapse_fiber_diameter,
    collapse_projection,
    conic_coordinates,
    dim3_set,
    empirical_c,
    fiber_diameter,
    hypothesis_check,
    regular_simplex,
    sample_fiber,
    skeleton_projection,
)
from .errors import *  # noqa: F401,F403
from .hadamard import (
    HadamardMatrix,
    construct,
    hadamard_order_available,
    hadamard_set,
    hadamard_set_diameter,
    paley,
    row_agreement_counts,
    sylvester,
)
from .hemisphere_search import (
    LinfVariant,
    SearchResult,
    certify_against_bound,
    contains_origin_in_hull,
    linf_family,
    min_diameter_search,
)
from .lp_core import (
    Exponent,
    LpVector,
    PointConfiguration,
    dual_exponent,
    lp_distance,
    lp_norm,
    radial_project,
    set_diameter,
)

__version__ = "0.1.0"
