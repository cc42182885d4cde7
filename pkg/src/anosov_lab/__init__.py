"""anosov-lab: singular-value gaps, limit sets and dimension estimates for
finitely generated matrix groups."""

__version__ = "0.1.0"

from .linalg import (  # noqa: F401
    CartanDecomposition,
    Subspace,
    cartan,
    cartan_attractor,
    direct_sum_margin,
    gap_ratio,
    min_angle,
    sin_distance,
    subspace_intersection,
)
from .words import (  # noqa: F401
    BoundaryRay,
    GeneratorAlphabet,
    GeodesicAutomaton,
    Word,
    build_geodesic_automaton,
    cone_type,
    load_automaton,
    nested_pair,
    reduce,
    sample_boundary_rays,
    sphere,
)
from .representation import (  # noqa: F401
    AnosovCertificate,
    BoundaryPoint,
    Representation,
    boundary_point,
    certify_anosov,
    evaluate,
    limit_set_sample,
    stereographic_projection,
)
from .constructions import (  # noqa: F401
    Partition,
    WeightList,
    coherence_check,
    decompose_weights,
    direct_sum,
    exterior_power,
    irreducible_rep,
    perturb,
    schottky_fuchsian,
    sl2_weights,
    symmetric_power,
)
from .hyperconvexity import (  # noqa: F401
    ConvergenceProfile,
    TripleMarginReport,
    convergence_profile,
    hyperconvexity_scan,
    property_h_margin,
    triple_margin,
)
from .dimension import (  # noqa: F401
    DimensionEstimate,
    ExponentEstimate,
    PSMeasure,
    box_dimension,
    critical_exponent,
    least_angle_estimate,
    poincare_partial,
    ps_measure,
    shadow_ratio,
)
from .config import RunConfig, emit_config, parse_config  # noqa: F401
from .pipeline import RunRecord, run  # noqa: F401

# reports pulls in matplotlib; import it explicitly via anosov_lab.reports
