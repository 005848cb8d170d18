"""sofic-lab: a numerical laboratory for sofic approximations of groups,
their matrix linearizations, Gaussian microstates, and packing-based
entropy lower bounds."""

__version__ = "0.1.0"

from .errors import (
    NumericalError,
    ResourceCapError,
    SchemaError,
    SoficLabError,
    StructuralError,
)
from .groups import (
    FiniteTable,
    FreeGroup,
    GroupElement,
    GroupSpec,
    ZPow,
    cyclic_group,
    dihedral_group,
    direct_product,
    finite_group_fleet,
    group_from_json,
    group_multiply,
    group_to_json,
    quaternion_group,
    symmetric_group,
    words_up_to,
)
from .ring import (
    GroupRingElement,
    Product,
    Scaled,
    Slot,
    Star,
    StarPolynomial,
    Sum,
    delta,
    left_regular_matrix,
    ring_convolve,
    ring_norm2,
    ring_star,
    ring_trace,
    star_polynomial_from_json,
)
from .sofic import (
    DefectReport,
    ObstructionReport,
    Permutation,
    SoficMap,
    build_sofic,
    defect_report,
    evaluate,
    freeness_defect,
    invariant_set_obstruction,
    multiplicativity_defect,
    spectral_gap,
)
from .embedding import (
    EmbeddingDefect,
    MatrixImage,
    MatrixNorms,
    RoundedProjection,
    embedding_defect,
    linearize,
    matrix_norms,
    realify,
    spectral_round,
)
from .gaussian import (
    ArcProjectionSpec,
    ConcentrationResult,
    FourierTestFunction,
    GaussianSampler,
    Microstate,
    arc_projection_coeffs,
    build_microstate,
    characteristic_mean,
    concentration_experiment,
    empirical_functional,
    gaussian_target,
    sample_subspace_gaussian,
)
from .entropy import (
    EntropyEstimate,
    MapParams,
    MembershipResult,
    PseudometricConfig,
    binary_entropy,
    delta2,
    entropy_estimate,
    equivariance_defect,
    greedy_packing,
    map_membership,
    packing_lower_bound,
)
from .harmonic import (
    PositiveDefiniteFunction,
    PowersStormerResult,
    conjugation_C,
    powers_stormer_check,
    psd_sqrt,
    random_positive_element,
    realize_cyclic,
    trace_abs,
)
from .config import SCHEMA_VERSION, ExperimentConfig, validate
from .report import Report
from .experiments import run
