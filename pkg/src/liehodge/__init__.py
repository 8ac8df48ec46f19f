"""liehodge: exact cohomology and deformation calculus for invariant
complex structures on Lie algebra presentations.

The package computes Dolbeault / del / Bott-Chern / Aeppli / de Rham
cohomology of a complex Lie algebra presentation with exact
Gaussian-rational arithmetic, evaluates the solvability condition classes
and the deformation-invariance predictor, and implements the deformation
toolkit: Beltrami differentials, extension maps, obstruction equations,
deformed structure equations, the canonical Beltrami power series, and the
power-series extension solvers.
"""

from .errors import (
    DegreeMismatch,
    HypothesisFailed,
    IntegrabilityError,
    InvalidArrow,
    JacobiError,
    LieHodgeError,
    NotCocycle,
    NotIntegrable,
    NotSolvable,
    ParseError,
    PresentationMismatch,
    SingularFrame,
    SingularOperator,
    UnknownBuiltin,
)
from .scalars import GR, GaussianRational, format_scalar, parse_scalar
from .linalg import ExactMatrix
from .presentation import (
    LiePresentation,
    builtin,
    check_nilpotent,
    parse_presentation,
    presentation_to_dict,
    serialize_presentation,
)
from .forms import (
    BeltramiDifferential,
    CoframeOperator,
    MixedForm,
    PQForm,
    VectorForm,
    bidegree_basis,
    conjugate,
    contract,
    dbar_part,
    del_bar_beltrami,
    del_part,
    differential,
    exp_contract,
    extension_map,
    extension_operator,
    inverse_extension_map,
    deformed_frame_coefficients,
    lie_derivative_10,
    one_minus_phibar_phi,
    operator_matrix,
    schouten_bracket,
    simul_contract,
    integrability_defect,
    wedge,
)
from .cohomology import (
    ARROWS,
    CohomologyTable,
    InducedMapReport,
    PredictorVerdict,
    betti_number,
    cohomology,
    cohomology_table,
    condition,
    duality_pairing,
    euler_characteristics,
    induced_map,
    invariance_predict,
    pairing_matrix,
    sgg_check,
)
from .harmonic import MetricContext
from .series import FormSeries, bilinear_series, degrees_up_to, splits
from .deformation import (
    DeformedPresentation,
    EquivalenceReport,
    ExtensionResult,
    FrameMatrix,
    KuranishiResult,
    OperatorSeries,
    block_inverse,
    deform_structure,
    deformed_hodge,
    extend_series,
    harmonic_beltrami_basis,
    kuranishi_integrability_defect,
    kuranishi_series,
    obstruction,
    obstruction_equivalence_check,
    obstruction_series,
)

__version__ = "0.1.0"
