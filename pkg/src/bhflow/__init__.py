"""bhflow: bihermitian structures on CP^2 and CP^1 x CP^1 from
Hamiltonian flows of log ||sigma||^2, with a numerical verification suite."""

from .bihermitian import (
    BihermitianData,
    CohomologyResult,
    LimitResult,
    ScanResult,
    assemble,
    assemble_from_state,
    cohomology_check,
    limit_check,
    positivity_scan,
    two_path_residual,
    verify_identities,
)
from .curve import (
    CurvePoint,
    continuation_samples,
    find_curve_point,
    locate_curve,
    residue_form,
    translation_diagnostics,
)
from .errors import (
    BhflowError,
    ConfigError,
    CurveError,
    DegenerateJacobianError,
    FlowError,
    NearCurveError,
    QuadratureError,
    UnrepresentablePointError,
)
from .flow import (
    FlowState,
    IntegratorConfig,
    flow,
    hamiltonian_field,
    pullback_holsymp,
    reference_form,
)
from .forms import (
    IPLUS,
    ComplexStructureOp,
    PointMetric,
    RealLinearMap,
    TwoForm,
    conjugate_structure,
    evaluate,
    hermitian_form,
    is_positive_form,
    metric_from_form,
    p11_projection,
    pullback,
    quaternion_package,
    top_density,
    wedge_top,
)
from .sampling import random_points
from .surfaces import (
    CP2,
    CP1XCP1,
    AnticanonicalSection,
    ChartPoint,
    KstarMetric,
    SurfaceModel,
    curvature_form,
    fermat_cubic,
    grad_f,
    potential,
    product_unit_section,
    section_norm_sq,
)
from .verify import DEFAULT_TOLERANCES, SuiteReport, full_report

__version__ = "0.1.0"
