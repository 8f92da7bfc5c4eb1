"""Explicit finite-uniton-number harmonic maps into U(n).

Builds the projection chains of the covering-uniton construction from arrays
of rational vectors, verifies the structural identities numerically, and
factorizes algebraic loops through the finite Grassmannian model.
"""

from .builder import (
    HarmonicMapSampler,
    UnitonFiber,
    alpha1_is_full,
    associated_and_gauss,
    build_fiber,
    cartan_embed,
    draw_sample_points,
    evaluate_extended,
    evaluate_map,
    extended_coefficients,
    s1_invariant_data,
)
from .errors import (
    BadShape,
    DegeneratePoint,
    DegreeNoDrop,
    NonProperUniton,
    NoTermination,
    NotLambdaInvariant,
    PoleError,
    SingularLoop,
    UnitonsError,
)
from .grassmannian import (
    ConstantLoop,
    LoopPoly,
    QInvolution,
    WSubspace,
    binomial_transform,
    iwasawa_factorize,
    kernel_factorize,
    kernel_factorize_fiber,
    normalize_type_one,
    q_adapted_check,
    w_from_loop,
    w_from_x,
    x_columns_from_data,
)
from .kernels import BACKEND
from .meromorphic import (
    DataArray,
    MeroVector,
    RationalFn,
    cancel_common_roots,
    differentiate,
    eval_rational,
    poles_of,
    random_data,
)
from .projections import (
    ProjChain,
    Span,
    c_operator,
    image_span,
    max_principal_angle,
    orthonormal_basis,
    principal_angles,
    projection_pair,
    s_operator,
    spans_equal,
)
from .verifier import (
    ConnectionFiber,
    FDScheme,
    connection_form,
    extended_checks,
    harmonicity_residual,
    section_identities,
    verification_report,
    wirtinger,
)

__version__ = "0.1.0"
