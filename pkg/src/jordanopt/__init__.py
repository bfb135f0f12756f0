"""Euclidean Jordan algebras, block-Hermitian operational theories and
executable postulate checks."""
from .composition import (
    cup,
    eta_epsilon_check,
    local_tomography_span,
    snake_check,
    tensor_element,
    tensor_system,
)
from .ejacore import (
    ComplexHerm,
    EjaElement,
    EjaKind,
    OctHerm3,
    QuatHerm,
    RealSym,
    Spin,
    classify_simple,
    exclusion_check,
    jordan_product,
    spectral_decompose,
)
from .optmodel import (
    Filter,
    Pds,
    PureState,
    homogeneity_map,
    make_filter,
    probability,
    projection_process,
    spectral_peel,
    spectral_state,
)
from .processes import (
    KrausFamily,
    ProcessChoi,
    apply,
    choi_from_kraus,
    classify_process,
    compose_parallel,
    compose_sequential,
    kraus_from_choi,
)
from .systems import BlockHermitian, SystemSpec, random_hermitian, random_state
from .verifier import classify_theory, verify_all

__version__ = "0.1.0"
