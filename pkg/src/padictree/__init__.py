"""Certified spectral computations on the weighted rooted tree of p-adic balls.

The package computes the spectrum of the composition of the forward tree
derivative with its adjoint: eigenvalues as certified roots of a confluent
basic hypergeometric series, eigenvectors from a closed-form coefficient
recursion, multiplicities from the fiber decomposition, and the associated
spectral zeta functions.  Every analytic result is cross-checked against
brute-force matrix truncations (`padictree.oracle`).
"""

from .exactnum import (
    BudgetExceededError,
    ErrorBounded,
    Phi11Params,
    Rational,
    SignEvidence,
    UndecidedSignError,
    cauchy_sum_discrepancy,
    char_series_sign,
    char_series_value,
    phi11_certified,
    qpochhammer_finite,
    qpochhammer_infinite,
    transformation_discrepancy,
)
from .operators import (
    HalfLineSeq,
    TreeFunction,
    TruncMatrix,
    apply_D,
    apply_D0,
    apply_D0star,
    apply_D0starD0,
    apply_Dhat,
    apply_Dhatstar,
    apply_Dstar,
    hat_inner,
    tree_inner,
    truncated_matrix,
)
from .spectrum import (
    EigenvalueRecord,
    EigenvectorExpansion,
    SpectrumEntry,
    bracket_eigenvalue,
    check_c2_identity,
    dstar_d_spectrum,
    eigenvector_coefficients,
    empirical_remainder,
    multiplicity,
    refine_eigenvalue,
    remainder_bound,
    residual_norm_sq,
    synthesize_eigenvector,
    transported_bracket,
)
from .tree import (
    LevelData,
    Prime,
    PruferPoint,
    Vertex,
    children,
    from_prufer,
    level_dft,
    level_idft,
    parent,
    to_prufer,
    weight,
)
from .zeta import ComplexS, ZetaResult, pole_list, schatten_trace, zeta_D, zeta_D0, zeta_D0_continued

__version__ = "0.1.0"
