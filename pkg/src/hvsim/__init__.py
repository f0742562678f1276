"""Hidden-variable fiber models of finite-dimensional quantum systems.

Builds, over one (0, 1) fiber per pure state, the deterministic observables
whose uniform-measure pushforwards reproduce quantum statistics exactly,
together with the quotient maps back to projectors and self-adjoint
operators, and CHSH diagnostics separating shared-backing (classical)
configurations from genuinely quantum ones.
"""

__version__ = "0.1.0"

from .errors import (
    BackingMismatch,
    ConvergenceFailure,
    DegenerateLabeling,
    DimensionMismatch,
    HvError,
    LoadError,
    NotCommuting,
    NotHermitian,
    OutOfDomain,
)
from .linalg import (
    SpectralDecomposition,
    as_complex_matrix,
    commutes,
    eigh,
    ensure_hermitian,
    ensure_projector,
    max_abs,
    projector_join,
    projector_meet,
    projector_rank,
)
from .borel import (
    BorelSet,
    Interval,
    PiecewiseAffineFunction,
    compose_functions,
    preimage,
)
from .quantum import (
    PureState,
    cdf,
    expectation,
    functional_calculus,
    prob,
    spectral_projector,
)
from .hidden import (
    ClassicalObservable,
    HiddenSampleReport,
    Proposition,
    QuantileStep,
    compose,
    fiber_integral,
    fiber_subset,
    observables_confusion_equivalent,
    proposition_from,
    proposition_projector,
    quantile_function,
    reduced_operator,
    sample,
    states_confusion_equivalent,
)
from .bell import (
    ChshConfig,
    FiberChshFunctions,
    PropositionQuadruple,
    check_boolean_homomorphism,
    chsh_terms,
    chsh_value,
    common_refinement_quadruple,
    correlation_operator,
    fiber_chsh_functions,
    joint_propositions,
)
