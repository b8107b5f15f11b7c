"""Random translation-invariant tensor network states: sampling, transfer
operators, parent Hamiltonians, correlation profiles, and quantum expanders,
plus a reproducible Monte Carlo campaign runner."""

from .errors import (
    DegenerateSampleError,
    InvalidParameterError,
    NumericalFailureError,
    ResourceLimitError,
)
from .sampling import (
    MpsTensor,
    PepsTensor,
    SeedSpec,
    sample_complex_gaussian_matrix,
    sample_mps_tensor,
    sample_peps_tensor,
)
from .spectral import (
    GapCertificate,
    SpectralSummary,
    eigs_by_modulus,
    gap_certificate,
    lowest_eigs_hermitian,
    max_entangled,
    operator_norm,
    realign,
    singular_values,
    upper_gap,
)
from .states import StateVector, block_mps, mps_injectivity_map, mps_state, peps_injectivity_map, peps_state
from .transfer import (
    TransferOperator,
    apply_cp,
    column_to_mps,
    deflated_norms,
    mps_transfer,
    overlap_psi,
    peps_transfer,
    peps_transfer_independent,
    trace,
    trace_power,
    transfer_gap,
)
from .parent import (
    GroundProjector,
    ParentHamiltonian,
    commutator_norm,
    ground_projector,
    hamiltonian_gap,
    hamiltonian_matvec,
    mps_parent,
    p_tilde_distance,
    peps_parent,
    peps_two_site_map,
    projector_commutator_norm,
    two_site_map,
    w_operator,
)
from .correlations import (
    CorrelationProfile,
    CorollaryBound,
    boundary_operator,
    corollary_bound,
    correlation_direct,
    correlation_length_fit,
    correlation_profile,
    correlation_transfer,
    observable_family,
)
from .expander import (
    Channel,
    FixedPoint,
    expander_report,
    fixed_point,
    iterate_channel,
    normalize_channel,
    sigma,
    two_two_distance,
    vec_to_matrix,
)
from .bounds import BoundReport, paper_bounds
from .campaign import ExperimentConfig, TrialRecord, run_campaign

__version__ = "0.1.0"
