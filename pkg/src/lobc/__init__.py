"""Subspace broadcast channels: lattices, degradation certificates, capacity regions."""

from .channel import (
    CapacityResult,
    ChannelMatrix,
    ChannelReport,
    Cmlobc,
    ErasurePattern,
    build_cmloc,
    cmloc_capacity,
    normalized_rates,
    output_block_offsets,
    validate_channel,
)
from .degradation import (
    CertificateReport,
    DegradationCertificate,
    DegradationOrder,
    OracleResult,
    check_degraded,
    check_strong_degraded,
    construct_degrading_channel,
    lp_degradation_oracle,
    mass_transfer_matrix,
    verify_certificate,
)
from .errors import ConvergenceError, InfeasibleError, ParameterError, SolverError
from .lattice import (
    IncidenceMatrix,
    LatticeParams,
    Subspace,
    enumerate_subspaces,
    gaussian_binomial,
    incidence_matrix,
    stochastic_incidence,
    subspace_contains,
)
from .pg22 import (
    CurveClass,
    CurveClassification,
    binary_entropy,
    classify_region,
    concavity_gauge,
    curve_derivatives,
    curve_points,
    curve_rates,
    pg22_capacity,
    second_derivative_sign,
    symmetric_joint,
)
from .region import (
    BoundaryResult,
    JointDistribution,
    RatePoint,
    RegionEstimate,
    ba_boundary_point,
    boundary_sweep,
    broadcast_rates,
    default_mu_grid,
    erasure_channel_matrix,
    erasure_identity_residuals,
    erasure_region_contains,
    filter_time_sharing,
    mutual_information,
    region_estimate_json,
    sample_achievable_points,
    weighted_sum_bound_check,
)

__version__ = "0.1.0"
