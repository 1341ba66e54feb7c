"""Degradation order between the two subchannels of a broadcast CMLOC.

The second receiver is a (stochastically) degraded version of the first
exactly when the cumulative sums of the first erasure pattern never exceed
those of the second.  The sufficient direction is realized constructively: a
lower-triangular row-stochastic layer matrix L with eps1 @ L = eps2 is built
from elementary mass transfers, and the degrading channel T is assembled
blockwise as T_ij = L[i, j] * S_ij.  An independent linear-programming
feasibility oracle decides the factorization S2 = S1 @ T directly and is used
to validate both directions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .channel import ChannelMatrix, ErasurePattern, build_cmloc, output_block_offsets
from .errors import InfeasibleError, ParameterError, SolverError
from .lattice import LatticeParams, stochastic_incidence

PREFIX_TOL = 1e-12
RESIDUAL_TOL = 1e-10
STOCHASTIC_TOL = 1e-12
LP_WITNESS_TOL = 1e-8


class DegradationOrder(enum.Enum):
    Y2_DEGRADED_FROM_Y1 = "Y2DegradedFromY1"
    Y1_DEGRADED_FROM_Y2 = "Y1DegradedFromY2"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


def _pattern_pair(eps1, eps2) -> tuple[np.ndarray, np.ndarray]:
    e1 = ErasurePattern.of(eps1).as_array()
    e2 = ErasurePattern.of(eps2).as_array()
    if e1.shape != e2.shape:
        raise ParameterError(
            f"patterns have different lengths: {e1.size} vs {e2.size}"
        )
    return e1, e2


def check_degraded(eps1, eps2, l_less_than_m: bool = True) -> DegradationOrder:
    """Classify the degradation order of the two subchannels.

    Uses the prefix-sum criterion with non-strict comparisons at tolerance
    1e-12.  When ``l_less_than_m`` is False the input alphabet is a single
    subspace and any pair of patterns is mutually degradable, so the verdict
    is Equivalent regardless of the patterns.
    """
    e1, e2 = _pattern_pair(eps1, eps2)
    if not l_less_than_m:
        return DegradationOrder.EQUIVALENT
    c1 = np.cumsum(e1)
    c2 = np.cumsum(e2)
    forward = bool(np.all(c1 <= c2 + PREFIX_TOL))
    reverse = bool(np.all(c2 <= c1 + PREFIX_TOL))
    if forward and reverse:
        return DegradationOrder.EQUIVALENT
    if forward:
        return DegradationOrder.Y2_DEGRADED_FROM_Y1
    if reverse:
        return DegradationOrder.Y1_DEGRADED_FROM_Y2
    return DegradationOrder.INCOMPARABLE


def check_strong_degraded(eps1, eps2) -> bool:
    """Sufficient componentwise test: eps1_i <= eps2_i for all i < l."""
    e1, e2 = _pattern_pair(eps1, eps2)
    return bool(np.all(e1[:-1] <= e2[:-1] + PREFIX_TOL))


def mass_transfer_matrix(eps1, eps2) -> np.ndarray:
    """Lower-triangular row-stochastic L with eps1 @ L = eps2.

    Built as a product of elementary transfers, each moving a fraction of the
    mass at one index to a strictly smaller index.  The schedule is greedy
    left to right: each target index pulls its deficit from the smallest
    higher index that still holds surplus, so the result is deterministic and
    uses at most l(l+1)/2 transfers.
    """
    e1, e2 = _pattern_pair(eps1, eps2)
    c1 = np.cumsum(e1)
    c2 = np.cumsum(e2)
    for i, (a, b) in enumerate(zip(c1, c2)):
        if a > b + PREFIX_TOL:
            raise InfeasibleError(
                f"prefix sum condition fails at index {i}: {a!r} > {b!r}",
                index=i,
            )
    n = e1.size
    transfer = np.eye(n)
    current = e1.copy()
    for i in range(n):
        need = e2[i] - current[i]
        for j in range(i + 1, n):
            if need <= PREFIX_TOL:
                break
            surplus = current[j] - e2[j]
            if surplus <= 0.0 or current[j] <= 0.0:
                continue
            take = min(need, surplus)
            frac = take / current[j]
            step = np.eye(n)
            step[j, j] = 1.0 - frac
            step[j, i] = frac
            transfer = transfer @ step
            current[i] += take
            current[j] -= take
            need = e2[i] - current[i]
        if need > 1e-9:
            raise InfeasibleError(
                f"transfer schedule left a deficit of {need:.3e} at index {i}",
                index=i,
            )
    return transfer


@dataclass(frozen=True, eq=False)
class DegradationCertificate:
    """Constructive witness that the second subchannel factors through the first.

    ``layer_matrix`` is the lower-triangular stochastic matrix on dimension
    layers; it is None for the degenerate l = m construction, where the
    degrader is the rank-one matrix whose rows all equal the target channel
    row.  ``residual`` is the max-abs entry of S1 @ degrader - S2.
    """

    layer_matrix: np.ndarray | None
    degrader: np.ndarray
    residual: float
    block_offsets: tuple[int, ...]


def construct_degrading_channel(
    params: LatticeParams, eps1, eps2
) -> DegradationCertificate:
    """Build the degrading channel T together with its layer matrix."""
    e1 = ErasurePattern.of(eps1)
    e2 = ErasurePattern.of(eps2)
    s1 = build_cmloc(params, e1)
    s2 = build_cmloc(params, e2)
    offsets = output_block_offsets(params)
    total = offsets[-1]

    if params.l == params.m:
        # Single input subspace: any target row is reachable with T = j s2.
        degrader = np.tile(s2.matrix, (total, 1))
        residual = float(np.abs(s1.matrix @ degrader - s2.matrix).max())
        return DegradationCertificate(
            layer_matrix=None,
            degrader=degrader,
            residual=residual,
            block_offsets=offsets,
        )

    layer = mass_transfer_matrix(e1, e2)
    degrader = np.zeros((total, total))
    for i in range(params.l + 1):
        for j in range(i + 1):
            weight = layer[i, j]
            if weight == 0.0:
                continue
            block = stochastic_incidence(params, i, j)
            degrader[offsets[i] : offsets[i + 1], offsets[j] : offsets[j + 1]] = (
                weight * block
            )
    residual = float(np.abs(s1.matrix @ degrader - s2.matrix).max())
    return DegradationCertificate(
        layer_matrix=layer,
        degrader=degrader,
        residual=residual,
        block_offsets=offsets,
    )


@dataclass(frozen=True, eq=False)
class OracleResult:
    feasible: bool
    witness: np.ndarray | None
    witness_residual: float | None


def lp_degradation_oracle(
    s1: "ChannelMatrix | np.ndarray", s2: "ChannelMatrix | np.ndarray"
) -> OracleResult:
    """Decide by linear programming whether S2 = S1 @ T has a stochastic solution T.

    Independent of the prefix-sum criterion: sets up the feasibility system
    {S1 T = S2, T >= 0, T 1 = 1} over the full output alphabet and hands it
    to a phase-one LP.  Returns a witness T when feasible.
    """
    a1 = s1.matrix if isinstance(s1, ChannelMatrix) else np.asarray(s1, dtype=float)
    a2 = s2.matrix if isinstance(s2, ChannelMatrix) else np.asarray(s2, dtype=float)
    if a1.shape != a2.shape:
        raise ParameterError(f"channel shapes differ: {a1.shape} vs {a2.shape}")
    n_out = a1.shape[1]

    eye = sp.identity(n_out, format="csr")
    factor_rows = sp.kron(sp.csr_matrix(a1), eye, format="csr")
    row_sums = sp.kron(eye, sp.csr_matrix(np.ones((1, n_out))), format="csr")
    a_eq = sp.vstack([factor_rows, row_sums], format="csr")
    b_eq = np.concatenate([a2.ravel(), np.ones(n_out)])

    result = linprog(
        c=np.zeros(n_out * n_out),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
    )
    if result.status == 2:
        return OracleResult(feasible=False, witness=None, witness_residual=None)
    if result.status != 0:
        raise SolverError(f"LP solver status {result.status}: {result.message}")
    witness = result.x.reshape(n_out, n_out)
    residual = float(np.abs(a1 @ witness - a2).max())
    return OracleResult(feasible=True, witness=witness, witness_residual=residual)


@dataclass(frozen=True)
class CertificateReport:
    """Recomputed certificate diagnostics; ``issues`` is empty iff it passes."""

    residual: float
    degrader_row_sum_deviation: float
    degrader_min_entry: float
    layer_row_sum_deviation: float | None
    layer_pattern_residual: float | None
    issues: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


def verify_certificate(
    s1: ChannelMatrix, cert: DegradationCertificate, s2: ChannelMatrix
) -> CertificateReport:
    """Authoritative recheck of a degradation certificate against two channels."""
    if s1.matrix.shape != s2.matrix.shape:
        raise ParameterError("channel shapes differ")
    if cert.degrader.shape != (s1.cols, s2.cols):
        raise ParameterError("degrader shape does not match the channels")
    issues: list[str] = []

    residual = float(np.abs(s1.matrix @ cert.degrader - s2.matrix).max())
    if residual > RESIDUAL_TOL:
        issues.append(f"factorization residual {residual:.3e} exceeds {RESIDUAL_TOL}")

    t_row_dev = float(np.abs(cert.degrader.sum(axis=1) - 1.0).max())
    t_min = float(cert.degrader.min())
    if t_row_dev > STOCHASTIC_TOL:
        issues.append(f"degrader row sums deviate by {t_row_dev:.3e}")
    if t_min < -STOCHASTIC_TOL:
        issues.append(f"degrader has negative entry {t_min:.3e}")

    layer_row_dev = None
    layer_pattern_res = None
    if cert.layer_matrix is not None:
        layer = cert.layer_matrix
        layer_row_dev = float(np.abs(layer.sum(axis=1) - 1.0).max())
        if layer_row_dev > STOCHASTIC_TOL:
            issues.append(f"layer matrix row sums deviate by {layer_row_dev:.3e}")
        upper = float(np.abs(np.triu(layer, k=1)).max())
        if upper > STOCHASTIC_TOL:
            issues.append(f"layer matrix has upper-triangular mass {upper:.3e}")
        if layer.min() < -STOCHASTIC_TOL or layer.max() > 1.0 + STOCHASTIC_TOL:
            issues.append("layer matrix entries leave [0, 1]")
        if s1.eps is not None and s2.eps is not None:
            mapped = s1.eps.as_array() @ layer
            layer_pattern_res = float(np.abs(mapped - s2.eps.as_array()).max())
            if layer_pattern_res > STOCHASTIC_TOL:
                issues.append(
                    f"layer matrix maps the first pattern {layer_pattern_res:.3e} away from the second"
                )

    return CertificateReport(
        residual=residual,
        degrader_row_sum_deviation=t_row_dev,
        degrader_min_entry=t_min,
        layer_row_sum_deviation=layer_row_dev,
        layer_pattern_residual=layer_pattern_res,
        issues=tuple(issues),
    )
