"""Channel matrices for constant-dimension multiplicative operator channels.

A CMLOC sends an l-dimensional subspace X of F_q^m and delivers a uniformly
random s-dimensional subspace of X with probability eps_s.  Ordering the
output alphabet by ascending dimension layer, the channel matrix decomposes
into blocks eps_s * S_ls where S_ls is the row-stochastic incidence matrix
between the layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConvergenceError, ParameterError
from .lattice import (
    LatticeParams,
    gaussian_binomial,
    incidence_matrix,
)

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ErasurePattern:
    """Probability vector (eps_0, ..., eps_l) over received output dimensions."""

    eps: tuple[float, ...]

    def __post_init__(self):
        if len(self.eps) == 0:
            raise ParameterError("erasure pattern must be non-empty")
        if any(e < 0.0 for e in self.eps):
            raise ParameterError(f"erasure pattern has negative entries: {self.eps}")
        total = float(sum(self.eps))
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise ParameterError(f"erasure pattern sums to {total!r}, expected 1")

    @classmethod
    def of(cls, values: "ErasurePattern | Iterable[float]") -> "ErasurePattern":
        if isinstance(values, ErasurePattern):
            return values
        return cls(tuple(float(v) for v in values))

    @property
    def l(self) -> int:
        return len(self.eps) - 1

    def as_array(self) -> np.ndarray:
        return np.array(self.eps, dtype=float)


def output_block_offsets(params: LatticeParams) -> tuple[int, ...]:
    """Column offsets of each output dimension layer, with an end sentinel."""
    offsets = [0]
    for s in range(params.l + 1):
        offsets.append(offsets[-1] + gaussian_binomial(params.m, s, params.q))
    return tuple(offsets)


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Dense transfer matrix of a CMLOC, with its block layout.

    ``block_offsets`` has one entry per dimension layer plus an end sentinel,
    so block s occupies columns block_offsets[s]:block_offsets[s + 1].
    """

    params: LatticeParams
    matrix: np.ndarray
    block_offsets: tuple[int, ...]
    eps: ErasurePattern | None = None

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def block(self, s: int) -> np.ndarray:
        return self.matrix[:, self.block_offsets[s] : self.block_offsets[s + 1]]


def build_cmloc(params: LatticeParams, eps: "ErasurePattern | Iterable[float]") -> ChannelMatrix:
    """Assemble the channel matrix (eps_0 S_l0 | eps_1 S_l1 | ... | eps_l S_ll)."""
    eps = ErasurePattern.of(eps)
    if eps.l != params.l:
        raise ParameterError(
            f"pattern has length {eps.l + 1}, expected l + 1 = {params.l + 1}"
        )
    blocks = []
    for s in range(params.l + 1):
        support = incidence_matrix(params, params.l, s).entries
        scale = eps.eps[s] / gaussian_binomial(params.l, s, params.q)
        blocks.append(np.where(support == 1, scale, 0.0))
    matrix = np.hstack(blocks)
    matrix.setflags(write=False)
    return ChannelMatrix(
        params=params,
        matrix=matrix,
        block_offsets=output_block_offsets(params),
        eps=eps,
    )


@dataclass(frozen=True)
class Cmlobc:
    """Two-receiver broadcast channel whose subchannels share one lattice."""

    params: LatticeParams
    eps1: ErasurePattern
    eps2: ErasurePattern

    def __post_init__(self):
        for eps in (self.eps1, self.eps2):
            if eps.l != self.params.l:
                raise ParameterError(
                    f"pattern length {eps.l + 1} does not match l + 1 = {self.params.l + 1}"
                )

    @classmethod
    def of(cls, params: LatticeParams, eps1, eps2) -> "Cmlobc":
        return cls(params, ErasurePattern.of(eps1), ErasurePattern.of(eps2))

    def channel_matrices(self) -> tuple[ChannelMatrix, ChannelMatrix]:
        return build_cmloc(self.params, self.eps1), build_cmloc(self.params, self.eps2)


@dataclass(frozen=True)
class ChannelReport:
    """Diagnostics from validate_channel; ``issues`` is empty iff all checks pass."""

    max_row_sum_deviation: float
    support_violations: int
    max_block_scale_deviation: float
    issues: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


def validate_channel(channel: ChannelMatrix, tol: float = ROW_SUM_TOL) -> ChannelReport:
    """Check row-stochasticity, the inclusion support law, and block scaling."""
    p = channel.matrix
    issues: list[str] = []

    row_dev = float(np.abs(p.sum(axis=1) - 1.0).max())
    if row_dev > tol:
        issues.append(f"row sums deviate from 1 by {row_dev:.3e}")

    support_violations = 0
    block_dev = 0.0
    for s in range(channel.params.l + 1):
        support = incidence_matrix(channel.params, channel.params.l, s).entries
        block = channel.block(s)
        off = block[support == 0]
        support_violations += int(np.count_nonzero(off))
        on = block[support == 1]
        if on.size:
            if channel.eps is not None:
                ref = channel.eps.eps[s] / gaussian_binomial(
                    channel.params.l, s, channel.params.q
                )
            else:
                ref = float(on.mean())
            block_dev = max(block_dev, float(np.abs(on - ref).max()))
    if support_violations:
        issues.append(
            f"{support_violations} entries carry mass on outputs not contained in the input"
        )
    if block_dev > tol:
        issues.append(f"block scaling deviates by {block_dev:.3e}")

    return ChannelReport(
        max_row_sum_deviation=row_dev,
        support_violations=support_violations,
        max_block_scale_deviation=block_dev,
        issues=tuple(issues),
    )


@dataclass(frozen=True, eq=False)
class CapacityResult:
    capacity: float
    input_distribution: np.ndarray
    gap: float
    iterations: int


def _channel_array(channel: "ChannelMatrix | np.ndarray") -> np.ndarray:
    if isinstance(channel, ChannelMatrix):
        return channel.matrix
    return np.asarray(channel, dtype=float)


def cmloc_capacity(
    channel: "ChannelMatrix | np.ndarray",
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> CapacityResult:
    """Channel capacity in nats by alternating maximization.

    Iterates the classic multiplicative update on the input distribution and
    stops once the duality gap max_x D(x) - sum_x r(x) D(x) drops below
    ``tol``, which bounds the distance of the returned value from the true
    capacity.  Raises ConvergenceError (carrying the best iterate) if the
    gap never closes within ``max_iter`` iterations.
    """
    if tol <= 0:
        raise ParameterError("tolerance must be positive")
    p = _channel_array(channel)
    n_in = p.shape[0]
    log_p = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), 0.0)

    r = np.full(n_in, 1.0 / n_in)
    best = None
    for iteration in range(1, max_iter + 1):
        py = r @ p
        with np.errstate(divide="ignore", invalid="ignore"):
            log_py = np.log(py)
            divergence = np.where(p > 0, p * (log_p - log_py[None, :]), 0.0).sum(axis=1)
        lower = float(r @ divergence)
        upper = float(divergence.max())
        gap = upper - lower
        if best is None or gap < best.gap:
            best = CapacityResult(lower, r.copy(), gap, iteration)
        if gap <= tol:
            return CapacityResult(max(lower, 0.0), r, gap, iteration)
        r = r * np.exp(divergence - upper)
        r = r / r.sum()
    raise ConvergenceError(
        f"capacity gap {best.gap:.3e} has not closed after {max_iter} iterations",
        best=best,
        gap=best.gap,
    )


def normalized_rates(
    log_m1: float, log_m2: float, n: int, params: LatticeParams
) -> tuple[float, float]:
    """Per-symbol rates log_q|M_i| / (l * m * n) for message-set log sizes in q-ary units."""
    if n < 1:
        raise ParameterError(f"block length must be at least 1, got {n}")
    denom = params.l * params.m * n
    if denom == 0:
        raise ParameterError("normalization requires l >= 1")
    return log_m1 / denom, log_m2 / denom
