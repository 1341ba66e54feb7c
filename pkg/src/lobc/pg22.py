"""Closed-form rate analysis over the projective plane PG(2,2).

For the lattice with q = 2, m = 3, l = 2 (inputs are the seven planes of
F_2^3, the dimension-1 layer is the Fano plane) a one-parameter family of
joints, obtained by feeding a uniform auxiliary variable through a 7-ary
symmetric channel, traces a curve of rate pairs with fully explicit values,
derivatives, and curvature.  The curvature sign is decided by the
discriminant eps1[1] * eps2[2] - eps2[1] * eps1[2].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channel import ErasurePattern
from .errors import ParameterError
from .region import JointDistribution

import numpy as np

SIGMA_MAX = 6.0 / 7.0

LN7 = math.log(7.0)
LN7_3 = math.log(7.0 / 3.0)
LN6 = math.log(6.0)
LN4_3 = math.log(4.0 / 3.0)


def _pattern3(eps) -> tuple[float, float, float]:
    pattern = ErasurePattern.of(eps)
    if pattern.l != 2:
        raise ParameterError(
            f"PG(2,2) analysis needs a length-3 pattern, got length {pattern.l + 1}"
        )
    return pattern.eps  # type: ignore[return-value]


def _check_sigma(sigma: float, open_interval: bool = False) -> None:
    if open_interval:
        if not 0.0 < sigma < SIGMA_MAX:
            raise ParameterError(
                f"sigma must lie strictly inside (0, 6/7), got {sigma!r}"
            )
    elif not 0.0 <= sigma <= SIGMA_MAX:
        raise ParameterError(f"sigma must lie in [0, 6/7], got {sigma!r}")


def binary_entropy(x: float) -> float:
    """H(x) = -x ln x - (1-x) ln(1-x) in nats, with H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"entropy argument must lie in [0, 1], got {x!r}")
    out = 0.0
    if x > 0.0:
        out -= x * math.log(x)
    if x < 1.0:
        out -= (1.0 - x) * math.log(1.0 - x)
    return out


def symmetric_joint(sigma: float) -> JointDistribution:
    """Joint p(U, X) of a uniform U pushed through a 7-ary symmetric channel."""
    _check_sigma(sigma)
    off = sigma / 42.0
    diag = (1.0 - sigma) / 7.0
    table = np.full((7, 7), off)
    np.fill_diagonal(table, diag)
    return JointDistribution(table)


def pg22_capacity(eps) -> float:
    """Single-channel capacity eps_1 ln(7/3) + eps_2 ln 7 in nats."""
    e = _pattern3(eps)
    return e[1] * LN7_3 + e[2] * LN7


def curve_rates(sigma: float, eps1, eps2) -> tuple[float, float]:
    """Rate pair (R1, R2) of the symmetric-joint family at parameter sigma.

    Intended for pattern pairs whose second subchannel is degraded from the
    first; endpoints satisfy R1(0) = 0, R2(0) = C2, R1(6/7) = C1,
    R2(6/7) = 0.
    """
    _check_sigma(sigma)
    e1 = _pattern3(eps1)
    e2 = _pattern3(eps2)
    h23 = binary_entropy(2.0 * sigma / 3.0)
    h = binary_entropy(sigma)
    r1 = e1[1] * (h23 + (2.0 * sigma / 3.0) * LN4_3) + e1[2] * (h + sigma * LN6)
    r2 = e2[1] * (-h23 + LN7_3 - (2.0 * sigma / 3.0) * LN4_3) + e2[2] * (
        -h + LN7 - sigma * LN6
    )
    return r1, r2


def curve_derivatives(sigma: float, eps1, eps2) -> tuple[float, float]:
    """d/dsigma of the curve rates; defined only on the open interval.

    The first component is strictly positive and the second strictly
    negative inside (0, 6/7); both tend to 0 at 6/7 and diverge
    logarithmically at 0, so the endpoints are rejected.
    """
    _check_sigma(sigma, open_interval=True)
    e1 = _pattern3(eps1)
    e2 = _pattern3(eps2)
    log_a = math.log(2.0 * (1.0 - 2.0 * sigma / 3.0) / sigma)
    log_b = math.log(6.0 * (1.0 - sigma) / sigma)
    d1 = e1[1] * (2.0 / 3.0) * log_a + e1[2] * log_b
    d2 = -e2[1] * (2.0 / 3.0) * log_a - e2[2] * log_b
    return d1, d2


def concavity_gauge(sigma: float) -> float:
    """The positive factor controlling the curvature sign along the curve.

    g(s) = (1-s)ln(1-s) - (1-2s/3)ln(1-2s/3) + (s/3)ln s
           + (1-s)ln 6 - (1-2s/3)ln 2,
    evaluated with the 0 ln 0 = 0 convention.  g vanishes at 6/7 and is
    strictly positive on the open interval.
    """
    _check_sigma(sigma)
    out = 0.0
    if sigma < 1.0:
        out += (1.0 - sigma) * math.log(1.0 - sigma)
    t = 1.0 - 2.0 * sigma / 3.0
    out -= t * math.log(t)
    if sigma > 0.0:
        out += (sigma / 3.0) * math.log(sigma)
    out += (1.0 - sigma) * LN6 - t * math.log(2.0)
    return out


def second_derivative_sign(sigma: float, eps1, eps2) -> int:
    """Sign of the curvature of R2 as a function of R1 at parameter sigma.

    Evaluates 2 (eps2_1 eps1_2 - eps1_1 eps2_2) g(sigma) divided by the
    positive factor sigma (1 - sigma) (3 - 2 sigma); the sign therefore only
    depends on the discriminant.
    """
    _check_sigma(sigma, open_interval=True)
    e1 = _pattern3(eps1)
    e2 = _pattern3(eps2)
    value = (
        2.0
        * (e2[1] * e1[2] - e1[1] * e2[2])
        * concavity_gauge(sigma)
        / (sigma * (1.0 - sigma) * (3.0 - 2.0 * sigma))
    )
    if value > 0.0:
        return 1
    if value < 0.0:
        return -1
    return 0


class CurveClass(enum.Enum):
    CONCAVE = "ConcaveCaseI"
    CONVEX = "ConvexCaseII"
    LINEAR = "LinearCaseIII"


@dataclass(frozen=True)
class CurveClassification:
    case: CurveClass
    discriminant: float


def classify_region(eps1, eps2) -> CurveClassification:
    """Classify the curve as concave, convex, or the time-sharing line itself."""
    e1 = _pattern3(eps1)
    e2 = _pattern3(eps2)
    disc = e1[1] * e2[2] - e2[1] * e1[2]
    if abs(disc) <= 1e-12:
        case = CurveClass.LINEAR
    elif disc > 0.0:
        case = CurveClass.CONCAVE
    else:
        case = CurveClass.CONVEX
    return CurveClassification(case=case, discriminant=disc)


def curve_points(eps1, eps2, num: int = 1001) -> np.ndarray:
    """Sample the curve on a uniform sigma grid; columns are sigma, r1, r2."""
    if num < 2:
        raise ParameterError(f"grid needs at least 2 points, got {num}")
    sigmas = np.linspace(0.0, SIGMA_MAX, num)
    out = np.empty((num, 3))
    for i, s in enumerate(sigmas):
        r1, r2 = curve_rates(float(s), eps1, eps2)
        out[i] = (s, r1, r2)
    return out
