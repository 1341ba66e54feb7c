"""Achievable-rate analysis for degraded two-receiver broadcast channels.

Rate pairs are (R1, R2) = (I(X;Y1|U), I(U;Y2)) in nats, for joint
distributions p(U, X) pushed through the two subchannel matrices under the
Markov chain U -> X -> (Y1, Y2).  The module provides Monte-Carlo sampling of
the achievable cloud, the time-sharing filter, a weighted-sum-rate
alternating-maximization solver for boundary points, and closed forms for
the pure-erasure broadcast channel.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelMatrix, Cmlobc, cmloc_capacity
from .degradation import DegradationOrder, check_degraded
from .errors import ConvergenceError, ParameterError, SolverError

THREADS_ENV = "LOC_REGION_THREADS"
FILTER_TOL = 1e-9
CAPACITY_TOL = 1e-10


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats with the 0 log 0 = 0 convention."""
    flat = np.asarray(p, dtype=float).ravel()
    nz = flat[flat > 0.0]
    return float(-(nz * np.log(nz)).sum())


def mutual_information(p_xy: np.ndarray) -> float:
    """I(X;Y) in nats of a joint probability table."""
    table = np.asarray(p_xy, dtype=float)
    if table.ndim != 2:
        raise ParameterError(f"joint table must be 2-d, got shape {table.shape}")
    if np.any(table < 0.0):
        raise ParameterError("joint table has negative entries")
    total = float(table.sum())
    if abs(total - 1.0) > 1e-12:
        raise ParameterError(f"joint table sums to {total!r}, expected 1")
    value = (
        _entropy(table.sum(axis=1)) + _entropy(table.sum(axis=0)) - _entropy(table)
    )
    return max(value, 0.0)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability table p(U, X) over auxiliary times input alphabets."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise ParameterError(f"joint table must be 2-d, got shape {table.shape}")
        if np.any(table < 0.0):
            raise ParameterError("joint table has negative entries")
        total = float(table.sum())
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"joint table sums to {total!r}, expected 1")
        object.__setattr__(self, "table", table)

    @property
    def u_size(self) -> int:
        return self.table.shape[0]

    @property
    def x_size(self) -> int:
        return self.table.shape[1]


@dataclass(frozen=True)
class RatePoint:
    """An achievable rate pair with its provenance tag.

    Tags: sampled | boundary | analytic | time-sharing.  Tiny negative
    round-off is clamped to zero.
    """

    r1: float
    r2: float
    tag: str = "sampled"
    seed: int | None = None

    def __post_init__(self):
        for name, value in (("r1", self.r1), ("r2", self.r2)):
            if value < -1e-9:
                raise ParameterError(f"{name} is negative beyond round-off: {value!r}")
            if value < 0.0:
                object.__setattr__(self, name, 0.0)


@dataclass(frozen=True)
class RegionEstimate:
    points: tuple[RatePoint, ...]
    c1: float
    c2: float
    filtered: bool
    metadata: dict


def _matrix(channel: "ChannelMatrix | np.ndarray") -> np.ndarray:
    if isinstance(channel, ChannelMatrix):
        return channel.matrix
    return np.asarray(channel, dtype=float)


def _channel_row_entropies(s: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)
    return -terms.sum(axis=1)


def _conditional_mi(table: np.ndarray, s: np.ndarray) -> float:
    """I(X;Y|U) for joint p(U,X) and channel p(Y|X): H(Y|U) - H(Y|X)."""
    pu = table.sum(axis=1)
    px = table.sum(axis=0)
    puy = table @ s
    h_y_given_u = _entropy(puy) - _entropy(pu)
    h_y_given_x = float(px @ _channel_row_entropies(s))
    return h_y_given_u - h_y_given_x


def broadcast_rates(
    joint: JointDistribution,
    s1: "ChannelMatrix | np.ndarray",
    s2: "ChannelMatrix | np.ndarray",
    tag: str = "sampled",
    seed: int | None = None,
) -> RatePoint:
    """Rate pair (I(X;Y1|U), I(U;Y2)) induced by a joint and two channels."""
    a1 = _matrix(s1)
    a2 = _matrix(s2)
    if joint.x_size != a1.shape[0] or joint.x_size != a2.shape[0]:
        raise ParameterError(
            f"joint input size {joint.x_size} does not match channel rows "
            f"{a1.shape[0]} / {a2.shape[0]}"
        )
    table = joint.table
    r1 = _conditional_mi(table, a1)
    pu = table.sum(axis=1)
    puy2 = table @ a2
    r2 = _entropy(pu) + _entropy(puy2.sum(axis=0)) - _entropy(puy2)
    return RatePoint(r1=max(r1, 0.0), r2=max(r2, 0.0), tag=tag, seed=seed)


def _sample_chunk(args) -> list[tuple[float, float, int]]:
    a1, a2, u_size, x_size, seed, start, stop = args
    out = []
    for i in range(start, stop):
        rng = np.random.default_rng([seed, i])
        table = rng.dirichlet(np.ones(u_size * x_size)).reshape(u_size, x_size)
        pt = broadcast_rates(JointDistribution(table), a1, a2, tag="sampled", seed=i)
        out.append((pt.r1, pt.r2, i))
    return out


def sample_achievable_points(
    ch: Cmlobc, n: int, seed: int, u_size: int | None = None
) -> RegionEstimate:
    """Draw n flat-Dirichlet joints and evaluate their rate pairs.

    Sample i uses the child stream [seed, i], so the cloud is reproducible
    and independent of any parallel chunking.  The auxiliary alphabet
    defaults to the input alphabet size.
    """
    if n < 1:
        raise ParameterError(f"sample count must be at least 1, got {n}")
    s1, s2 = ch.channel_matrices()
    x_size = s1.rows
    u = u_size if u_size is not None else x_size
    if u < 1:
        raise ParameterError(f"auxiliary alphabet size must be at least 1, got {u}")

    c1 = cmloc_capacity(s1, tol=CAPACITY_TOL).capacity
    c2 = cmloc_capacity(s2, tol=CAPACITY_TOL).capacity

    workers = _threads()
    if workers > 1 and n >= 64:
        chunk = max(64, (n + workers * 4 - 1) // (workers * 4))
        jobs = [
            (s1.matrix, s2.matrix, u, x_size, seed, lo, min(lo + chunk, n))
            for lo in range(0, n, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sample_chunk, jobs))
        raw = [item for part in chunks for item in part]
    else:
        raw = _sample_chunk((s1.matrix, s2.matrix, u, x_size, seed, 0, n))

    points = tuple(RatePoint(r1, r2, tag="sampled", seed=i) for r1, r2, i in raw)
    return RegionEstimate(
        points=points,
        c1=c1,
        c2=c2,
        filtered=False,
        metadata={
            "n": n,
            "seed": seed,
            "u_size": u,
            "capacity_tol": CAPACITY_TOL,
        },
    )


def region_estimate_json(est: RegionEstimate) -> dict:
    """JSON-ready document for a region estimate: points plus metadata block."""
    return {
        "c1": est.c1,
        "c2": est.c2,
        "filtered": est.filtered,
        "metadata": dict(est.metadata),
        "points": [
            {"r1": p.r1, "r2": p.r2, "tag": p.tag, "seed": p.seed} for p in est.points
        ],
    }


def filter_time_sharing(est: RegionEstimate) -> RegionEstimate:
    """Keep points on or above the time-sharing line r1/c1 + r2/c2 = 1."""
    if est.c1 <= 0.0 or est.c2 <= 0.0:
        raise ParameterError("time-sharing filter needs strictly positive capacities")
    kept = tuple(
        p for p in est.points if p.r1 / est.c1 + p.r2 / est.c2 >= 1.0 - FILTER_TOL
    )
    metadata = dict(est.metadata)
    metadata["filter_tol"] = FILTER_TOL
    return replace(est, points=kept, filtered=True, metadata=metadata)


@dataclass(frozen=True, eq=False)
class BoundaryResult:
    point: RatePoint
    joint: JointDistribution
    objective: float
    trace: np.ndarray
    iterations: int
    converged: bool


def _dbc_objective(pu, pxgu, a1, a2, mu):
    joint = pu[:, None] * pxgu
    r1 = _conditional_mi(joint, a1)
    puy2 = joint @ a2
    r2 = _entropy(pu) + _entropy(puy2.sum(axis=0)) - _entropy(puy2)
    return max(r1, 0.0), max(r2, 0.0), max(r1, 0.0) + mu * max(r2, 0.0)


def ba_boundary_point(
    ch: Cmlobc,
    mu: float,
    u_size: int | None = None,
    tol: float = 1e-10,
    max_iter: int = 20_000,
    seed: int = 0,
) -> BoundaryResult:
    """Maximize I(X;Y1|U) + mu * I(U;Y2) by alternating maximization.

    Requires the second subchannel to be a degraded version of the first.
    Each iteration refreshes the two posterior distributions of the current
    joint and then solves the resulting surrogate exactly, so the objective
    never decreases.  Stops when the per-iteration gain drops below ``tol``;
    the landscape is non-convex, so the result is a stationary point and
    callers wanting the global boundary should multi-start (see
    boundary_sweep).  Raises ConvergenceError carrying the best iterate when
    ``max_iter`` is exhausted.
    """
    if mu < 0:
        raise ParameterError(f"weight must be nonnegative, got {mu}")
    order = check_degraded(
        ch.eps1, ch.eps2, l_less_than_m=ch.params.l < ch.params.m
    )
    if order not in (DegradationOrder.Y2_DEGRADED_FROM_Y1, DegradationOrder.EQUIVALENT):
        raise ParameterError(
            f"subchannels are not degraded in the required order (verdict: {order.value})"
        )
    s1, s2 = ch.channel_matrices()
    a1, a2 = s1.matrix, s2.matrix
    x_size = a1.shape[0]
    u = u_size if u_size is not None else x_size
    if u < 1:
        raise ParameterError(f"auxiliary alphabet size must be at least 1, got {u}")

    rng = np.random.default_rng([seed])
    pu = rng.dirichlet(np.ones(u))
    pxgu = rng.dirichlet(np.ones(x_size), size=u)
    if u == x_size:
        # Mixing in a random permutation keeps bijective assignments reachable
        # once the weight term starts freezing conditionals.
        permutation = np.eye(x_size)[rng.permutation(x_size)]
        pxgu = 0.5 * permutation + 0.5 * pxgu

    neg_h1 = -_channel_row_entropies(a1)  # sum_y s1 log s1 per input row

    r1, r2, objective = _dbc_objective(pu, pxgu, a1, a2, mu)
    trace = [objective]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            py1gu = pxgu @ a1
            log_py1gu = np.where(py1gu > 0, np.log(np.where(py1gu > 0, py1gu, 1.0)), 0.0)
            py2gu = pxgu @ a2
            py2 = pu @ py2gu
            # sum the logs rather than logging the product: pu * py2gu can
            # underflow to zero while py2gu is still positive, which would
            # poison the whole gain row and kill the atom
            log_pu = np.where(pu > 0, np.log(np.where(pu > 0, pu, 1.0)), -np.inf)
            log_psi = np.where(
                py2gu > 0,
                log_pu[:, None]
                + np.log(np.where(py2gu > 0, py2gu, 1.0))
                - np.log(np.where(py2 > 0, py2, 1.0))[None, :],
                0.0,
            )
            log_pxgu = np.where(pxgu > 0, np.log(np.where(pxgu > 0, pxgu, 1.0)), -np.inf)

            gain = log_pxgu + neg_h1[None, :] - log_py1gu @ a1.T
            if mu > 0:
                gain = gain + mu * (log_psi @ a2.T)

        row_max = gain.max(axis=1)
        live = np.isfinite(row_max)
        log_norm = np.full(u, -np.inf)
        new_pxgu = pxgu.copy()
        if np.any(live):
            shifted = np.exp(gain[live] - row_max[live][:, None])
            sums = shifted.sum(axis=1)
            new_pxgu[live] = shifted / sums[:, None]
            log_norm[live] = row_max[live] + np.log(sums)
        pxgu = new_pxgu

        if mu > 0:
            weights = log_norm / mu
            weights = weights - weights[np.isfinite(weights)].max()
            pu = np.where(np.isfinite(weights), np.exp(weights), 0.0)
            pu = pu / pu.sum()
        else:
            pu = np.zeros(u)
            pu[int(np.argmax(log_norm))] = 1.0

        r1, r2, objective = _dbc_objective(pu, pxgu, a1, a2, mu)
        trace.append(objective)
        if trace[-1] < trace[-2] - 1e-9:
            raise SolverError(
                f"objective decreased by {trace[-2] - trace[-1]:.3e} at iteration "
                f"{iterations}; the ascent guarantee is broken"
            )
        if trace[-1] - trace[-2] < tol:
            converged = True
            break

    point = RatePoint(r1=r1, r2=r2, tag="boundary", seed=seed)
    result = BoundaryResult(
        point=point,
        joint=JointDistribution(pu[:, None] * pxgu),
        objective=objective,
        trace=np.array(trace),
        iterations=iterations,
        converged=converged,
    )
    if not converged:
        raise ConvergenceError(
            f"objective still gaining after {max_iter} iterations",
            best=result,
        )
    return result


def _sweep_one(args) -> BoundaryResult:
    ch, mu, mu_index, restarts, seed, u_size, tol, max_iter = args
    best = None
    for r in range(restarts):
        child = int(np.random.SeedSequence([seed, mu_index, r]).generate_state(1)[0])
        try:
            result = ba_boundary_point(
                ch, mu, u_size=u_size, tol=tol, max_iter=max_iter, seed=child
            )
        except ConvergenceError as exc:
            result = exc.best
        if best is None or result.objective > best.objective:
            best = result
    return best


def default_mu_grid(num: int = 41) -> np.ndarray:
    """Geometric weight grid spanning both corner regimes."""
    return np.geomspace(1e-3, 1e3, num)


def boundary_sweep(
    ch: Cmlobc,
    mus: np.ndarray | None = None,
    restarts: int = 8,
    seed: int = 0,
    u_size: int | None = None,
    tol: float = 1e-10,
    max_iter: int = 20_000,
) -> list[tuple[float, BoundaryResult]]:
    """Best-of-restarts boundary point for every weight in the grid."""
    grid = default_mu_grid() if mus is None else np.asarray(mus, dtype=float)
    jobs = [
        (ch, float(mu), k, restarts, seed, u_size, tol, max_iter)
        for k, mu in enumerate(grid)
    ]
    workers = _threads()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]
    return [(float(mu), res) for mu, res in zip(grid, results)]


def erasure_channel_matrix(x_size: int, rho: float) -> np.ndarray:
    """Channel (rho J | (1 - rho) I): one erasure column plus a scaled identity."""
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"erasure probability must lie in [0, 1], got {rho}")
    if x_size < 1:
        raise ParameterError(f"alphabet size must be at least 1, got {x_size}")
    return np.hstack([np.full((x_size, 1), rho), (1.0 - rho) * np.eye(x_size)])


def erasure_region_contains(
    rho1: float, rho2: float, x_size: int, pt: RatePoint, tol: float = 1e-9
) -> bool:
    """Membership in the erasure broadcast region R1/C1 + R2/C2 <= 1."""
    if not 0.0 <= rho1 <= rho2 <= 1.0:
        raise ParameterError(
            f"need 0 <= rho1 <= rho2 <= 1, got rho1={rho1}, rho2={rho2}"
        )
    if x_size < 2:
        raise ParameterError(f"alphabet size must be at least 2, got {x_size}")
    log_x = float(np.log(x_size))
    c1 = (1.0 - rho1) * log_x
    c2 = (1.0 - rho2) * log_x
    total = 0.0
    for r, c in ((pt.r1, c1), (pt.r2, c2)):
        if c == 0.0:
            if r > tol:
                return False
        else:
            total += r / c
    return total <= 1.0 + tol


def erasure_identity_residuals(
    joint: JointDistribution, rho: float
) -> tuple[float, float]:
    """Residuals of the two erasure-channel information identities.

    For Y the output of the one-erasure-column channel applied to X under the
    Markov chain U -> X -> Y, both I(U;Y) = (1 - rho) I(U;X) and
    I(X;Y|U) = (1 - rho) H(X|U) hold exactly; this evaluates the two sides
    numerically and returns the absolute residuals.
    """
    w = erasure_channel_matrix(joint.x_size, rho)
    table = joint.table
    pu = table.sum(axis=1)

    i_uy = mutual_information(table @ w)
    i_ux = mutual_information(table)
    res1 = abs(i_uy - (1.0 - rho) * i_ux)

    i_xy_given_u = _conditional_mi(table, w)
    h_x_given_u = _entropy(table) - _entropy(pu)
    res2 = abs(i_xy_given_u - (1.0 - rho) * h_x_given_u)
    return res1, res2


def weighted_sum_bound_check(
    joint: JointDistribution, rho1: float, rho2: float
) -> float:
    """Slack of the outer bound C2 I(X;Y1|U) + C1 I(U;Y2) <= C1 C2.

    Always nonnegative up to round-off; zero exactly when the input marginal
    is uniform.
    """
    if not 0.0 <= rho1 <= rho2 <= 1.0:
        raise ParameterError(
            f"need 0 <= rho1 <= rho2 <= 1, got rho1={rho1}, rho2={rho2}"
        )
    x_size = joint.x_size
    log_x = float(np.log(x_size))
    c1 = (1.0 - rho1) * log_x
    c2 = (1.0 - rho2) * log_x
    w1 = erasure_channel_matrix(x_size, rho1)
    w2 = erasure_channel_matrix(x_size, rho2)
    pt = broadcast_rates(joint, w1, w2)
    return c1 * c2 - (c2 * pt.r1 + c1 * pt.r2)
