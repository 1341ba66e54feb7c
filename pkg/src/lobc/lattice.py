"""Exact subspace lattices of F_q^m and their inclusion incidence matrices.

Subspaces are represented by reduced-row-echelon-form basis matrices, which
makes every subspace canonical: two values are equal iff their bases are
identical.  Counting and incidence are exact integer computations; the only
floating point enters through the row-stochastic scaling of incidence
matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError

SUPPORTED_PRIMES = (2, 3, 5, 7)

# Dense layer matrices stop being tractable well before this, so refuse early.
MAX_LAYER_SIZE = 100_000


def _check_prime(q: int) -> None:
    if q not in SUPPORTED_PRIMES:
        raise ParameterError(f"field order must be one of {SUPPORTED_PRIMES}, got {q!r}")


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of an n-dimensional space over F_q.

    Exact integer arithmetic; every partial product below is itself a
    Gaussian binomial, so the integer divisions are exact.
    """
    _check_prime(q)
    if not 0 <= k <= n:
        raise ParameterError(f"need 0 <= k <= n, got k={k}, n={n}")
    out = 1
    for i in range(1, k + 1):
        out = out * (q ** (n - k + i) - 1) // (q**i - 1)
    return out


@dataclass(frozen=True)
class LatticeParams:
    """Ambient space F_q^m with a fixed input dimension l."""

    q: int
    m: int
    l: int

    def __post_init__(self):
        _check_prime(self.q)
        if not 1 <= self.m <= 6:
            raise ParameterError(f"ambient dimension must be in 1..6, got {self.m}")
        if not 0 <= self.l <= self.m:
            raise ParameterError(f"input dimension must be in 0..{self.m}, got {self.l}")
        for d in range(self.m + 1):
            size = gaussian_binomial(self.m, d, self.q)
            if size > MAX_LAYER_SIZE:
                raise ParameterError(
                    f"layer of dimension {d} has {size} subspaces, "
                    f"exceeding the supported maximum of {MAX_LAYER_SIZE}"
                )


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_q^m, canonically represented by its RREF basis.

    ``index`` is the position in the deterministic ordering of the layer
    (lexicographic on the basis entries read row-major).
    """

    dim: int
    basis: tuple[tuple[int, ...], ...]
    index: int
    q: int
    m: int


@lru_cache(maxsize=None)
def _layer(q: int, m: int, dim: int) -> tuple[Subspace, ...]:
    bases = []
    for pivots in itertools.combinations(range(m), dim):
        pivot_set = set(pivots)
        free = [
            (i, j)
            for i in range(dim)
            for j in range(m)
            if j > pivots[i] and j not in pivot_set
        ]
        for values in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * m for _ in range(dim)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, j), v in zip(free, values):
                rows[i][j] = v
            bases.append(tuple(tuple(r) for r in rows))
    bases.sort()
    return tuple(
        Subspace(dim=dim, basis=b, index=i, q=q, m=m) for i, b in enumerate(bases)
    )


def enumerate_subspaces(params: LatticeParams, dim: int) -> list[Subspace]:
    """All subspaces of dimension ``dim``, in the canonical ordering."""
    if not 0 <= dim <= params.m:
        raise ParameterError(f"dimension must be in 0..{params.m}, got {dim}")
    return list(_layer(params.q, params.m, dim))


def _pivot_columns(basis: tuple[tuple[int, ...], ...]) -> list[int]:
    return [next(j for j, v in enumerate(row) if v) for row in basis]


def subspace_contains(a: Subspace, b: Subspace) -> bool:
    """True iff b is a subspace of a, decided exactly over F_q."""
    if (a.q, a.m) != (b.q, b.m):
        raise ParameterError("subspaces belong to different lattices")
    if b.dim > a.dim:
        return False
    q = a.q
    pivots = _pivot_columns(a.basis)
    for row in b.basis:
        r = list(row)
        for arow, p in zip(a.basis, pivots):
            c = r[p]
            if c:
                r = [(x - c * y) % q for x, y in zip(r, arow)]
        if any(r):
            return False
    return True


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """Inclusion incidence between the dimension-l and dimension-s layers.

    Plain form: 0/1 entries, every row summing to gaussian_binomial(l, s, q).
    Stochastic form: scaled by 1/gaussian_binomial(l, s, q) so rows sum to 1.
    """

    l: int
    s: int
    stochastic: bool
    entries: np.ndarray

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@lru_cache(maxsize=None)
def _incidence_01(q: int, m: int, l: int, s: int) -> np.ndarray:
    upper = _layer(q, m, l)
    lower = _layer(q, m, s)
    out = np.zeros((len(upper), len(lower)), dtype=np.int64)
    for i, a in enumerate(upper):
        for j, b in enumerate(lower):
            if subspace_contains(a, b):
                out[i, j] = 1
    out.setflags(write=False)
    return out


def incidence_matrix(
    params: LatticeParams, l: int, s: int, stochastic: bool = False
) -> IncidenceMatrix:
    """Incidence matrix D_ls, or its row-stochastic scaling S_ls."""
    if not 0 <= s <= l <= params.m:
        raise ParameterError(f"need 0 <= s <= l <= m, got l={l}, s={s}, m={params.m}")
    plain = _incidence_01(params.q, params.m, l, s)
    if not stochastic:
        return IncidenceMatrix(l=l, s=s, stochastic=False, entries=plain)
    scaled = plain / gaussian_binomial(l, s, params.q)
    scaled.setflags(write=False)
    return IncidenceMatrix(l=l, s=s, stochastic=True, entries=scaled)


def stochastic_incidence(params: LatticeParams, l: int, s: int) -> np.ndarray:
    """Row-stochastic incidence block S_ls as a plain array."""
    return incidence_matrix(params, l, s, stochastic=True).entries
