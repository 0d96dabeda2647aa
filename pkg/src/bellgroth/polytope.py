"""Facet (tightness) tests on the local polytope and the inclusion reduction.

Everything here is exact: strategy values are integers and ranks come from
fraction-free elimination over Python integers.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np

from .bell_core import (BellInequality, build_inequality, fix_settings,
                        iter_sign_blocks, local_bound_bruteforce)

SATURATION_MAX_SETTINGS = 20
MAX_FREE_EXPANSIONS = 1 << 12


class StructuralMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class DeterministicStrategy:
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        if any(x not in (-1, 1) for x in self.a + self.b):
            raise ValueError("deterministic outcomes must be exactly +1 or -1")


@dataclass(frozen=True)
class TightnessReport:
    label: str
    local_bound: int
    saturating_count: int
    ambient_dimension: int
    rank: int
    tight: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


def strategy_vector(s: DeterministicStrategy) -> np.ndarray:
    """(a_i b_j row-major, a_i, b_j, 1) as an integer vector of length mA*mB + mA + mB + 1."""
    a = np.asarray(s.a, dtype=np.int64)
    b = np.asarray(s.b, dtype=np.int64)
    return np.concatenate([np.outer(a, b).ravel(), a, b, [1]])


def _require_integral(ineq: BellInequality) -> None:
    if not ineq.is_integral:
        raise ValueError("exact tightness analysis needs integer coefficients")


def saturating_strategies(ineq: BellInequality, bound: int | None = None) -> list[DeterministicStrategy]:
    """All deterministic strategies attaining the local bound, in lexicographic order."""
    _require_integral(ineq)
    if ineq.mA > SATURATION_MAX_SETTINGS:
        raise ValueError(f"mA = {ineq.mA} exceeds the enumeration guard {SATURATION_MAX_SETTINGS}")
    if bound is None:
        bound = local_bound_bruteforce(ineq, max_maximizers=1).bound
    M = ineq.dense()
    mar_A, mar_B = ineq.marginals()
    out = []
    for A in iter_sign_blocks(ineq.mA):
        cols = A @ M + mar_B
        vals = np.abs(cols).sum(axis=1) + A @ mar_A
        if vals.max() > bound:
            raise ValueError(f"strategy exceeds the supplied bound {bound}")
        for a, col in zip(A[vals == bound], cols[vals == bound]):
            free = int(np.count_nonzero(col == 0))
            if (1 << free) > MAX_FREE_EXPANSIONS:
                raise ValueError(f"{free} free columns exceed the expansion cap {MAX_FREE_EXPANSIONS}")
            choices = [(-1,) if c < 0 else (1,) if c > 0 else (-1, 1) for c in col]
            a_t = tuple(int(x) for x in a)
            out.extend(DeterministicStrategy(a_t, b) for b in itertools.product(*choices))
    return out


def bareiss_rank(matrix) -> int:
    """Exact rank of an integer matrix by fraction-free (Bareiss) elimination."""
    A = np.array(matrix, dtype=object)
    if A.ndim != 2 or A.size == 0:
        return 0
    rows, cols = A.shape
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = [i for i in range(r, rows) if A[i, c] != 0]
        if not nz:
            continue
        p = nz[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        pivot = A[r, c]
        below = A[r + 1:, c:]
        # every entry becomes a minor of the original matrix: the division is exact
        below[:] = (pivot * below - np.outer(below[:, 0], A[r, c:])) // prev
        prev = pivot
        r += 1
    return r


def saturating_rank(strategies: list[DeterministicStrategy]) -> int:
    if not strategies:
        return 0
    V = np.array([strategy_vector(s) for s in strategies], dtype=np.int64)
    V = np.unique(V, axis=0)
    # rank V = rank V^T V over the rationals; the Gram matrix is small and exact in int64
    gram = V.T @ V
    return bareiss_rank(gram.tolist())


def tightness(ineq: BellInequality) -> TightnessReport:
    bound = local_bound_bruteforce(ineq, max_maximizers=1).bound
    strategies = saturating_strategies(ineq, bound)
    D = ineq.mA * ineq.mB + ineq.mA + ineq.mB
    rank = saturating_rank(strategies)
    return TightnessReport(ineq.label, int(bound), len(strategies), D, rank, rank == D)


def saturating_csv(strategies: list[DeterministicStrategy]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if strategies:
        mA, mB = len(strategies[0].a), len(strategies[0].b)
        writer.writerow([f"a{i + 1}" for i in range(mA)] + [f"b{j + 1}" for j in range(mB)])
    for s in strategies:
        writer.writerow(s.a + s.b)
    return buf.getvalue()


# -- inclusion ----------------------------------------------------------------

@dataclass(frozen=True)
class InclusionReduction:
    n: int
    source: BellInequality
    residual: BellInequality
    target: BellInequality
    constant: int
    source_bound: int
    target_bound: int


def inclusion_assignment(n: int) -> tuple[dict[str, int], dict[str, int]]:
    """Settings fixed to deterministic outcomes when passing from I'(n,n) to I'(n-1,n-1)."""
    alice = {f"a_{n}": 1, **{f"a_{i}_{n}": -1 for i in range(1, n)}}
    bob = {f"b_{n}": 1, **{f"b_{i}_{n}": -1 for i in range(1, n)}}
    return alice, bob


def reduce_inclusion(n: int) -> InclusionReduction:
    if n < 3:
        raise ValueError("the reduction needs n >= 3")
    source = build_inequality(n, n, with_marginals=True)
    fixed_A, fixed_B = inclusion_assignment(n)
    index_A = {name: i for i, name in enumerate(source.alice_settings)}
    index_B = {name: j for j, name in enumerate(source.bob_settings)}
    residual, constant = fix_settings(
        source,
        {index_A[k]: v for k, v in fixed_A.items()},
        {index_B[k]: v for k, v in fixed_B.items()},
    )
    target = build_inequality(n - 1, n - 1, with_marginals=True)

    if residual.index_map != target.index_map:
        raise StructuralMismatch(f"setting order differs after reducing {source.label}")
    if residual.coeffs != target.coeffs:
        raise StructuralMismatch(f"correlation coefficients differ after reducing {source.label}")
    if (residual.marginal_A, residual.marginal_B) != (target.marginal_A, target.marginal_B):
        raise StructuralMismatch(f"marginal coefficients differ after reducing {source.label}")

    source_bound = n * n
    target_bound = (n - 1) * (n - 1)
    if source_bound != target_bound + constant:
        raise StructuralMismatch(
            f"bounds do not line up: {source_bound} != {target_bound} + {constant}")
    return InclusionReduction(n, source, residual, target, int(constant), source_bound, target_bound)


def inclusion_chain(n: int) -> list[InclusionReduction]:
    """Reductions n -> n-1 -> ... -> 2."""
    return [reduce_inclusion(k) for k in range(n, 2, -1)]
