"""Correlation Bell inequalities and their local (LHV) bounds.

A correlation inequality is stored as a sparse coefficient matrix ``M`` plus
optional marginal vectors, so that a deterministic strategy ``(a, b)`` with
entries in {-1, +1} scores

    sum_ij M_ij a_i b_j + sum_i marginal_A[i] a_i + sum_j marginal_B[j] b_j.

Setting ordering for the family ``I(nA, nB)``: Alice's rows are
``a_1 .. a_nA`` followed by the pair settings ``a_i_j`` for ``1 <= i < j <= nB``
in lexicographic order; Bob's columns are ``b_1 .. b_nB`` followed by
``b_i_j`` for ``1 <= i < j <= nA``.  Pair setting ``a_i_j`` multiplies
``b_i - b_j`` and ``b_i_j`` multiplies ``a_i - a_j``.
"""

from __future__ import annotations

import io
import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

Number = int | float

#: exhaustive enumeration guard for ``local_bound_bruteforce``
BRUTE_FORCE_MAX_SETTINGS = 24
_CHUNK_BITS = 16


@dataclass(frozen=True)
class BellInequality:
    mA: int
    mB: int
    coeffs: tuple[tuple[int, int, Number], ...]
    marginal_A: tuple[Number, ...] = ()
    marginal_B: tuple[Number, ...] = ()
    label: str = ""
    alice_settings: tuple[str, ...] = ()
    bob_settings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mA < 1 or self.mB < 1:
            raise ValueError(f"need positive setting counts, got {self.mA}x{self.mB}")
        seen = set()
        coeffs = []
        for r, c, v in self.coeffs:
            if not (0 <= r < self.mA and 0 <= c < self.mB):
                raise ValueError(f"coefficient index ({r}, {c}) out of range")
            if (r, c) in seen:
                raise ValueError(f"duplicate coefficient at ({r}, {c})")
            seen.add((r, c))
            if v != 0:
                coeffs.append((int(r), int(c), _exact(v)))
        object.__setattr__(self, "coeffs", tuple(sorted(coeffs)))
        for name, m in (("marginal_A", self.mA), ("marginal_B", self.mB)):
            vec = getattr(self, name)
            if len(vec) == 0:
                vec = (0,) * m
            if len(vec) != m:
                raise ValueError(f"{name} has length {len(vec)}, expected {m}")
            object.__setattr__(self, name, tuple(_exact(v) for v in vec))
        if not self.alice_settings:
            object.__setattr__(self, "alice_settings", tuple(f"A{i + 1}" for i in range(self.mA)))
        if not self.bob_settings:
            object.__setattr__(self, "bob_settings", tuple(f"B{j + 1}" for j in range(self.mB)))
        if len(self.alice_settings) != self.mA or len(self.bob_settings) != self.mB:
            raise ValueError("setting labels do not match the setting counts")

    @property
    def nnz(self) -> int:
        return len(self.coeffs)

    @property
    def index_map(self) -> dict[str, tuple[str, ...]]:
        """Setting names in row (Alice) and column (Bob) order."""
        return {"alice": self.alice_settings, "bob": self.bob_settings}

    @property
    def has_marginals(self) -> bool:
        return any(self.marginal_A) or any(self.marginal_B)

    @property
    def is_integral(self) -> bool:
        vals = itertools.chain((v for _, _, v in self.coeffs), self.marginal_A, self.marginal_B)
        return all(isinstance(v, int) for v in vals)

    def dense(self) -> np.ndarray:
        dtype = np.int64 if self.is_integral else np.float64
        out = np.zeros((self.mA, self.mB), dtype=dtype)
        for r, c, v in self.coeffs:
            out[r, c] = v
        return out

    def sparse(self) -> sp.csr_matrix:
        if not self.coeffs:
            return sp.csr_matrix((self.mA, self.mB), dtype=np.float64)
        r, c, v = zip(*self.coeffs)
        return sp.csr_matrix((np.asarray(v, dtype=np.float64), (r, c)), shape=(self.mA, self.mB))

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        dtype = np.int64 if self.is_integral else np.float64
        return np.asarray(self.marginal_A, dtype=dtype), np.asarray(self.marginal_B, dtype=dtype)

    def is_symmetric(self) -> bool:
        if self.mA != self.mB:
            return False
        entries = {(r, c): v for r, c, v in self.coeffs}
        return all(entries.get((c, r)) == v for (r, c), v in entries.items())

    def lhv_value(self, a: Sequence[int], b: Sequence[int]) -> Number:
        """Exact score of the deterministic strategy ``(a, b)``."""
        if len(a) != self.mA or len(b) != self.mB:
            raise ValueError("strategy length does not match the inequality")
        total = sum(v * a[r] * b[c] for r, c, v in self.coeffs)
        total += sum(m * x for m, x in zip(self.marginal_A, a))
        total += sum(m * y for m, y in zip(self.marginal_B, b))
        return total


class BoundMethod(str, Enum):
    closed_form = "closed_form"
    kl_enumeration = "kl_enumeration"
    brute_force = "brute_force"


@dataclass(frozen=True)
class LocalBoundReport:
    bound: Number
    method: BoundMethod
    maximizers: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = field(default=())


def _exact(v: Number) -> Number:
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("boolean coefficient")
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    return int(f) if f.is_integer() and abs(f) < 2**53 else f


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def build_inequality(nA: int, nB: int, with_marginals: bool = False) -> BellInequality:
    """Build ``I(nA, nB)``, or the marginal-augmented ``I'(n, n)``."""
    if nA < 1 or nB < 1:
        raise ValueError(f"nA and nB must be positive, got ({nA}, {nB})")
    if with_marginals and nA != nB:
        raise ValueError("marginal terms are defined for the symmetric case nA == nB only")
    pairs_B = _pairs(nB)
    pairs_A = _pairs(nA)
    mA = nA + len(pairs_B)
    mB = nB + len(pairs_A)
    coeffs = [(i, j, 1) for i in range(nA) for j in range(nB)]
    for k, (i, j) in enumerate(pairs_B):
        coeffs += [(nA + k, i, 1), (nA + k, j, -1)]
    for k, (i, j) in enumerate(pairs_A):
        coeffs += [(i, nB + k, 1), (j, nB + k, -1)]

    alice = [f"a_{i + 1}" for i in range(nA)] + [f"a_{i + 1}_{j + 1}" for i, j in pairs_B]
    bob = [f"b_{j + 1}" for j in range(nB)] + [f"b_{i + 1}_{j + 1}" for i, j in pairs_A]
    marg_A = [0] * mA
    marg_B = [0] * mB
    if with_marginals:
        marg_A[:nA] = [1] * nA
        marg_B[:nB] = [-1] * nB
    label = f"I'({nA},{nB})" if with_marginals else f"I({nA},{nB})"
    ineq = BellInequality(mA, mB, tuple(coeffs), tuple(marg_A), tuple(marg_B), label,
                          tuple(alice), tuple(bob))
    if nA == nB and not ineq.is_symmetric():
        raise AssertionError("I(n,n) must have a symmetric coefficient matrix")
    return ineq


def chsh() -> BellInequality:
    return BellInequality(2, 2, ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, -1)), label="CHSH")


def local_bound_closed(nA: int, nB: int) -> int:
    if nA < 1 or nB < 1:
        raise ValueError(f"nA and nB must be positive, got ({nA}, {nB})")
    total = nA * nA + nB * nB
    return (total - 1) // 2 if (nA - nB) % 2 else total // 2


def _kl_value(nA: int, nB: int, k: int, l: int, with_marginals: bool) -> int:
    # k (l) = number of +1 among a_1..a_nA (b_1..b_nB)
    value = (nA - 2 * k) * (nB - 2 * l) + 2 * (nA - k) * k + 2 * (nB - l) * l
    if with_marginals:
        value += (2 * k - nA) - (2 * l - nB)
    return value


def _kl_strategy(nA: int, nB: int, k: int, l: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    a = [1] * k + [-1] * (nA - k)
    b = [1] * l + [-1] * (nB - l)
    a_pairs = [1 if b[i] >= b[j] else -1 for i, j in _pairs(nB)]
    b_pairs = [1 if a[i] >= a[j] else -1 for i, j in _pairs(nA)]
    return tuple(a + a_pairs), tuple(b + b_pairs)


def local_bound_kl(nA: int, nB: int, with_marginals: bool = False) -> LocalBoundReport:
    """Local bound of the family by scanning the number of +1 outcomes on each side.

    Permutation symmetry within ``a_1..a_nA`` and ``b_1..b_nB`` means only the
    counts ``k`` and ``l`` matter; the pair settings are then set to the sign of
    the difference they multiply.
    """
    ineq = build_inequality(nA, nB, with_marginals)
    best = None
    for k in range(nA + 1):
        for l in range(nB + 1):
            v = _kl_value(nA, nB, k, l, with_marginals)
            if best is None or v > best[0]:
                best = (v, k, l)
    bound, k, l = best
    a, b = _kl_strategy(nA, nB, k, l)
    if ineq.lhv_value(a, b) != bound:
        raise AssertionError(f"k,l witness for {ineq.label} does not attain {bound}")
    return LocalBoundReport(bound, BoundMethod.kl_enumeration, ((a, b),))


def _sign_patterns(m: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the lexicographic enumeration of {-1,+1}^m."""
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)[None, :]
    return (((idx >> shifts) & 1) * 2 - 1).astype(np.int64)


def iter_sign_blocks(m: int, block_bits: int = _CHUNK_BITS) -> Iterable[np.ndarray]:
    total = 1 << m
    step = 1 << min(block_bits, m)
    for start in range(0, total, step):
        yield _sign_patterns(m, start, min(start + step, total))


def local_bound_bruteforce(ineq: BellInequality, max_maximizers: int = 256) -> LocalBoundReport:
    """Exact local bound by enumerating every Alice strategy.

    Bob's best response is analytic, so only ``2**mA`` assignments are scanned.
    Ties (a zero column sum) are expanded so that every optimal ``b`` is listed,
    up to ``max_maximizers`` strategies.
    """
    if ineq.mA > BRUTE_FORCE_MAX_SETTINGS:
        raise ValueError(f"mA = {ineq.mA} exceeds the enumeration guard {BRUTE_FORCE_MAX_SETTINGS}")
    M = ineq.dense()
    mar_A, mar_B = ineq.marginals()
    best = None
    hits: list[np.ndarray] = []
    for A in iter_sign_blocks(ineq.mA):
        cols = A @ M + mar_B
        vals = np.abs(cols).sum(axis=1) + A @ mar_A
        top = vals.max()
        if best is None or top > best:
            best, hits = top, []
        if top == best:
            hits.extend(A[vals == best])
    bound = best.item()

    maximizers = []
    for a in hits:
        col = a @ M + mar_B
        choices = [(1,) if c > 0 else (-1,) if c < 0 else (1, -1) for c in col]
        for b in itertools.product(*choices):
            maximizers.append((tuple(int(x) for x in a), tuple(b)))
            if len(maximizers) >= max_maximizers:
                break
        if len(maximizers) >= max_maximizers:
            break
    for a, b in maximizers:
        if ineq.lhv_value(a, b) != bound:
            raise AssertionError("brute-force maximizer does not attain the bound")
    return LocalBoundReport(bound, BoundMethod.brute_force, tuple(maximizers))


def fix_settings(ineq: BellInequality, alice_fixed: dict[int, int],
                 bob_fixed: dict[int, int]) -> tuple[BellInequality, Number]:
    """Substitute deterministic outcomes for some settings.

    Returns the residual inequality over the remaining settings (original order
    and names kept) together with the constant collected from fully fixed terms.
    """
    for fixed, m in ((alice_fixed, ineq.mA), (bob_fixed, ineq.mB)):
        for idx, val in fixed.items():
            if not 0 <= idx < m or val not in (-1, 1):
                raise ValueError(f"invalid fixed setting {idx} -> {val}")
    keep_A = [i for i in range(ineq.mA) if i not in alice_fixed]
    keep_B = [j for j in range(ineq.mB) if j not in bob_fixed]
    if not keep_A or not keep_B:
        raise ValueError("fixing every setting of one party leaves no inequality")
    new_row = {old: new for new, old in enumerate(keep_A)}
    new_col = {old: new for new, old in enumerate(keep_B)}

    marg_A = [ineq.marginal_A[i] for i in keep_A]
    marg_B = [ineq.marginal_B[j] for j in keep_B]
    constant: Number = sum(ineq.marginal_A[i] * v for i, v in alice_fixed.items())
    constant += sum(ineq.marginal_B[j] * v for j, v in bob_fixed.items())
    coeffs = []
    for r, c, v in ineq.coeffs:
        if r in alice_fixed and c in bob_fixed:
            constant += v * alice_fixed[r] * bob_fixed[c]
        elif r in alice_fixed:
            marg_B[new_col[c]] += v * alice_fixed[r]
        elif c in bob_fixed:
            marg_A[new_row[r]] += v * bob_fixed[c]
        else:
            coeffs.append((new_row[r], new_col[c], v))
    residual = BellInequality(
        len(keep_A), len(keep_B), tuple(coeffs), tuple(marg_A), tuple(marg_B),
        f"{ineq.label}|fixed",
        tuple(ineq.alice_settings[i] for i in keep_A),
        tuple(ineq.bob_settings[j] for j in keep_B),
    )
    return residual, constant


# -- serialization ---------------------------------------------------------

EXPORT_FORMATS = ("coordinate-text", "structured-text")


def _fmt(v: Number) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def _parse_number(tok: str) -> Number:
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def export_matrix(ineq: BellInequality, format: str = "coordinate-text") -> bytes:
    if format == "coordinate-text":
        buf = io.StringIO()
        buf.write(f"{ineq.mA} {ineq.mB} {ineq.nnz}\n")
        for r, c, v in ineq.coeffs:
            buf.write(f"{r + 1} {c + 1} {_fmt(v)}\n")
        return buf.getvalue().encode("ascii")
    if format == "structured-text":
        doc = {
            "label": ineq.label,
            "mA": ineq.mA,
            "mB": ineq.mB,
            "coeffs": [[r, c, v] for r, c, v in ineq.coeffs],
            "marginals": {"alice": list(ineq.marginal_A), "bob": list(ineq.marginal_B)},
            "settings": {"alice": list(ineq.alice_settings), "bob": list(ineq.bob_settings)},
        }
        return (json.dumps(doc, indent=1) + "\n").encode("utf-8")
    raise ValueError(f"unsupported format {format!r}; choose from {EXPORT_FORMATS}")


def import_matrix(data: bytes | str, format: str = "coordinate-text", label: str = "") -> BellInequality:
    text = data.decode() if isinstance(data, bytes) else data
    if format == "coordinate-text":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or len(lines[0]) != 3:
            raise ValueError("missing 'mA mB nnz' header")
        mA, mB, nnz = (int(t) for t in lines[0])
        body = lines[1:]
        if len(body) != nnz:
            raise ValueError(f"header announces {nnz} entries, found {len(body)}")
        coeffs = tuple((int(r) - 1, int(c) - 1, _parse_number(v)) for r, c, v in body)
        return BellInequality(mA, mB, coeffs, label=label)
    if format == "structured-text":
        doc = json.loads(text)
        return BellInequality(
            doc["mA"], doc["mB"], tuple(tuple(t) for t in doc["coeffs"]),
            tuple(doc["marginals"]["alice"]), tuple(doc["marginals"]["bob"]), doc["label"],
            tuple(doc.get("settings", {}).get("alice", ())),
            tuple(doc.get("settings", {}).get("bob", ())),
        )
    raise ValueError(f"unsupported format {format!r}; choose from {EXPORT_FORMATS}")
