"""Unit-vector (quantum) values of correlation inequalities.

The see-saw iteration replaces every vector on one side by the normalized
weighted sum of the other side's vectors.  Each half step maximizes the
objective exactly for the fixed opposite side, so the tracked value never
decreases.  For a symmetric coefficient matrix the two sides can share one
family, and successive iterates play the roles of Alice and Bob.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .bell_core import BellInequality

log = logging.getLogger(__name__)

DEGENERATE_THRESHOLD = 1e-13
MONOTONE_SLACK = 1e-10
# relative excess over the local bound below which no violation is claimed
VIOLATION_MARGIN = 1e-9
THREADS_ENV = "BELLGROTH_THREADS"


class DegenerateRowError(ArithmeticError):
    """A weighted sum vanished, so the update direction is undefined."""


@dataclass
class VectorAssignment:
    alice: np.ndarray
    bob: np.ndarray

    def __post_init__(self):
        self.alice = np.atleast_2d(np.asarray(self.alice, dtype=np.float64))
        self.bob = np.atleast_2d(np.asarray(self.bob, dtype=np.float64))
        if self.alice.shape[1] != self.bob.shape[1]:
            raise ValueError("alice and bob vectors live in different dimensions")

    @property
    def d(self) -> int:
        return self.alice.shape[1]

    def norm_drift(self) -> float:
        sq = np.concatenate([np.einsum("ij,ij->i", v, v) for v in (self.alice, self.bob)])
        return float(np.max(np.abs(sq - 1.0)))

    def check_unit(self, tol: float = 1e-12) -> None:
        drift = self.norm_drift()
        if drift >= tol:
            raise ValueError(f"vectors are not unit norm (max | |v|^2 - 1 | = {drift:.3g})")


class InitScheme(str, Enum):
    paper_angles = "paper_angles"
    indexed_angles = "indexed_angles"
    seeded_random = "seeded_random"


@dataclass
class SeesawConfig:
    d: int
    max_iters: int = 1000
    value_tolerance: float = 1e-12
    init_scheme: InitScheme = InitScheme.indexed_angles
    seed: int = 0
    restarts: int = 1
    # "raise" aborts on a vanishing weighted sum; "keep" leaves that vector as is
    # (only sensible at d = 1, where ties between +1 and -1 are common)
    degenerate: str = "raise"
    record_history: bool = False

    def __post_init__(self):
        self.init_scheme = InitScheme(self.init_scheme)
        if self.d < 1:
            raise ValueError("dimension d must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.value_tolerance > 0:
            raise ValueError("value_tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.degenerate not in ("raise", "keep"):
            raise ValueError("degenerate must be 'raise' or 'keep'")


@dataclass
class SeesawReport:
    value: float
    assignment: VectorAssignment
    iterations_used: int
    min_denominator: float
    ratio: float
    converged: bool
    stop_reason: str
    local_bound: float
    restart_values: list[float] = field(default_factory=list)
    history: list[float] = field(default_factory=list)

    @property
    def violates(self) -> bool:
        return self.value > self.local_bound * (1 + VIOLATION_MARGIN)

    @property
    def visibility(self) -> float | None:
        return critical_visibility(self.local_bound, self.value) if self.violates else None

    def to_dict(self, ineq: BellInequality | None = None, config: SeesawConfig | None = None) -> dict:
        out = {
            "value": self.value,
            "ratio": self.ratio,
            "kg_lower_bound": self.ratio,
            "visibility": self.visibility,
            "local_bound": self.local_bound,
            "iterations_used": self.iterations_used,
            "min_denominator": self.min_denominator,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "restart_values": list(self.restart_values),
            "unit_norm_drift": self.assignment.norm_drift(),
        }
        if ineq is not None:
            out["inequality"] = ineq.label
        if config is not None:
            cfg = asdict(config)
            cfg["init_scheme"] = config.init_scheme.value
            out["config"] = cfg
        return out

    def to_json(self, ineq: BellInequality | None = None, config: SeesawConfig | None = None) -> str:
        return json.dumps(self.to_dict(ineq, config), indent=1, sort_keys=True)


def evaluate(ineq: BellInequality, asg: VectorAssignment) -> float:
    """sum_ij M_ij a_i . b_j (marginal terms play no role for unit vectors)."""
    if asg.alice.shape[0] != ineq.mA or asg.bob.shape[0] != ineq.mB:
        raise ValueError(
            f"assignment has {asg.alice.shape[0]}x{asg.bob.shape[0]} vectors, "
            f"inequality needs {ineq.mA}x{ineq.mB}")
    return float(np.sum(asg.alice * (ineq.sparse() @ asg.bob)))


def reduced_symmetric_value(a_vectors: np.ndarray) -> float:
    """|sum a_i|^2 + 2 sum_{i<j} |a_i - a_j|, the I(n,n) objective with a = b."""
    a = np.atleast_2d(np.asarray(a_vectors, dtype=np.float64))
    s = a.sum(axis=0)
    pair = pdist(a).sum() if len(a) > 1 else 0.0
    return float(s @ s + 2.0 * pair)


def _unit_differences(v: np.ndarray, n: int) -> np.ndarray:
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            diff = v[i] - v[j]
            norm = np.linalg.norm(diff)
            if norm == 0.0:
                unit = np.zeros(v.shape[1])
                unit[0] = 1.0
                out.append(unit)
            else:
                out.append(diff / norm)
    return np.array(out).reshape(-1, v.shape[1])


def expand_reduced(a_vectors: np.ndarray, b_vectors: np.ndarray) -> VectorAssignment:
    """Full I(n,n) assignment whose pair settings point along the differences."""
    a = np.atleast_2d(np.asarray(a_vectors, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b_vectors, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError("a and b families must have the same shape")
    n = a.shape[0]
    alice = np.vstack([a, _unit_differences(b, n)])
    bob = np.vstack([b, _unit_differences(a, n)])
    return VectorAssignment(alice, bob)


def grothendieck_lower_bound(value: float, local_bound: float) -> float:
    if local_bound <= 0:
        raise ValueError("local bound must be positive")
    return value / local_bound


def critical_visibility(local_bound: float, quantum_value: float) -> float:
    """Werner visibility above which the singlet correlations violate the inequality."""
    if local_bound <= 0:
        raise ValueError("local bound must be positive")
    if quantum_value <= local_bound:
        raise ValueError(f"no violation: quantum value {quantum_value} <= local bound {local_bound}")
    return local_bound / quantum_value


# -- initialization ----------------------------------------------------------

def sphere_from_angles(phi: np.ndarray) -> np.ndarray:
    """Hyperspherical coordinates: (m, d-1) angles -> (m, d) unit vectors."""
    m, k = phi.shape
    out = np.empty((m, k + 1))
    s = np.ones(m)
    for t in range(k):
        out[:, t] = s * np.cos(phi[:, t])
        s = s * np.sin(phi[:, t])
    out[:, k] = s
    return out


def initial_vectors(m: int, d: int, scheme: InitScheme | str,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    scheme = InitScheme(scheme)
    if scheme is InitScheme.seeded_random:
        if rng is None:
            raise ValueError("seeded_random initialization needs a generator")
        x = rng.standard_normal((m, d))
        return x / np.linalg.norm(x, axis=1, keepdims=True)
    k = np.arange(1, d, dtype=np.float64)[None, :]
    if scheme is InitScheme.paper_angles:
        phi = np.broadcast_to(k, (m, d - 1))
    else:
        i = np.arange(1, m + 1, dtype=np.float64)[:, None]
        phi = np.mod(i * k, 2 * np.pi)
    return sphere_from_angles(np.asarray(phi))


def _normalize_rows(target: np.ndarray, previous: np.ndarray, policy: str) -> tuple[np.ndarray, float]:
    norms = np.linalg.norm(target, axis=1)
    min_norm = float(norms.min())
    bad = norms < DEGENERATE_THRESHOLD
    if bad.any():
        if policy == "raise":
            raise DegenerateRowError(
                f"{int(bad.sum())} weighted sums below {DEGENERATE_THRESHOLD:g} "
                f"(smallest {min_norm:.3g}); try a different seed or init scheme")
        out = previous.copy()
        good = ~bad
        out[good] = target[good] / norms[good, None]
    else:
        out = target / norms[:, None]
    # second pass trims the last ulp of norm drift
    out /= np.linalg.norm(out, axis=1, keepdims=True)
    return out, min_norm


def _check_monotone(prev: float, value: float, it: int) -> None:
    if value < prev - MONOTONE_SLACK * max(1.0, abs(prev)):
        raise AssertionError(f"see-saw objective decreased at sweep {it}: {prev!r} -> {value!r}")


def _converged(prev: float, value: float, tol: float) -> bool:
    return abs(value - prev) / max(1.0, abs(value)) < tol


def _run_symmetric(M, a: np.ndarray, cfg: SeesawConfig):
    prev = -math.inf
    history = []
    stop = "max_iters"
    for it in range(1, cfg.max_iters + 1):
        new, min_den = _normalize_rows(M @ a, a, cfg.degenerate)
        # alice = new iterate, bob = previous iterate
        value = float(np.sum(new * (M @ a)))
        _check_monotone(prev, value, it)
        if cfg.record_history:
            history.append(value)
        old, a = a, new
        if _converged(prev, value, cfg.value_tolerance):
            stop = "tolerance"
            break
        prev = value
    return value, VectorAssignment(a, old), it, min_den, stop, history


def _run_alternating(M, MT, a: np.ndarray, cfg: SeesawConfig):
    prev = -math.inf
    history = []
    stop = "max_iters"
    b = np.zeros((M.shape[1], a.shape[1]))
    b[:, 0] = 1.0
    for it in range(1, cfg.max_iters + 1):
        b, den_b = _normalize_rows(MT @ a, b, cfg.degenerate)
        half = float(np.sum(b * (MT @ a)))
        _check_monotone(prev, half, it)
        a, den_a = _normalize_rows(M @ b, a, cfg.degenerate)
        value = float(np.sum(a * (M @ b)))
        _check_monotone(half, value, it)
        if cfg.record_history:
            history.append(value)
        if _converged(prev, value, cfg.value_tolerance):
            stop = "tolerance"
            break
        prev = value
    return value, VectorAssignment(a, b), it, min(den_a, den_b), stop, history


def _restart_inits(m: int, cfg: SeesawConfig) -> list[np.ndarray]:
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    inits = []
    for r, ss in enumerate(seeds):
        scheme = cfg.init_scheme if r == 0 else InitScheme.seeded_random
        inits.append(initial_vectors(m, cfg.d, scheme, np.random.default_rng(ss)))
    return inits


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _best_of(runs, local_bound: float) -> SeesawReport:
    values = [r[0] for r in runs]
    best = int(np.argmax(values))  # first index wins ties -> deterministic
    value, asg, it, min_den, stop, history = runs[best]
    return SeesawReport(
        value=value, assignment=asg, iterations_used=it, min_denominator=min_den,
        ratio=grothendieck_lower_bound(value, local_bound) if local_bound > 0 else math.nan,
        converged=stop == "tolerance", stop_reason=stop, local_bound=local_bound,
        restart_values=values, history=history,
    )


def _map(fn, items):
    threads = _thread_count()
    if threads == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _default_local_bound(ineq: BellInequality) -> float:
    from .bell_core import BRUTE_FORCE_MAX_SETTINGS, local_bound_bruteforce
    if ineq.mA <= BRUTE_FORCE_MAX_SETTINGS:
        return float(local_bound_bruteforce(ineq, max_maximizers=1).bound)
    return math.nan


def seesaw_symmetric(ineq: BellInequality, config: SeesawConfig,
                     local_bound: float | None = None,
                     init: np.ndarray | None = None) -> SeesawReport:
    """Shared-family see-saw for a symmetric coefficient matrix.

    ``init`` (shape (m, d)) overrides the configured scheme for the first restart.
    """
    if not ineq.is_symmetric():
        raise ValueError(f"{ineq.label}: symmetric see-saw needs a symmetric square matrix")
    M = ineq.sparse()
    inits = _restart_inits(ineq.mA, config)
    if init is not None:
        inits[0] = _validated_init(init, ineq.mA, config.d)
    runs = _map(lambda a: _run_symmetric(M, a, config), inits)
    bound = _default_local_bound(ineq) if local_bound is None else local_bound
    report = _best_of(runs, bound)
    log.info("%s d=%d: value %.9f after %d sweeps (%s)", ineq.label, config.d,
             report.value, report.iterations_used, report.stop_reason)
    return report


def seesaw_alternating(ineq: BellInequality, config: SeesawConfig,
                       local_bound: float | None = None,
                       init: np.ndarray | None = None) -> SeesawReport:
    """Two-family see-saw: update Bob from Alice, then Alice from Bob, each sweep."""
    M = ineq.sparse()
    MT = M.T.tocsr()
    inits = _restart_inits(ineq.mA, config)
    if init is not None:
        inits[0] = _validated_init(init, ineq.mA, config.d)
    runs = _map(lambda a: _run_alternating(M, MT, a, config), inits)
    bound = _default_local_bound(ineq) if local_bound is None else local_bound
    report = _best_of(runs, bound)
    log.info("%s d=%d: value %.9f after %d sweeps (%s)", ineq.label, config.d,
             report.value, report.iterations_used, report.stop_reason)
    return report


def _validated_init(init: Sequence, m: int, d: int) -> np.ndarray:
    a = np.array(init, dtype=np.float64)
    if a.shape != (m, d):
        raise ValueError(f"initial vectors have shape {a.shape}, expected {(m, d)}")
    return a / np.linalg.norm(a, axis=1, keepdims=True)
