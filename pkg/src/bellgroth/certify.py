"""Dual certificates: verified upper bounds on the unit-vector maximum.

For the lifted symmetric matrix ``Mt`` of size mA + mB, any ``lam`` with
``Diag(lam) - Mt`` positive semidefinite satisfies, for every unit-vector
Gram matrix ``G``, ``tr(Mt G) <= tr(Diag(lam) G) = sum(lam)``.  At a see-saw
fixed point the natural choice is ``lam_p = |(Mt V)_p|``; any leftover
negative eigenvalue is repaired by a uniform shift, so the bound is always
sound and only its tightness depends on the fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bell_core import BellInequality
from .quantum import VectorAssignment, evaluate

PSD_TOLERANCE = 1e-9
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class DualCertificate:
    lam: np.ndarray
    raw_min_eigenvalue: float
    shift: float
    bound: float
    verified: bool
    residual_min_eigenvalue: float
    value: float
    label: str = ""

    @property
    def gap(self) -> float:
        return self.bound - self.value

    def to_dict(self) -> dict:
        return {
            "inequality": self.label,
            "lambda": self.lam.tolist(),
            "raw_min_eigenvalue": self.raw_min_eigenvalue,
            "residual_min_eigenvalue": self.residual_min_eigenvalue,
            "shift": self.shift,
            "bound": self.bound,
            "value": self.value,
            "gap": self.gap,
            "verified": self.verified,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def symmetric_embedding(ineq: BellInequality, sparse: bool = False):
    """[[0, M/2], [M^T/2, 0]] over the concatenated (alice, bob) family."""
    half = ineq.sparse() * 0.5
    out = sp.bmat([[None, half], [half.T, None]], format="csr")
    out.resize((ineq.mA + ineq.mB, ineq.mA + ineq.mB))
    return out if sparse else out.toarray()


def min_eigenvalue_symmetric(matrix, seed: int = 0, tol: float = 1e-12,
                             maxiter: int | None = None) -> float:
    """Smallest eigenvalue of a real symmetric matrix.

    Dense LAPACK up to ``DENSE_LIMIT``; beyond that implicitly restarted Lanczos
    on the shifted operator ``s I - A`` whose top eigenvalue is ``s - min(A)``.
    """
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError("matrix must be square")
    if n <= DENSE_LIMIT:
        A = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=np.float64)
        if not np.allclose(A, A.T, rtol=0, atol=1e-12):
            raise ValueError("matrix is not symmetric")
        return float(np.linalg.eigvalsh(A)[0])

    A = sp.csr_matrix(matrix, dtype=np.float64)
    # Gershgorin: every eigenvalue is at most the largest absolute row sum
    s = float(abs(A).sum(axis=1).max())
    shifted = sp.identity(n, format="csr") * s - A
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        top = spla.eigsh(shifted, k=1, which="LA", v0=v0, tol=tol,
                         maxiter=maxiter or 20 * n, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise ArithmeticError("Lanczos eigensolver did not converge") from exc
    return float(s - top[0])


def certificate_from_fixed_point(ineq: BellInequality, asg: VectorAssignment,
                                 seed: int = 0) -> DualCertificate:
    n = ineq.mA + ineq.mB
    Mt = symmetric_embedding(ineq, sparse=True)
    V = np.vstack([asg.alice, asg.bob])
    lam = np.linalg.norm(Mt @ V, axis=1)
    Z = sp.diags(lam) - Mt
    mu = min_eigenvalue_symmetric(Z, seed=seed)
    shift = max(0.0, -mu)
    if shift > 0:
        # pad by the eigensolver's own accuracy so the shifted matrix is PSD
        shift += 4 * np.finfo(float).eps * max(1.0, float(np.abs(lam).max())) * n
    residual = min_eigenvalue_symmetric(Z + shift * sp.identity(n), seed=seed)
    bound = float(lam.sum() + n * shift)
    return DualCertificate(
        lam=lam, raw_min_eigenvalue=mu, shift=shift, bound=bound,
        verified=residual >= -PSD_TOLERANCE, residual_min_eigenvalue=residual,
        value=evaluate(ineq, asg), label=ineq.label,
    )
