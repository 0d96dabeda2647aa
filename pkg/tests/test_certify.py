import json
import math

import numpy as np
import pytest
import scipy.sparse as sp

from bellgroth.bell_core import build_inequality, chsh
from bellgroth.certify import (DENSE_LIMIT, certificate_from_fixed_point, min_eigenvalue_symmetric,
                               symmetric_embedding)
from bellgroth.constructions import gram_half_vectors
from bellgroth.quantum import (SeesawConfig, VectorAssignment, evaluate, expand_reduced,
                               seesaw_alternating, seesaw_symmetric)
from conftest import random_unit


def chsh_optimal():
    s = 1 / math.sqrt(2)
    return VectorAssignment([[1, 0], [0, 1]], [[s, s], [s, -s]])


class TestEmbedding:
    def test_chsh_blocks(self):
        E = symmetric_embedding(chsh())
        assert E.shape == (4, 4)
        np.testing.assert_array_equal(E[:2, 2:], np.array([[1, 1], [1, -1]]) / 2)
        np.testing.assert_array_equal(E[2:, :2], E[:2, 2:].T)
        np.testing.assert_array_equal(E[:2, :2], 0)
        np.testing.assert_array_equal(E, E.T)

    def test_quadratic_form(self, rng):
        ineq = build_inequality(4, 3)
        asg = VectorAssignment(random_unit(rng, ineq.mA, 5), random_unit(rng, ineq.mB, 5))
        V = np.vstack([asg.alice, asg.bob])
        assert abs(np.trace(symmetric_embedding(ineq) @ V @ V.T) - evaluate(ineq, asg)) < 1e-12

    def test_spectral_bound_chsh(self):
        # eigenvalues of [[0, C/2], [C^T/2, 0]] are +-singular values of C/2 = +-sqrt(2)/2
        w = np.linalg.eigvalsh(symmetric_embedding(chsh()))
        np.testing.assert_allclose(w, [-math.sqrt(2) / 2] * 2 + [math.sqrt(2) / 2] * 2, atol=1e-15)
        assert 4 * w[-1] >= 2 * math.sqrt(2) - 1e-12


class TestMinEigenvalue:
    def test_small(self):
        assert abs(min_eigenvalue_symmetric(np.eye(5)) - 1) < 1e-15
        assert abs(min_eigenvalue_symmetric(np.diag([3.0, -2.0, 5.0])) + 2) < 1e-15

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            min_eigenvalue_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @pytest.mark.parametrize("n", [5, 20, 50])
    def test_dense_accuracy(self, n, rng):
        A = rng.standard_normal((n, n))
        A = A + A.T
        ref = np.linalg.eigvalsh(A)[0]
        assert abs(min_eigenvalue_symmetric(A) - ref) <= 1e-9 * max(1, abs(ref))

    def test_iterative_path_matches_dense(self):
        # a sparse operator just above the dense cutoff
        ineq = build_inequality(45, 45)
        n = ineq.mA + ineq.mB
        assert n > DENSE_LIMIT
        E = symmetric_embedding(ineq, sparse=True)
        diag = sp.diags(np.linspace(0.5, 3.0, n))
        A = (diag - E).tocsr()
        ref = np.linalg.eigvalsh(A.toarray())[0]
        got = min_eigenvalue_symmetric(A, seed=1)
        assert abs(got - ref) < 1e-6
        assert got == min_eigenvalue_symmetric(A, seed=1)


class TestCertificate:
    def test_chsh(self):
        cert = certificate_from_fixed_point(chsh(), chsh_optimal())
        assert cert.verified
        assert abs(cert.bound - 2 * math.sqrt(2)) < 1e-8
        assert cert.gap < 1e-8
        Z = np.diag(cert.lam + cert.shift) - symmetric_embedding(chsh())
        assert np.linalg.eigvalsh(Z)[0] >= -1e-9

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_gram_half_closed_form_certified(self, n):
        g = gram_half_vectors(n)
        ineq = build_inequality(n, n)
        cert = certificate_from_fixed_point(ineq, expand_reduced(g, g))
        assert cert.verified
        assert abs(cert.bound - n * (3 * n - 1) / 2) < 1e-6
        assert cert.gap < 1e-5

    def test_bad_point_still_sound(self, rng):
        ineq = build_inequality(3, 3)
        asg = VectorAssignment(random_unit(rng, 6, 3), random_unit(rng, 6, 3))
        cert = certificate_from_fixed_point(ineq, asg)
        assert cert.verified and cert.shift > 0
        opt = 12.0  # n(3n-1)/2 at n = 3, certified above
        assert cert.bound >= opt - 1e-9

    def test_i54(self):
        ineq = build_inequality(5, 4)
        rep = seesaw_alternating(ineq, SeesawConfig(d=5, restarts=4, max_iters=5000))
        cert = certificate_from_fixed_point(ineq, rep.assignment)
        assert cert.verified
        assert abs(cert.bound - 28.390139) < 1e-2
        assert cert.gap < 1e-2

    def test_larger_shift_stays_valid(self):
        g = gram_half_vectors(4)
        ineq = build_inequality(4, 4)
        cert = certificate_from_fixed_point(ineq, expand_reduced(g, g))
        E = symmetric_embedding(ineq)
        for extra in (0.0, 1e-6, 0.1, 1.0):
            Z = np.diag(cert.lam + cert.shift + extra) - E
            assert np.linalg.eigvalsh(Z)[0] >= -1e-9

    def test_json(self):
        doc = json.loads(certificate_from_fixed_point(chsh(), chsh_optimal()).to_json())
        assert doc["inequality"] == "CHSH" and doc["verified"] is True
        assert {"lambda", "shift", "bound", "gap"} <= set(doc)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_duality_gap_closes(n):
    ineq = build_inequality(n, n)
    # the value settles long before the vectors: certify from a tightly converged point
    cfg = SeesawConfig(d=n, restarts=8, max_iters=20000, value_tolerance=1e-15)
    rep = seesaw_symmetric(ineq, cfg)
    cert = certificate_from_fixed_point(ineq, rep.assignment)
    assert cert.verified and cert.gap < 1e-5
