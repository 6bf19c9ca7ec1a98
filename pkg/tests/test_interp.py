import numpy as np
import pytest

from natcone import cones as C
from natcone.interp import build_interp, cheb_eval, chebyshev_vandermonde, graded_indices, n_basis


class TestChebEval:
    def test_t0_is_one(self):
        for x in (-1.0, -0.3, 0.0, 0.9):
            assert cheb_eval(0, [x]) == 1.0

    def test_t2_recurrence_value(self):
        assert cheb_eval(2, [0.5]) == pytest.approx(-0.5)

    def test_bivariate_product(self):
        # index of multi-degree (1, 1) in the graded ordering
        idx = graded_indices(2, 2).index((1, 1))
        assert cheb_eval(idx, [0.3, 0.4]) == pytest.approx(0.3 * 0.4)

    def test_graded_ordering_sizes(self):
        idx = graded_indices(3, 4)
        assert len(idx) == n_basis(3, 4)
        degrees = [sum(a) for a in idx]
        assert degrees == sorted(degrees)


class TestBuildInterp:
    def test_univariate_k100_dims(self):
        ip = build_interp(1, 100)
        assert (ip.U, ip.L, ip.Lt) == (201, 101, 100)
        assert ip.nu == 201

    def test_bivariate_k15_dims(self):
        ip = build_interp(2, 15)
        assert (ip.U, ip.nu) == (496, 376.0)

    def test_univariate_points_second_kind(self):
        ip = build_interp(1, 2)
        want = np.cos(np.pi * np.arange(5) / 4)
        np.testing.assert_allclose(ip.points[:, 0], want, atol=1e-15)

    def test_univariate_k1_hand_values(self):
        ip = build_interp(1, 1)
        assert (ip.U, ip.L, ip.Lt) == (3, 2, 1)
        pts = ip.points[:, 0]
        np.testing.assert_allclose(pts, [1.0, 0.0, -1.0], atol=1e-15)
        np.testing.assert_allclose(ip.P[0], np.stack([np.ones(3), pts], axis=1))
        # box-weight column at the three points: sqrt(1 - x^2) * T_0
        np.testing.assert_allclose(ip.P[1][:, 0], [0.0, 1.0, 0.0], atol=1e-12)

    def test_matrix_shapes(self):
        ip = build_interp(2, 2)
        assert ip.P[0].shape == (ip.U, ip.L)
        assert ip.P[1].shape == (ip.U, ip.Lt)
        assert ip.P[2].shape == (ip.U, ip.Lt)
        assert np.all(np.abs(ip.points) <= 1.0)

    def test_points_cap(self):
        with pytest.raises(ValueError, match="cap"):
            build_interp(1, 3, max_points=5)

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            build_interp(0, 1)
        with pytest.raises(ValueError):
            build_interp(1, 0)


class TestConditioning:
    def test_univariate_condition_number(self):
        ip = build_interp(1, 1000)
        assert np.linalg.cond(ip.P[0]) < 1e6

    def test_bivariate_selection_nonsingular(self):
        ip = build_interp(2, 3)
        V = chebyshev_vandermonde(ip.points, 2 * ip.k)
        assert V.shape == (ip.U, ip.U)
        rdiag = np.abs(np.diag(np.linalg.qr(V)[1]))
        assert rdiag.min() > 1e-10 * rdiag.max()

    def test_all_ones_interior_of_induced_cone(self):
        for m, k in ((1, 3), (2, 2)):
            ip = build_interp(m, k)
            K = C.WsosDual(ip.P)
            assert K.in_interior(np.ones(ip.U))
