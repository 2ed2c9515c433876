"""SVD contract, truncation optimality, and chart reparameterization."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from attnkit.errors import NoConvergence, RankOutOfRange, ShapeMismatch, SingularChartMap
from attnkit.gauge import center_scores
from attnkit.lowrank import (
    SvdResult,
    degenerate_truncation,
    extract_qk,
    reparameterize_chart,
    score_normal_form,
    svd,
    truncate,
)


def oracle_top_singular_value(m, iters=5000):
    """Power iteration on M^T M, no factorization routines involved."""
    gram = m.T @ m
    v = np.full(gram.shape[0], 1.0 / math.sqrt(gram.shape[0]))
    for _ in range(iters):
        w = gram @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
    return math.sqrt(float(v @ gram @ v))


def well_conditioned_map(rng, r):
    """Random GL(r) element with singular values in [0.5, 2]."""
    q1, _ = np.linalg.qr(rng.normal(size=(r, r)))
    q2, _ = np.linalg.qr(rng.normal(size=(r, r)))
    return q1 @ np.diag(rng.uniform(0.5, 2.0, r)) @ q2


class TestSvd:
    def test_diagonal_frozen(self):
        result = svd(np.diag([3.0, 1.0]))
        npt.assert_allclose(result.sigma, [3.0, 1.0])
        npt.assert_allclose(result.U, np.eye(2), atol=1e-15)
        npt.assert_allclose(result.V, np.eye(2), atol=1e-15)

    def test_zero_matrix(self):
        result = svd(np.zeros((3, 2)))
        npt.assert_allclose(result.sigma, [0.0, 0.0])

    def test_reconstruction(self):
        rng = np.random.default_rng(2)
        for shape in [(4, 4), (6, 3), (3, 7)]:
            m = rng.normal(size=shape)
            r = svd(m)
            npt.assert_allclose((r.U * r.sigma) @ r.V.T, m, atol=1e-10)

    def test_singular_values_match_trace_and_determinant(self):
        # Two identities that do not route through any factorization:
        # sum of squares is the Frobenius norm squared, and the product
        # is |det| for square input.
        rng = np.random.default_rng(4)
        for _ in range(10):
            m = rng.normal(size=(5, 5)) + np.eye(5)
            sigma = svd(m).sigma
            assert float((sigma**2).sum()) == pytest.approx(
                float((m**2).sum()), rel=1e-12
            )
            assert float(np.prod(sigma)) == pytest.approx(
                abs(float(np.linalg.det(m))), rel=1e-9
            )

    def test_top_singular_value_matches_power_iteration(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            m = rng.normal(size=(6, 4))
            assert svd(m).sigma[0] == pytest.approx(
                oracle_top_singular_value(m), rel=1e-8
            )

    def test_sign_convention_and_determinism(self):
        rng = np.random.default_rng(8)
        m = rng.normal(size=(5, 5))
        first = svd(m)
        for k in range(first.sigma.size):
            lead = int(np.argmax(np.abs(first.U[:, k])))
            assert first.U[lead, k] >= 0
        second = svd(m)
        npt.assert_array_equal(first.U, second.U)
        npt.assert_array_equal(first.V, second.V)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            svd([[1.0, np.nan]])

    def test_backend_failure_maps_to_no_convergence(self, monkeypatch):
        def explode(*args, **kwargs):
            raise np.linalg.LinAlgError("did not converge")

        monkeypatch.setattr(np.linalg, "svd", explode)
        with pytest.raises(NoConvergence):
            svd(np.eye(2))

    def test_result_validates_orthonormality(self):
        with pytest.raises(ValueError):
            SvdResult(np.ones((2, 2)), np.array([1.0, 1.0]), np.eye(2))
        with pytest.raises(ValueError):
            SvdResult(np.eye(2), np.array([1.0, 2.0]), np.eye(2))


class TestTruncate:
    def test_full_rank_is_lossless(self):
        rng = np.random.default_rng(10)
        m = rng.normal(size=(4, 5))
        approx, residual = truncate(m, 4)
        npt.assert_allclose(approx, m, atol=1e-12)
        assert residual <= 1e-12

    def test_diag_drop_smaller_value(self):
        approx, residual = truncate(np.diag([3.0, 1.0]), 1)
        npt.assert_allclose(approx, np.diag([3.0, 0.0]), atol=1e-14)
        assert residual == pytest.approx(1.0, abs=1e-14)

    def test_rank_zero(self):
        m = np.array([[3.0, 4.0]])
        approx, residual = truncate(m, 0)
        npt.assert_array_equal(approx, np.zeros((1, 2)))
        assert residual == pytest.approx(5.0, rel=1e-14)

    def test_residual_equals_tail_energy(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            m = rng.normal(size=(7, 5))
            sigma = svd(m).sigma
            for rank in range(6):
                _, residual = truncate(m, rank)
                tail = math.sqrt(float((sigma[rank:] ** 2).sum()))
                assert residual == pytest.approx(tail, abs=1e-10)

    def test_beats_random_factorizations(self):
        rng = np.random.default_rng(14)
        m = rng.normal(size=(6, 6))
        rank = 2
        _, residual = truncate(m, rank)
        for _ in range(200):
            x = rng.normal(size=(6, rank))
            y = rng.normal(size=(6, rank))
            contender = float(np.linalg.norm(m - x @ y.T))
            assert contender >= residual - 1e-12

    def test_rank_out_of_range(self):
        with pytest.raises(RankOutOfRange):
            truncate(np.eye(3), 4)
        with pytest.raises(RankOutOfRange):
            truncate(np.eye(3), -1)


class TestDegenerateTruncation:
    def test_tied_boundary_flags(self):
        assert degenerate_truncation([2.0, 1.0, 1.0], 2)
        assert not degenerate_truncation([3.0, 2.0, 1.0], 2)

    def test_edges_never_flag(self):
        assert not degenerate_truncation([1.0, 1.0], 0)
        assert not degenerate_truncation([1.0, 1.0], 2)


class TestExtractQk:
    def test_rank_one_outer_product(self):
        u = np.array([1.0, 2.0])
        v = np.array([3.0, 1.0, 2.0])
        q, l = extract_qk(np.outer(u, v), 1)
        npt.assert_allclose(q @ l.T, np.outer(u, v), atol=1e-12)

    def test_scalar_matrix_splits_evenly(self):
        q, l = extract_qk(np.array([[4.0]]), 1)
        npt.assert_allclose(q, [[2.0]])
        npt.assert_allclose(l, [[2.0]])

    def test_product_reproduces_truncation(self):
        rng = np.random.default_rng(16)
        m = rng.normal(size=(5, 7))
        for rank in (1, 3, 5):
            q, l = extract_qk(m, rank)
            approx, _ = truncate(m, rank)
            npt.assert_allclose(q @ l.T, approx, atol=1e-10)

    def test_symmetric_energy_split(self):
        rng = np.random.default_rng(18)
        m = rng.normal(size=(4, 4))
        q, l = extract_qk(m, 4)
        npt.assert_allclose(
            (q**2).sum(axis=0), (l**2).sum(axis=0), rtol=1e-10
        )


class TestReparameterizeChart:
    def test_identity_map(self):
        rng = np.random.default_rng(20)
        q = rng.normal(size=(5, 2))
        l = rng.normal(size=(6, 2))
        q2, l2 = reparameterize_chart(q, l, np.eye(2))
        npt.assert_allclose(q2, q)
        npt.assert_allclose(l2, l)

    def test_scalar_map_moves_scale_between_factors(self):
        q = np.array([[1.0, 0.0]])
        l = np.array([[2.0, 4.0]])
        q2, l2 = reparameterize_chart(q, l, 2.0 * np.eye(2))
        npt.assert_allclose(q2, [[2.0, 0.0]])
        npt.assert_allclose(l2, [[1.0, 2.0]])

    def test_products_are_invariant(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            r = int(rng.integers(1, 5))
            q = rng.normal(size=(6, r))
            l = rng.normal(size=(4, r))
            a = well_conditioned_map(rng, r)
            q2, l2 = reparameterize_chart(q, l, a)
            assert np.abs(q2 @ l2.T - q @ l.T).max() <= 1e-8

    def test_singular_map_refused(self):
        q = np.ones((3, 2))
        l = np.ones((3, 2))
        with pytest.raises(SingularChartMap):
            reparameterize_chart(q, l, np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            reparameterize_chart(np.ones((3, 2)), np.ones((3, 2)), np.eye(3))


class TestScoreNormalForm:
    def test_separable_scores_need_no_rank(self):
        r = np.array([1.0, -2.0, 0.5])
        c = np.array([0.0, 3.0])
        chart = score_normal_form(r[:, None] + c[None, :], 0)
        assert chart.frobenius_residual <= 1e-12
        npt.assert_allclose(chart.key_bias, c - c.mean(), atol=1e-14)

    def test_planted_rank_one_interaction(self):
        # Zero-mean factors survive double centering untouched, so a
        # rank-1 chart should recover the planted product exactly.
        u = np.array([1.0, -1.0, 2.0, -2.0])
        v = np.array([3.0, -3.0])
        scores = np.outer(u, v) + 5.0
        chart = score_normal_form(scores, 1)
        assert chart.rank == 1
        assert chart.frobenius_residual <= 1e-10
        npt.assert_allclose(chart.Q @ chart.L.T, np.outer(u, v), atol=1e-10)

    def test_full_rank_reproduces_row_centered_scores(self):
        rng = np.random.default_rng(24)
        scores = rng.normal(size=(5, 6))
        chart = score_normal_form(scores, 5)
        rebuilt = chart.key_bias[None, :] + chart.Q @ chart.L.T
        npt.assert_allclose(rebuilt, center_scores(scores, mode="row"), atol=1e-10)

    def test_residual_matches_direct_truncation(self):
        rng = np.random.default_rng(26)
        scores = rng.normal(size=(6, 6))
        interaction = center_scores(scores, mode="double").interaction
        for rank in (1, 2, 4):
            chart = score_normal_form(scores, rank)
            _, residual = truncate(interaction, rank)
            assert chart.frobenius_residual == pytest.approx(residual, abs=1e-12)

    def test_degenerate_flag_propagates(self):
        scores = np.diag([1.0, 1.0, 1.0, 1.0]) * 4.0
        interaction = center_scores(scores, mode="double").interaction
        sigma = svd(interaction).sigma
        chart = score_normal_form(scores, 1)
        assert chart.degenerate == degenerate_truncation(sigma, 1)

    def test_rank_out_of_range(self):
        with pytest.raises(RankOutOfRange):
            score_normal_form(np.eye(3), 5)
