import numpy as np
import pytest

from sncoint import (
    CointegrationSample,
    Deterministics,
    KernelSpec,
    RestrictionSpec,
    d_ols,
    fm_ols,
    im_ols,
    levels_residuals,
    ols,
    partial_sum,
    restricted_im_ols,
    scaled_variance,
)
from sncoint.estimators import augmented_regressors


def random_sample(rng, T=60, m=2, det=Deterministics.NONE, beta=None, endo=0.0):
    v = rng.standard_normal((T, m))
    x = np.cumsum(v, axis=0)
    u = rng.standard_normal(T) + endo * v.sum(axis=1)
    beta = np.ones(m) if beta is None else np.asarray(beta)
    y = x @ beta + u
    if det.n_columns:
        from sncoint import build_deterministics

        y = y + build_deterministics(det, T) @ np.arange(1.0, det.n_columns + 1)
    return CointegrationSample(y=y, x=x, det=det)


def brute_force_sandwich(Z):
    """Direct transcription: (sum Z Z')^{-1} (sum c c') (sum Z Z')^{-1}."""
    T, k = Z.shape
    SZ = np.zeros(k)
    running = []
    for t in range(T):
        SZ = SZ + Z[t]
        running.append(SZ.copy())
    ST = running[-1]
    A = np.zeros((k, k))
    B = np.zeros((k, k))
    for t in range(T):
        A += np.outer(Z[t], Z[t])
        c_t = ST - (running[t - 1] if t > 0 else np.zeros(k))
        B += np.outer(c_t, c_t)
    Ainv = np.linalg.inv(A)
    return Ainv @ B @ Ainv


class TestOls:
    def test_exact_fit(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((15, 3))
        coef = np.array([1.0, -2.0, 0.5])
        fit = ols(X @ coef, X)
        np.testing.assert_allclose(fit.params, coef, atol=1e-10)
        np.testing.assert_allclose(fit.resid, 0.0, atol=1e-10)

    def test_mean(self):
        fit = ols(np.array([1.0, 2.0, 3.0]), np.ones((3, 1)))
        assert fit.params[0] == pytest.approx(2.0)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((20, 3))
        y = rng.standard_normal(20)
        fit = ols(y, X)
        expected = np.linalg.solve(X.T @ X, X.T @ y)
        np.testing.assert_allclose(fit.params, expected, atol=1e-10)
        np.testing.assert_allclose(X.T @ fit.resid, 0.0, atol=1e-8)

    def test_rank_deficient(self):
        X = np.column_stack([np.ones(10), np.ones(10)])
        with pytest.raises(np.linalg.LinAlgError):
            ols(np.arange(10.0), X)


class TestImOls:
    def test_noiseless_recovers_beta_exactly(self):
        rng = np.random.default_rng(2)
        x = np.cumsum(rng.standard_normal((40, 2)), axis=0)
        beta = np.array([0.7, -1.2])
        s = CointegrationSample(y=x @ beta, x=x)
        fit = im_ols(s)
        np.testing.assert_allclose(fit.beta, beta, atol=1e-8)
        np.testing.assert_allclose(fit.gamma, 0.0, atol=1e-8)
        np.testing.assert_allclose(fit.resid, 0.0, atol=1e-7)

    def test_matches_normal_equations_on_small_fixed_data(self):
        x = np.array([[0.3], [0.8], [0.5], [1.4], [1.1], [1.9]])
        y = np.array([0.2, 0.9, 0.4, 1.5, 1.3, 1.7])
        s = CointegrationSample(y=y, x=x)
        fit = im_ols(s)
        Z = np.column_stack([np.cumsum(x[:, 0]), x[:, 0]])
        Sy = np.cumsum(y)
        expected = np.linalg.solve(Z.T @ Z, Z.T @ Sy)
        np.testing.assert_allclose(fit.params, expected, atol=1e-10)
        np.testing.assert_array_equal(fit.regressors, Z)

    def test_dimensions_with_intercept(self):
        rng = np.random.default_rng(3)
        s = random_sample(rng, T=50, m=2, det=Deterministics.INTERCEPT)
        fit = im_ols(s)
        assert fit.params.shape == (5,)
        assert fit.regressors.shape == (50, 5)
        assert fit.delta.shape == (1,)
        assert fit.beta.shape == (2,)
        assert fit.gamma.shape == (2,)

    def test_orthogonality(self):
        rng = np.random.default_rng(4)
        s = random_sample(rng)
        fit = im_ols(s)
        scale = np.linalg.norm(fit.regressors, axis=0) * np.linalg.norm(fit.resid)
        rel = np.abs(fit.regressors.T @ fit.resid) / np.maximum(scale, 1e-300)
        assert rel.max() < 1e-8

    def test_scale_equivariance(self):
        rng = np.random.default_rng(5)
        s = random_sample(rng, det=Deterministics.INTERCEPT)
        fit = im_ols(s)
        scaled = CointegrationSample(y=3.0 * s.y, x=s.x, det=s.det)
        fit3 = im_ols(scaled)
        np.testing.assert_allclose(fit3.params, 3.0 * fit.params, rtol=1e-9)
        np.testing.assert_allclose(fit3.resid, 3.0 * fit.resid, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(fit3.scaled_cov, fit.scaled_cov, rtol=1e-12)

    def test_collinear_rejected(self):
        rng = np.random.default_rng(6)
        v = rng.standard_normal(30)
        x = np.cumsum(np.column_stack([v, v]), axis=0)
        with pytest.raises(np.linalg.LinAlgError, match="singular"):
            im_ols(CointegrationSample(y=rng.standard_normal(30), x=x))


class TestScaledVariance:
    def test_matches_brute_force_tiny_case(self):
        # T=3, m=1: hand-enumerable regressor matrix
        x = np.array([[1.0], [2.0], [0.5]])
        y = np.array([0.9, 2.2, 0.4])
        s = CointegrationSample(y=np.concatenate([y, [1.0, 2.0]]), x=np.vstack([x, [[1.5], [2.5]]]))
        fit = im_ols(s)
        np.testing.assert_allclose(fit.scaled_cov, brute_force_sandwich(fit.regressors), rtol=1e-10)

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            s = random_sample(rng, T=int(rng.integers(12, 30)), m=1)
            fit = im_ols(s)
            np.testing.assert_allclose(fit.scaled_cov, brute_force_sandwich(fit.regressors), rtol=1e-9)
            np.testing.assert_allclose(scaled_variance(fit), fit.scaled_cov, rtol=1e-12)

    def test_symmetric_positive_semidefinite(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            s = random_sample(rng, T=int(rng.integers(15, 45)), m=int(rng.integers(1, 3)))
            V = im_ols(s).scaled_cov
            np.testing.assert_allclose(V, V.T, atol=1e-12)
            assert np.linalg.eigvalsh(V).min() > -1e-10

    def test_rate_scaling_stabilizes(self):
        # diag(T^{-1} I_m, I_m)-scaled sandwich settles as T grows
        rng = np.random.default_rng(9)
        norms = {}
        for T in (200, 400, 800):
            vals = []
            for _ in range(40):
                s = random_sample(rng, T=T, m=1)
                V = im_ols(s).scaled_cov
                A_inv = np.diag([T, 1.0])
                vals.append(np.linalg.norm(A_inv @ V @ A_inv))
            norms[T] = np.median(vals)
        # same order of magnitude across a 4x range of sample sizes
        assert 0.2 < norms[800] / norms[200] < 5.0


class TestRestrictedImOls:
    def test_no_op_when_already_satisfied(self):
        rng = np.random.default_rng(10)
        s = random_sample(rng)
        fit = im_ols(s)
        r = RestrictionSpec(R=np.eye(2), value=fit.beta.copy())
        np.testing.assert_allclose(restricted_im_ols(fit, r), fit.beta, atol=1e-12)

    def test_restriction_holds(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            m = int(rng.integers(1, 4))
            s = random_sample(rng, T=int(rng.integers(25, 60)), m=m)
            fit = im_ols(s)
            n_restr = int(rng.integers(1, m + 1))
            R = rng.standard_normal((n_restr, m))
            value = rng.standard_normal(n_restr)
            beta_r = restricted_im_ols(fit, RestrictionSpec(R=R, value=value))
            assert np.abs(R @ beta_r - value).max() <= 1e-10

    def test_matches_constrained_least_squares_oracle(self):
        rng = np.random.default_rng(12)
        s = random_sample(rng, T=40, m=2)
        fit = im_ols(s)
        r = RestrictionSpec(R=np.array([[1.0, 0.0]]), value=np.array([1.0]))
        beta_r = restricted_im_ols(fit, r)

        # oracle: minimize ||Sy - Z theta|| s.t. padded R theta = value,
        # solved through the first-order (KKT) system
        Z = fit.regressors
        Sy = partial_sum(s.y)
        R2 = np.array([[1.0, 0.0, 0.0, 0.0]])
        A = Z.T @ Z
        K = np.block([[A, R2.T], [R2, np.zeros((1, 1))]])
        rhs = np.concatenate([Z.T @ Sy, [1.0]])
        theta_r = np.linalg.solve(K, rhs)[:4]
        np.testing.assert_allclose(beta_r, theta_r[:2], atol=1e-8)

    def test_idempotent(self):
        rng = np.random.default_rng(13)
        s = random_sample(rng)
        fit = im_ols(s)
        r = RestrictionSpec(R=np.array([[1.0, 1.0]]), value=np.array([2.0]))
        first = restricted_im_ols(fit, r)
        # refit on data regenerated with the restricted coefficients: projecting
        # again with the same restriction returns the same vector
        again = restricted_im_ols(fit, r)
        np.testing.assert_allclose(first, again, rtol=1e-12)

    def test_padding_respects_deterministics(self):
        rng = np.random.default_rng(14)
        s = random_sample(rng, det=Deterministics.INTERCEPT)
        fit = im_ols(s)
        r = RestrictionSpec(R=np.eye(2), value=np.array([1.0, 1.0]))
        beta_r = restricted_im_ols(fit, r)
        np.testing.assert_allclose(beta_r, [1.0, 1.0], atol=1e-10)

    def test_rank_deficient_restriction_rejected(self):
        with pytest.raises(ValueError, match="full row rank"):
            RestrictionSpec(R=np.array([[1.0, 0.0], [2.0, 0.0]]), value=np.zeros(2))


class TestLevelsResiduals:
    def test_consistent_with_fit(self):
        rng = np.random.default_rng(15)
        s = random_sample(rng, det=Deterministics.INTERCEPT)
        fit = im_ols(s)
        resid = levels_residuals(s, fit)
        d = s.deterministics()
        np.testing.assert_allclose(resid, s.y - d @ fit.delta - s.x @ fit.beta, atol=1e-12)

    def test_zero_for_perfect_fit(self):
        rng = np.random.default_rng(16)
        x = np.cumsum(rng.standard_normal((30, 1)), axis=0)
        s = CointegrationSample(y=2.0 * x[:, 0], x=x)
        fit = im_ols(s)
        np.testing.assert_allclose(levels_residuals(s, fit), 0.0, atol=1e-8)


class TestFmOls:
    def test_corrections_vanish_for_orthogonal_errors(self):
        rng = np.random.default_rng(17)
        v = rng.standard_normal((50, 2))
        x = np.cumsum(v, axis=0)
        u = rng.standard_normal(50)
        # orthogonal to the regressors (so the static residual is u itself)
        # and to the innovations (so the estimated cross moments vanish)
        basis = np.column_stack([x, v])
        u -= basis @ np.linalg.solve(basis.T @ basis, basis.T @ u)
        s = CointegrationSample(y=x @ [1.0, 1.0] + u, x=x)
        # bandwidth below one: only the lag-zero moment enters, and it is zero
        fm = fm_ols(s, KernelSpec("bartlett", 0.5))
        expected = ols(s.y, x).params
        np.testing.assert_allclose(fm.beta, expected, atol=1e-10)

    def test_reduces_bias_under_endogeneity(self):
        rng = np.random.default_rng(18)
        bias_fm = []
        bias_ols = []
        for _ in range(500):
            T = 500
            nu = rng.standard_normal((T, 1))
            v = nu + 0.5 * np.vstack([np.zeros((1, 1)), nu[:-1]])
            e = rng.standard_normal(T)
            u = e + 0.8 * nu[:, 0]
            u_ar = np.empty(T)
            u_ar[0] = u[0]
            for t in range(1, T):
                u_ar[t] = 0.5 * u_ar[t - 1] + u[t]
            x = np.cumsum(v, axis=0)
            s = CointegrationSample(y=x[:, 0] + u_ar, x=x)
            bias_fm.append(fm_ols(s, KernelSpec("bartlett", "andrews")).beta[0] - 1.0)
            bias_ols.append(ols(s.y, x).params[0] - 1.0)
        assert abs(np.mean(bias_fm)) < abs(np.mean(bias_ols))

    def test_intercept_handled(self):
        rng = np.random.default_rng(19)
        s = random_sample(rng, det=Deterministics.INTERCEPT)
        fm = fm_ols(s, KernelSpec("bartlett", "andrews"))
        assert fm.beta.shape == (2,)
        assert fm.delta.shape == (1,)
        assert fm.conditional_lrv > 0
        assert fm.moment_inv_beta.shape == (2, 2)


class TestDOls:
    def test_forced_contemporaneous_only(self):
        rng = np.random.default_rng(20)
        s = random_sample(rng, T=50, m=1)
        fit = d_ols(s, max_leads_lags=0)
        v = s.innovations()
        X = np.column_stack([s.x, v])
        expected = ols(s.y, X)
        np.testing.assert_allclose(fit.params, expected.params, atol=1e-10)
        assert fit.leads_lags == 0

    def test_k1_matches_hand_built_regression(self):
        rng = np.random.default_rng(21)
        T = 40
        v = rng.standard_normal((T, 1))
        x = np.cumsum(v, axis=0)
        u = rng.standard_normal(T) + 1.5 * v[:, 0]  # strong contemporaneous link
        s = CointegrationSample(y=x[:, 0] + u, x=x)
        fit = d_ols(s, max_leads_lags=1)
        K = fit.leads_lags
        lo, hi = K + 1, T - K
        rows = slice(lo - 1, hi)
        blocks = [x[rows]]
        for j in range(-K, K + 1):
            blocks.append(v[lo - 1 + j : hi + j])
        X = np.column_stack(blocks)
        expected = ols(s.y[rows], X)
        np.testing.assert_allclose(fit.params, expected.params, atol=1e-10)

    def test_selection_scored_on_common_sample(self):
        from sncoint.estimators import _dols_design

        rng = np.random.default_rng(22)
        s = random_sample(rng, T=30, m=1)
        kmax = 2
        for K in range(kmax + 1):
            y_c, X_c = _dols_design(s, K, kmax + 1, 30 - kmax)
            assert y_c.shape[0] == 30 - 2 * kmax
            assert X_c.shape[1] == 1 + 1 * (2 * K + 1)
            np.testing.assert_array_equal(y_c, s.y[kmax : 30 - kmax])

    def test_infeasible_range(self):
        rng = np.random.default_rng(23)
        s = random_sample(rng, T=12, m=2)
        with pytest.raises(ValueError, match="infeasible"):
            d_ols(s, max_leads_lags=4)


class TestAugmentedRegressors:
    def test_block_layout(self):
        rng = np.random.default_rng(24)
        s = random_sample(rng, T=20, m=2, det=Deterministics.TREND)
        Z = augmented_regressors(s)
        assert Z.shape == (20, 2 + 4)
        d = s.deterministics()
        np.testing.assert_array_equal(Z[:, :2], np.cumsum(d, axis=0))
        np.testing.assert_array_equal(Z[:, 2:4], np.cumsum(s.x, axis=0))
        np.testing.assert_array_equal(Z[:, 4:], s.x)
