import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphasvrg import problems
from alphasvrg.problems import ProblemInstance


def central_difference(f, w, h=1e-6):
    g = np.zeros_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (f(w + e) - f(w - e)) / (2 * h)
    return g


class TestGenerate:
    def test_default_size(self):
        p = problems.generate(50, 2, 1.0, 3)
        assert p.n_samples == 50 and p.dim == 2
        assert p.features.shape == (50, 2) and p.labels.shape == (50,)

    def test_noise_free_interpolates(self, noiseless):
        H, w = noiseless.features, noiseless.ground_truth
        np.testing.assert_array_equal(noiseless.labels, H[:, 0] * w[0] + H[:, 1] * w[1])
        np.testing.assert_allclose(noiseless.minimizer, noiseless.ground_truth, rtol=0, atol=1e-10)

    def test_labels_match_seeded_stream(self):
        seed = 987654321
        p = problems.generate(4, 2, 0.5, seed)
        stream = np.random.default_rng(seed)
        w = stream.standard_normal(2)
        v = np.sqrt(0.5) * stream.standard_normal(4)
        H = np.random.default_rng([seed, 0]).standard_normal((4, 2))
        np.testing.assert_array_equal(p.features, H)
        np.testing.assert_array_equal(p.ground_truth, w)
        np.testing.assert_allclose(p.labels, np.array([H[n] @ w + v[n] for n in range(4)]), rtol=1e-15)

    def test_regeneration_bit_identical(self):
        a = problems.generate(50, 2, 1.5, 2 ** 64 - 1)
        b = problems.generate(50, 2, 1.5, 2 ** 64 - 1)
        assert a.features.tobytes() == b.features.tobytes()
        assert a.labels.tobytes() == b.labels.tobytes()

    def test_rejects_underdetermined(self):
        with pytest.raises(ValueError):
            problems.generate(1, 2, 0.1, 0)

    def test_degenerate_draws_are_retried(self):
        # N == M == 1: a draw is degenerate only if h == 0, so generation succeeds
        p = problems.generate(1, 1, 0.0, 5)
        assert problems.constants(p).nu > 0

    def test_instances_are_immutable(self, noisy):
        with pytest.raises(ValueError):
            noisy.features[0, 0] = 1.0

    def test_invalid_instance(self):
        with pytest.raises(ValueError):
            ProblemInstance(np.ones((2, 2)), np.ones(3), np.zeros(2))
        with pytest.raises(ValueError):
            ProblemInstance(np.array([[np.nan, 1.0]]), np.ones(1), np.zeros(2))


class TestRiskAndGradients:
    def test_risk_zero_at_ground_truth(self, noiseless):
        assert problems.risk(noiseless, noiseless.ground_truth) == 0.0

    def test_risk_is_mean_of_losses(self, noisy):
        w = np.array([0.3, -1.2])
        expected = sum(problems.loss(noisy, n, w) for n in range(noisy.n_samples)) / noisy.n_samples
        assert problems.risk(noisy, w) == pytest.approx(expected, rel=1e-13)

    def test_single_term_risk(self):
        p = ProblemInstance(np.array([[1.0, 0.0]]), np.array([2.0]), np.zeros(2))
        assert problems.risk(p, np.zeros(2)) == 4.0

    def test_dimension_mismatch(self, noisy):
        with pytest.raises(ValueError):
            problems.risk(noisy, np.zeros(3))
        with pytest.raises(ValueError):
            problems.full_gradient(noisy, np.zeros(1))

    def test_loss_gradient_literal(self):
        p = ProblemInstance(np.array([[1.0, 1.0]]), np.array([0.0]), np.zeros(2))
        np.testing.assert_array_equal(problems.loss_gradient(p, 0, np.array([1.0, 1.0])), [4.0, 4.0])

    def test_loss_gradient_zero_at_truth(self, noiseless):
        for n in range(noiseless.n_samples):
            np.testing.assert_array_equal(problems.loss_gradient(noiseless, n, noiseless.ground_truth), 0.0)

    def test_loss_gradient_index_error(self, noisy):
        with pytest.raises(IndexError):
            problems.loss_gradient(noisy, 50, np.zeros(2))
        with pytest.raises(IndexError):
            problems.loss_gradient(noisy, -1, np.zeros(2))

    def test_loss_gradient_finite_difference(self, noisy):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(noisy.n_samples))
            w = rng.standard_normal(2) * 2
            fd = central_difference(lambda v: problems.loss(noisy, n, v), w)
            np.testing.assert_allclose(problems.loss_gradient(noisy, n, w), fd, rtol=1e-6, atol=1e-8)

    def test_full_gradient_is_mean(self, small):
        w = np.array([0.5, -0.25, 2.0])
        expected = np.zeros(3)
        for n in range(small.n_samples):
            expected += problems.loss_gradient(small, n, w)
        np.testing.assert_array_equal(problems.full_gradient(small, w), expected / small.n_samples)

    def test_full_gradient_finite_difference(self, small):
        w = np.array([0.1, 0.7, -0.4])
        fd = central_difference(lambda v: problems.risk(small, v), w)
        np.testing.assert_allclose(problems.full_gradient(small, w), fd, rtol=1e-6, atol=1e-8)

    def test_full_gradient_vanishes_at_minimizer(self, noisy, small):
        for p in (noisy, small):
            w_o = p.minimizer
            assert np.linalg.norm(problems.full_gradient(p, w_o)) <= 1e-10 * max(1.0, np.linalg.norm(w_o))


class TestConstants:
    def test_basis_features(self):
        H = np.zeros((4, 2))
        H[:, 0] = 1.0
        H[1, 1] = 0.0
        # make the Hessian full rank with one extra sample on e2
        H = np.vstack([H, [[0.0, 1.0]]])
        p = ProblemInstance(H, np.arange(5.0), np.zeros(2))
        c = problems.constants(p)
        np.testing.assert_array_equal(c.per_sample_delta, [2.0] * 5)
        assert c.delta_sq == 4.0

    def test_noise_free_sigma_zero(self, noiseless):
        assert problems.constants(noiseless).sigma_sq == pytest.approx(0.0, abs=1e-20)

    def test_nu_matches_quadratic_formula(self):
        for seed in range(10):
            p = problems.generate(50, 2, 1.0, seed)
            S = 2.0 * p.features.T @ p.features / p.n_samples
            tr, det = S[0, 0] + S[1, 1], S[0, 0] * S[1, 1] - S[0, 1] ** 2
            smallest = (tr - np.sqrt(tr * tr - 4 * det)) / 2
            assert problems.constants(p).nu == pytest.approx(smallest, rel=1e-10)

    def test_nu_general_dimension(self, small):
        c = problems.constants(small)
        assert c.nu == pytest.approx(np.linalg.eigvalsh(small.hessian)[0], rel=1e-12)

    def test_defining_sums(self, noisy):
        c = problems.constants(noisy)
        H = noisy.features
        assert c.delta_sq == pytest.approx(np.mean([(2 * h @ h) ** 2 for h in H]), rel=1e-13)
        grads = [problems.loss_gradient(noisy, n, c.minimizer) for n in range(noisy.n_samples)]
        assert c.sigma_sq == pytest.approx(np.mean([g @ g for g in grads]), rel=1e-12)
        assert c.nu <= np.linalg.eigvalsh(noisy.hessian).min() * (1 + 1e-12)

    def test_lipschitz_per_sample(self, noisy):
        c = problems.constants(noisy)
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n = int(rng.integers(noisy.n_samples))
            w1, w2 = rng.standard_normal((2, 2)) * 5
            lhs = np.linalg.norm(problems.loss_gradient(noisy, n, w1) - problems.loss_gradient(noisy, n, w2))
            assert lhs <= c.per_sample_delta[n] * np.linalg.norm(w1 - w2) * (1 + 1e-12)

    def test_strong_convexity(self, noisy):
        c = problems.constants(noisy)
        rng = np.random.default_rng(2)
        J_o = problems.risk(noisy, c.minimizer)
        for w in rng.standard_normal((500, 2)) * 4:
            d = w - c.minimizer
            assert problems.risk(noisy, w) >= J_o + 0.5 * c.nu * (d @ d) - 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_gradient_affine_in_model(seed, w):
    p = problems.generate(20, 2, 1.0, seed)
    w = np.array(w)
    w_o = p.minimizer
    lhs = problems.full_gradient(p, w) - problems.full_gradient(p, w_o)
    np.testing.assert_allclose(lhs, p.hessian @ (w - w_o), rtol=0, atol=1e-10 * (1 + np.abs(lhs).max()))


def test_csv_round_trip(tmp_path, noisy):
    meta = problems.save(noisy, tmp_path / "p.csv")
    assert meta.name == "p.csv.json"
    q = problems.load(tmp_path / "p.csv")
    np.testing.assert_array_equal(q.features, noisy.features)
    np.testing.assert_array_equal(q.labels, noisy.labels)
    np.testing.assert_array_equal(q.ground_truth, noisy.ground_truth)
    assert (q.noise_variance, q.data_seed) == (noisy.noise_variance, noisy.data_seed)
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "h0,h1,gamma"
