import numpy as np
import pytest

from attrsim.attribution import (Baseline, MethodConfig, expected_gradients,
                                 integrated_gradients)
from attrsim.network import DenseLayer, DenseNetwork, predict

from conftest import random_net


class TestIntegratedGradients:
    def test_linear_net_exact_for_any_steps(self, rng):
        beta = np.array([2.0, -3.0, 0.5])
        net = DenseNetwork([DenseLayer(beta[None, :], [1.0], "identity")])
        X = rng.normal(size=(4, 3))
        ref = rng.normal(size=3)
        for steps in (1, 2, 7):
            a = integrated_gradients(net, X, Baseline.fixed(ref), steps=steps)
            np.testing.assert_allclose(a.values, beta * (X - ref), atol=1e-12)

    def test_input_equal_to_baseline_gives_zero(self, rng):
        net = random_net(rng, [4, 6, 1])
        x = rng.normal(size=4)
        a = integrated_gradients(net, x[None, :], Baseline.fixed(x), steps=16)
        np.testing.assert_allclose(a.values, 0.0)

    def test_against_dense_quadrature_oracle(self, rng):
        # 512 steps must agree with a 100k-step quadrature of the same path
        net = random_net(rng, [5, 9, 7, 1])
        X = rng.normal(size=(2, 5))
        ref = Baseline.zeros()
        got = integrated_gradients(net, X, ref, steps=512).values
        want = integrated_gradients(net, X, ref, steps=100_000).values
        assert np.abs(got - want).max() < 1e-3

    def test_completeness_at_512_steps(self, rng):
        checked = 0
        for _ in range(10):
            net = random_net(rng, [5, 8, 6, 1])
            X = rng.normal(size=(6, 5))
            delta = predict(net, X) - predict(net, np.zeros((1, 5)))[0]
            # a relative check needs a denominator away from zero
            keep = np.abs(delta) > 0.05
            assert keep.sum() >= 2
            a = integrated_gradients(net, X[keep], Baseline.zeros(), steps=512)
            rel = np.abs(a.values.sum(axis=1) - delta[keep]) / np.abs(delta[keep])
            assert rel.max() < 1e-2
            checked += int(keep.sum())
        assert checked >= 30

    def test_invalid_steps_rejected(self, rng):
        net = random_net(rng, [3, 4, 1])
        with pytest.raises(ValueError, match="steps"):
            integrated_gradients(net, np.zeros((1, 3)), Baseline.zeros(), steps=0)


class TestExpectedGradients:
    def test_linear_net_matches_closed_form_within_3se(self, rng):
        beta = np.array([1.5, -2.0, 0.75])
        net = DenseNetwork([DenseLayer(beta[None, :], [0.0], "identity")])
        x = rng.normal(size=(1, 3))
        bg = rng.normal(1.0, 1.0, size=(400, 3))
        cfg = MethodConfig(mc_samples=200, seed=7)
        a = expected_gradients(net, x, bg, cfg)
        want = beta * (x - bg.mean(axis=0))
        # for a linear model the only estimator noise is the baseline draw
        se = np.abs(beta) * bg.std(axis=0, ddof=1) / np.sqrt(cfg.mc_samples)
        assert np.all(np.abs(a.values - want) <= 3.0 * se)

    def test_background_equal_to_input_gives_zero(self, rng):
        net = random_net(rng, [4, 6, 1])
        x = rng.normal(size=(1, 4))
        a = expected_gradients(net, x, x.copy(), MethodConfig(mc_samples=10, seed=1))
        np.testing.assert_allclose(a.values, 0.0, atol=1e-12)

    def test_seed_determinism(self, rng):
        net = random_net(rng, [4, 6, 1])
        X = rng.normal(size=(3, 4))
        bg = rng.normal(size=(25, 4))
        cfg = MethodConfig(mc_samples=12, seed=3)
        a = expected_gradients(net, X, bg, cfg).values
        b = expected_gradients(net, X, bg, cfg).values
        np.testing.assert_array_equal(a, b)

    def test_empty_background_rejected(self, rng):
        net = random_net(rng, [3, 4, 1])
        with pytest.raises(ValueError, match="background"):
            expected_gradients(net, np.zeros((1, 3)), np.zeros((0, 3)))

    def test_mean_relevance_centered_at_zero(self, rng):
        # the grand mean over independent estimator runs sits within 3 SE of
        # zero, where the SE combines draw, instance and background sampling
        net = random_net(rng, [4, 8, 6, 1])
        X = rng.normal(-0.5, 1.0, size=(10_000, 4))
        bg = rng.normal(-0.5, 1.0, size=(2_000, 4))
        runs = []
        values = None
        for s in range(6):
            a = expected_gradients(net, X, bg, MethodConfig(mc_samples=50, seed=s))
            runs.append(a.values.mean(axis=0))
            values = a.values
        runs = np.stack(runs)
        grand = runs.mean(axis=0)
        inst_var = values.var(axis=0, ddof=1) * (1.0 / X.shape[0] + 1.0 / bg.shape[0])
        se = np.sqrt(runs.var(axis=0, ddof=1) / runs.shape[0] + inst_var)
        assert np.all(np.abs(grand) < 3.0 * se)
