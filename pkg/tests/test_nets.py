"""Networks: gating invariants, normalization, Gaussian head, optimizer."""

import numpy as np
import pytest

from contractlab.errors import DimensionMismatch
from contractlab.nets import (Adam, Critic, MLPActor, MoEActor, RunningNorm,
                              clip_grad_norm, gaussian_entropy,
                              gaussian_log_prob, softmax, top_m_renormalize)


# -- gating ------------------------------------------------------------------


def test_softmax_properties(rng):
    z = rng.normal(size=(50, 7))
    p = softmax(z)
    assert np.allclose(p.sum(axis=-1), 1.0)
    assert np.all(p > 0)
    # shift invariance
    np.testing.assert_allclose(softmax(z + 3.0), p)


def test_top_m_renormalize_invariants(rng):
    for _ in range(10_000 // 100):
        p = softmax(rng.normal(size=(100, 5)))
        for m in (1, 2, 3, 5):
            sparse = top_m_renormalize(p, m)
            # exactly m nonzeros, each a renormalized original probability
            assert np.all((sparse > 0).sum(axis=-1) == m)
            assert np.allclose(sparse.sum(axis=-1), 1.0)
            # kept entries preserve relative proportions
            mask = sparse > 0
            ratio = np.where(mask, sparse / p, np.nan)
            finite = ratio[mask].reshape(100, m)
            assert np.allclose(finite, finite[:, :1])
            # idempotence
            np.testing.assert_allclose(top_m_renormalize(sparse, m), sparse)


def test_top_m_equals_dense_when_m_is_all(rng):
    p = softmax(rng.normal(size=(200, 4)))
    np.testing.assert_allclose(top_m_renormalize(p, 4), p, atol=1e-12)


def test_top_m_tie_break_lowest_index():
    p = np.array([0.25, 0.25, 0.25, 0.25])
    sparse = top_m_renormalize(p, 2)
    np.testing.assert_allclose(sparse, [0.5, 0.5, 0.0, 0.0])


def test_top_m_bounds_checked():
    p = np.array([0.5, 0.5])
    with pytest.raises(ValueError):
        top_m_renormalize(p, 0)
    with pytest.raises(ValueError):
        top_m_renormalize(p, 3)


# -- running normalization -----------------------------------------------------


def test_running_norm_matches_batch_statistics(rng):
    xs = rng.normal(3.0, 2.0, size=(500, 4))
    norm = RunningNorm(4)
    for x in xs:
        norm.update(x)
    np.testing.assert_allclose(norm.mean, xs.mean(axis=0), atol=1e-10)
    np.testing.assert_allclose(norm.m2 / norm.count, xs.var(axis=0),
                               atol=1e-10)
    z = np.array([norm.normalize(x) for x in xs])
    assert np.abs(z.mean(axis=0)).max() < 1e-8
    np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-6)


def test_running_norm_identity_before_two_samples():
    norm = RunningNorm(3)
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(norm.normalize(x), x)
    norm.update(x)
    np.testing.assert_array_equal(norm.normalize(x), x)


def test_running_norm_state_round_trip(rng):
    a = RunningNorm(2)
    for x in rng.normal(size=(50, 2)):
        a.update(x)
    b = RunningNorm(2)
    b.load_state_dict(a.state_dict())
    x = rng.normal(size=2)
    np.testing.assert_array_equal(a.normalize(x), b.normalize(x))


# -- Gaussian head -------------------------------------------------------------


def test_gaussian_log_prob_matches_scipy(rng):
    from scipy.stats import norm as scipy_norm
    mean = rng.normal(size=(10, 3))
    log_std = rng.normal(size=3) * 0.3
    actions = rng.normal(size=(10, 3))
    expected = scipy_norm.logpdf(actions, mean, np.exp(log_std)).sum(axis=-1)
    np.testing.assert_allclose(
        gaussian_log_prob(actions, mean, log_std), expected, atol=1e-12)


def test_gaussian_entropy_formula():
    log_std = np.array([0.1, -0.4])
    expected = np.sum(log_std + 0.5 * np.log(2.0 * np.pi * np.e))
    assert gaussian_entropy(log_std) == pytest.approx(expected)


# -- actors --------------------------------------------------------------------


def test_moe_mean_is_gated_expert_combination(rng):
    actor = MoEActor(4, 2, n_experts=3, top_m=2, rng=rng, init_scale=0.5,
                     action_scale=2.0)
    x = rng.normal(size=4)
    p = actor.gate_probs(x)
    sparse = top_m_renormalize(p, 2)
    experts = np.stack([actor.params["W_e"][m] @ x + actor.params["b_e"][m]
                        for m in range(3)])
    expected = 2.0 * sparse @ experts
    np.testing.assert_allclose(actor.mean(x), expected, atol=1e-12)


def test_moe_single_expert_when_top1(rng):
    actor = MoEActor(4, 2, n_experts=3, top_m=1, rng=rng, init_scale=0.5)
    # make the gate decisively prefer expert 1
    actor.params["b_g"] = np.array([0.0, 5.0, 0.0])
    x = rng.normal(size=4)
    expected = actor.params["W_e"][1] @ x + actor.params["b_e"][1]
    np.testing.assert_allclose(actor.mean(x), expected, atol=1e-12)


def test_actor_dimension_checks(rng):
    actor = MoEActor(4, 2, rng=rng)
    with pytest.raises(DimensionMismatch):
        actor.mean(np.zeros(5))
    mlp = MLPActor(4, 2, rng=rng)
    with pytest.raises(DimensionMismatch):
        mlp.mean(np.zeros(5))


def test_sample_statistics(rng):
    actor = MoEActor(3, 2, rng=rng, init_log_std=np.log(0.5),
                     action_bias=1.0)
    x = rng.normal(size=3)
    mu = actor.mean(x)
    draws = np.array([actor.sample(x, rng)[0] for _ in range(4000)])
    np.testing.assert_allclose(draws.mean(axis=0), mu, atol=0.05)
    np.testing.assert_allclose(draws.std(axis=0), 0.5, atol=0.05)


def test_sample_logp_consistent(rng):
    for actor in (MoEActor(3, 2, rng=rng), MLPActor(3, 2, rng=rng)):
        x = rng.normal(size=3)
        a, logp = actor.sample(x, rng)
        expected = gaussian_log_prob(a[None, :], actor.mean(x)[None, :],
                                     actor.log_std)[0]
        assert logp == pytest.approx(expected, abs=1e-12)


def test_actor_state_round_trip(rng):
    for make in (lambda: MoEActor(3, 2, rng=rng),
                 lambda: MLPActor(3, 2, rng=rng)):
        a = make()
        b = make()
        b.load_state_dict(a.state_dict())
        x = rng.normal(size=3)
        np.testing.assert_array_equal(a.mean(x), b.mean(x))


def test_critic_state_round_trip(rng):
    a = Critic(3, hidden=8, rng=rng)
    b = Critic(3, hidden=8, rng=np.random.default_rng(9))
    b.load_state_dict(a.state_dict())
    x = rng.normal(size=3)
    assert a.value(x) == b.value(x)


# -- optimizer ------------------------------------------------------------------


def test_adam_matches_reference_implementation(rng):
    params = {"w": rng.normal(size=(3, 2))}
    opt = Adam(params, lr=0.01, weight_decay=0.1)
    ref = params["w"].copy()
    m = np.zeros_like(ref)
    v = np.zeros_like(ref)
    for t in range(1, 6):
        g = rng.normal(size=(3, 2))
        g_wd = g + 0.1 * ref
        m = 0.9 * m + 0.1 * g_wd
        v = 0.999 * v + 0.001 * g_wd * g_wd
        ref = ref - 0.01 * (m / (1 - 0.9 ** t)) / (
            np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        opt.step(params, {"w": g})
        np.testing.assert_allclose(params["w"], ref, atol=1e-12)


def test_adam_zero_lr_is_noop(rng):
    params = {"w": rng.normal(size=4)}
    before = params["w"].copy()
    opt = Adam(params, lr=0.0)
    opt.step(params, {"w": rng.normal(size=4)})
    np.testing.assert_array_equal(params["w"], before)
    assert opt.t == 0


def test_adam_state_round_trip(rng):
    params = {"w": rng.normal(size=4)}
    opt = Adam(params, lr=0.01)
    opt.step(params, {"w": rng.normal(size=4)})
    clone = Adam(params, lr=0.01)
    clone.load_state_dict(opt.state_dict())
    p1, p2 = params["w"].copy(), params["w"].copy()
    g = rng.normal(size=4)
    opt.step({"w": p1}, {"w": g})
    clone.step({"w": p2}, {"w": g})
    np.testing.assert_array_equal(p1, p2)


def test_clip_grad_norm(rng):
    grads = {"a": rng.normal(size=(4, 4)), "b": rng.normal(size=7)}
    total = np.sqrt(sum(np.sum(g * g) for g in grads.values()))
    returned = clip_grad_norm(grads, 0.5)
    assert returned == pytest.approx(total)
    clipped = np.sqrt(sum(np.sum(g * g) for g in grads.values()))
    assert clipped == pytest.approx(0.5)
    # already-small gradients are untouched
    small = {"a": np.array([0.1, 0.1])}
    before = small["a"].copy()
    clip_grad_norm(small, 0.5)
    np.testing.assert_array_equal(small["a"], before)
