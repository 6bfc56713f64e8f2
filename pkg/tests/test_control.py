import numpy as np
import pytest
import torch

from pulsekit import ConfigurationError
from pulsekit.agents import ReplayBuffer, SacAgent, SacHyperparams, mini_sac_observe
from pulsekit.env import Observation


def make_obs(value: float, psi=None, act=None, stack=5):
    return Observation(
        traces=np.full((stack, 64, 64), value),
        psi_norm=np.asarray(psi if psi is not None else [0.1, 0.2, 0.3], dtype=float),
        prev_action_norm=np.asarray(act if act is not None else [0.0, 0.0, 0.0], dtype=float),
    )


def obs_seq(values, stack=5):
    """Observations the way an env would emit them: stack fills then rolls."""
    frames = [np.full((64, 64), v) for v in values]
    out = []
    for t in range(len(values)):
        if t == 0:
            stacked = np.stack([frames[0]] * stack)
        else:
            prev = out[-1].traces
            stacked = np.concatenate([prev[1:], frames[t][None]])
        out.append(
            Observation(
                traces=stacked,
                psi_norm=np.full(3, values[t]),
                prev_action_norm=np.zeros(3),
            )
        )
    return out


def fill_episode(buf, values, b=2.0):
    seq = obs_seq(values, stack=buf.frame_stack)
    buf.begin_episode(seq[0])
    for t in range(1, len(seq)):
        done = t == len(seq) - 1
        buf.push(np.zeros(3), reward=float(values[t]), next_obs=seq[t], done=done, latent_b=b)


class TestReplay:
    def test_uniform_sampling(self):
        buf = ReplayBuffer(capacity=64, frame_stack=3, store_frames=False)
        fill_episode(buf, np.linspace(0.0, 1.0, 11))  # 10 transitions
        assert len(buf) == 10
        rng = np.random.default_rng(0)
        draws = 1_000_000
        chunks = [buf.sample(10, rng)["rewards"] for _ in range(draws // 10)]
        keys = np.round(np.concatenate(chunks) * 10).astype(int)
        uniq, counts = np.unique(keys, return_counts=True)
        assert len(uniq) == 10
        expected = draws / 10
        sigma = np.sqrt(draws * 0.1 * 0.9)
        assert np.all(np.abs(counts - expected) <= 3 * sigma)

    def test_stack_reconstruction_matches_env_semantics(self):
        buf = ReplayBuffer(capacity=64, frame_stack=4)
        values = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
        fill_episode(buf, values)
        seq = obs_seq(values, stack=4)
        rng = np.random.default_rng(1)
        batch = buf.sample(5, rng)
        for i in range(5):
            # reward values[t] belongs to the transition seq[t-1] -> seq[t]
            t = int(round(batch["rewards"][i] * 10)) - 1
            want_next = np.round(255 * seq[t].traces) / 255
            want_obs = np.round(255 * seq[t - 1].traces) / 255
            assert np.allclose(batch["next_frames"][i], want_next, atol=1e-6)
            assert np.allclose(batch["obs_frames"][i], want_obs, atol=1e-6)

    def test_fifo_eviction_and_wraparound(self):
        buf = ReplayBuffer(capacity=24, frame_stack=3, store_frames=False)
        for ep in range(10):
            fill_episode(buf, np.linspace(0.1, 0.9, 6))
        assert len(buf) <= 24
        rng = np.random.default_rng(2)
        batch = buf.sample(8, rng)
        assert batch["obs_vec"].shape == (8, 6)

    def test_push_requires_episode(self):
        buf = ReplayBuffer(capacity=32, frame_stack=3, store_frames=False)
        with pytest.raises(ConfigurationError):
            buf.push(np.zeros(3), 0.0, make_obs(0.5, stack=3), False, 2.0)

    def test_sample_needs_enough_data(self):
        buf = ReplayBuffer(capacity=32, frame_stack=3, store_frames=False)
        fill_episode(buf, [0.1, 0.2])
        with pytest.raises(ConfigurationError):
            buf.sample(16, np.random.default_rng(3))

    def test_frame_quantization(self):
        buf = ReplayBuffer(capacity=32, frame_stack=2)
        fill_episode(buf, [0.123456, 0.654321])
        batch = buf.sample(1, np.random.default_rng(4))
        got = batch["next_frames"][0, -1, 0, 0]
        # frames come back as float32, so allow single-precision slack
        assert got == pytest.approx(np.round(255 * 0.654321) / 255, abs=1e-6)

    def test_state_round_trip(self):
        buf = ReplayBuffer(capacity=48, frame_stack=3)
        fill_episode(buf, np.linspace(0.1, 0.9, 8))
        clone = ReplayBuffer(capacity=48, frame_stack=3)
        clone.load_state(buf.state())
        a = buf.sample(4, np.random.default_rng(5))
        b = clone.sample(4, np.random.default_rng(5))
        for k in a:
            assert np.array_equal(a[k], b[k])


def vec_batch(rng, size=8, dtype=np.float32):
    return {
        "obs_vec": rng.uniform(-1, 1, (size, 6)).astype(dtype),
        "next_vec": rng.uniform(-1, 1, (size, 6)).astype(dtype),
        "actions": rng.uniform(-1, 1, (size, 3)).astype(dtype),
        "rewards": rng.uniform(0, 1, size).astype(dtype),
        "dones": (rng.uniform(size=size) < 0.2).astype(dtype),
        "latents": rng.uniform(1, 3.5, size).astype(dtype),
    }


class TestSac:
    def test_mode_validation(self):
        with pytest.raises(ConfigurationError):
            SacAgent(mode="ppo")

    def test_mini_observe_strips_traces(self):
        obs = make_obs(0.7, psi=[0.1, -0.2, 0.9], act=[0.5, 0.0, -1.0])
        vec = mini_sac_observe(obs)
        assert vec.shape == (6,)
        assert np.array_equal(vec, [0.1, -0.2, 0.9, 0.5, 0.0, -1.0])
        other = make_obs(0.1, psi=[0.1, -0.2, 0.9], act=[0.5, 0.0, -1.0])
        assert np.array_equal(mini_sac_observe(other), vec)

    def test_actions_bounded_and_reproducible(self):
        agent = SacAgent(mode="mini-sac", seed=7)
        rng = np.random.default_rng(6)
        for _ in range(200):
            a = agent.policy_act(make_obs(rng.uniform(), psi=rng.uniform(-1, 1, 3)), deterministic=False)
            assert np.all(np.abs(a) <= 1.0)
        # same seed means same weights and same noise stream
        obs = make_obs(0.5)
        twin_a = SacAgent(mode="mini-sac", seed=7)
        twin_b = SacAgent(mode="mini-sac", seed=7)
        for _ in range(5):
            assert np.allclose(twin_a.policy_act(obs), twin_b.policy_act(obs))
        other = SacAgent(mode="mini-sac", seed=8)
        assert not np.allclose(other.policy_act(obs), SacAgent(mode="mini-sac", seed=7).policy_act(obs))

    def test_zeroed_head_gives_zero_action(self):
        agent = SacAgent(mode="mini-sac")
        with torch.no_grad():
            agent.actor.net[-1].weight.zero_()
            agent.actor.net[-1].bias.zero_()
        a = agent.policy_act(make_obs(0.3), deterministic=True)
        assert np.array_equal(a, np.zeros(3))

    def test_deterministic_act_is_stable(self):
        agent = SacAgent(mode="sac", seed=1)
        obs = make_obs(0.4)
        assert np.array_equal(agent.policy_act(obs, True), agent.policy_act(obs, True))

    def test_critic_target_reduces_to_reward_when_terminal(self):
        agent = SacAgent(mode="mini-sac", hyperparams=SacHyperparams(gamma=0.0))
        b = agent._to_tensors(vec_batch(np.random.default_rng(8)))
        assert torch.equal(agent.critic_targets(b), b["rewards"])
        agent2 = SacAgent(mode="mini-sac")  # gamma 0.9, all-terminal batch
        batch = vec_batch(np.random.default_rng(9))
        batch["dones"] = np.ones_like(batch["dones"])
        b2 = agent2._to_tensors(batch)
        assert torch.allclose(agent2.critic_targets(b2), b2["rewards"])

    def test_identical_twins_agree(self):
        agent = SacAgent(mode="mini-sac")
        agent.critic.q2.load_state_dict(agent.critic.q1.state_dict())
        x = torch.randn(4, 9)
        q1, q2 = agent.critic(x)
        assert torch.equal(q1, q2)

    def test_critic_gradient_matches_finite_differences(self):
        torch.manual_seed(0)
        agent = SacAgent(mode="mini-sac", seed=3)
        agent.critic.double()
        batch = vec_batch(np.random.default_rng(10), size=3, dtype=np.float64)
        b = agent._to_tensors(batch)
        target_q = b["rewards"] + 0.5  # fixed targets keep the objective static
        loss = agent.critic_loss(b, target_q)
        loss.backward()
        weight = agent.critic.q1[0].weight
        for idx in [(0, 0), (3, 4), (100, 2)]:
            analytic = float(weight.grad[idx])
            h = 1e-6
            with torch.no_grad():
                orig = float(weight[idx])
                weight[idx] = orig + h
                hi = float(agent.critic_loss(b, target_q))
                weight[idx] = orig - h
                lo = float(agent.critic_loss(b, target_q))
                weight[idx] = orig
            numeric = (hi - lo) / (2 * h)
            assert analytic == pytest.approx(numeric, rel=1e-4, abs=1e-10)

    def test_update_runs_and_reports_losses(self):
        agent = SacAgent(mode="mini-sac", seed=4)
        rng = np.random.default_rng(11)
        for _ in range(5):
            losses = agent.sac_update(vec_batch(rng, size=16))
        assert set(losses) == {"critic", "actor", "temperature"}
        assert all(np.isfinite(v) for v in losses.values())
        assert agent.temperature > 0

    def test_pixel_update_runs(self):
        agent = SacAgent(mode="sac", frame_stack=3, seed=5)
        rng = np.random.default_rng(12)
        batch = vec_batch(rng, size=4)
        batch["obs_frames"] = rng.uniform(0, 1, (4, 3, 64, 64)).astype(np.float32)
        batch["next_frames"] = rng.uniform(0, 1, (4, 3, 64, 64)).astype(np.float32)
        losses = agent.sac_update(batch)
        assert all(np.isfinite(v) for v in losses.values())

    def test_polyak_shrinks_distance_by_one_minus_tau(self):
        agent = SacAgent(mode="mini-sac")
        with torch.no_grad():
            for p in agent.critic.parameters():
                p.add_(torch.randn_like(p))
        before = [
            (tp - mp).norm().item()
            for tp, mp in zip(agent.target_critic.parameters(), agent.critic.parameters())
        ]
        agent._polyak()
        after = [
            (tp - mp).norm().item()
            for tp, mp in zip(agent.target_critic.parameters(), agent.critic.parameters())
        ]
        tau = agent.hp.tau_polyak
        for b, a in zip(before, after):
            assert a == pytest.approx((1.0 - tau) * b, rel=1e-5)

    def test_asymmetric_latent_normalization(self):
        agent = SacAgent(mode="asymmetric-sac", latent_range=(1.0, 3.5))
        feats = torch.zeros(2, agent.feature_dim)
        out = agent.asymmetric_encode(feats, torch.tensor([1.0, 3.5]))
        assert out.shape == (2, agent.feature_dim + 1)
        assert out[0, -1] == 0.0 and out[1, -1] == 1.0
        vanilla = SacAgent(mode="sac")
        with pytest.raises(ConfigurationError):
            vanilla.asymmetric_encode(feats, torch.tensor([1.0, 3.5]))

    def test_actor_never_sees_latent(self):
        # structural isolation: the actor input width has no latent slot, and
        # only the critic grows by one in asymmetric mode
        sym = SacAgent(mode="sac", frame_stack=2)
        asym = SacAgent(mode="asymmetric-sac", frame_stack=2)
        assert sym.actor.net[0].in_features == asym.actor.net[0].in_features
        assert asym.critic.q1[0].in_features == sym.critic.q1[0].in_features + 1

    def test_agent_state_round_trip(self):
        agent = SacAgent(mode="mini-sac", seed=6)
        rng = np.random.default_rng(13)
        agent.sac_update(vec_batch(rng, size=8))
        clone = SacAgent(mode="mini-sac", seed=99)
        clone.load_state(agent.state())
        obs = make_obs(0.2)
        assert np.allclose(agent.policy_act(obs, True), clone.policy_act(obs, True))
        assert np.allclose(agent.policy_act(obs), clone.policy_act(obs))
        la = agent.sac_update(vec_batch(np.random.default_rng(14), size=8))
        lb = clone.sac_update(vec_batch(np.random.default_rng(14), size=8))
        assert la == lb
