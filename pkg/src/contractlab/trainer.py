"""Episode loop tying the environment, actor, critic, and updates together.

Deterministic under (seed, config): every random draw flows from either the
environment RNG or the trainer RNG, both seeded explicitly, and greedy
evaluations use a fresh environment whose seed depends only on the base seed
and the episode index (so a resumed run reproduces an uninterrupted one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import ContractEnv
from .nets import Adam, Critic, MLPActor, MoEActor, RunningNorm
from .ppo import HyperParams, RolloutBuffer, compute_gae, update

CHECKPOINT_VERSION = 1


def make_actor(kind: str, env: ContractEnv, hp: HyperParams,
               rng: np.random.Generator):
    # actions live in [0, r_max]; the actor works in units of r_max/2 so a
    # unit parameter step moves the mean across a meaningful reward range.
    # Feasible payments sit near the user's cost kappa*Q/(f*phi), which is
    # small relative to r_max, so the initial mean starts low (r_max/8)
    # rather than mid-range.
    r_max = env.config.r_max
    scale = r_max / 2.0
    log_std0 = math.log(r_max / 10.0)
    bias = 0.25
    if kind == "moe":
        return MoEActor(env.state_dim, env.action_dim, n_experts=hp.n_experts,
                        top_m=hp.top_m, rng=rng, action_bias=bias,
                        init_log_std=log_std0, action_scale=scale)
    if kind == "mlp":
        return MLPActor(env.state_dim, env.action_dim, hidden=hp.mlp_hidden,
                        rng=rng, action_bias=bias, init_log_std=log_std0,
                        action_scale=scale)
    raise ValueError(f"unknown actor kind: {kind}")


@dataclass
class EpisodeRecord:
    episode: int
    train_reward: float
    test_reward: float | None
    actor_loss: float | None
    critic_loss: float | None
    gating_entropy: float | None
    env_steps: int


class Trainer:
    def __init__(self, env: ContractEnv, hp: HyperParams | None = None,
                 seed: int = 0, actor_kind: str = "moe"):
        self.env = env
        self.hp = hp or HyperParams()
        self.seed = seed
        self.actor_kind = actor_kind
        self.rng = np.random.default_rng([seed, 1])
        init_rng = np.random.default_rng([seed, 2])
        self.actor = make_actor(actor_kind, env, self.hp, init_rng)
        self.critic = Critic(env.state_dim, hidden=self.hp.critic_hidden,
                             rng=init_rng)
        self.actor_opt = Adam(self.actor.params, lr=self.hp.actor_lr,
                              weight_decay=self.hp.weight_decay)
        self.critic_opt = Adam(self.critic.params, lr=self.hp.critic_lr,
                               weight_decay=self.hp.weight_decay)
        self.norm = RunningNorm(env.state_dim)
        self.buffer = RolloutBuffer(env.state_dim, env.action_dim)
        self.episode = 0
        self.total_steps = 0
        self._last_update_stats: dict | None = None

    # -- rollout ------------------------------------------------------------

    def run_episode(self) -> tuple[float, int]:
        """Collect one episode, finalize advantages, update when due."""
        env, hp = self.env, self.hp
        s = env.reset()
        xs, actions, logps, rewards, values = [], [], [], [], []
        for _ in range(env.config.horizon):
            self.norm.update(s)
            x = self.norm.normalize(s)
            values.append(self.critic.value(x))
            a, logp = self.actor.sample(x, self.rng)
            out = env.step(a)
            xs.append(x)
            actions.append(a)
            logps.append(logp)
            rewards.append(out.reward)
            s = out.next_state
            if out.done:
                break
        bootstrap = self.critic.value(self.norm.normalize(s))
        adv, tgt = compute_gae(rewards, values, bootstrap, hp.gamma, hp.lam)
        self.buffer.add_segment(np.array(xs), np.array(actions),
                                np.array(logps), adv, tgt)
        if len(self.buffer) >= hp.rollout_steps:
            self._last_update_stats = update(
                self.buffer, self.actor, self.critic,
                self.actor_opt, self.critic_opt, hp, self.rng)
            self.buffer.clear()
        self.total_steps += len(rewards)
        return float(np.mean(rewards)), len(rewards)

    def run(self, episodes: int, on_episode=None) -> list[EpisodeRecord]:
        records = []
        for _ in range(episodes):
            train_reward, steps = self.run_episode()
            self.episode += 1
            test_reward = None
            if self.hp.eval_interval and self.episode % self.hp.eval_interval == 0:
                test_reward = self.greedy_eval(self.hp.eval_episodes)
            stats = self._last_update_stats or {}
            rec = EpisodeRecord(
                episode=self.episode,
                train_reward=train_reward,
                test_reward=test_reward,
                actor_loss=stats.get("actor_loss"),
                critic_loss=stats.get("critic_loss"),
                gating_entropy=(-stats["gate_balance"]
                                if "gate_balance" in stats else None),
                env_steps=self.total_steps,
            )
            records.append(rec)
            if on_episode is not None:
                on_episode(rec)
        return records

    # -- evaluation ---------------------------------------------------------

    def make_eval_env(self, tag: int = 0) -> ContractEnv:
        ev = ContractEnv(self.env.config, self.env.sim_config,
                         frozen=self.env.frozen,
                         seed=[self.seed, 7919, self.episode, tag])
        if self.env.frozen:
            ev.instance = self.env.instance
        return ev

    def greedy_eval(self, episodes: int = 1) -> float:
        """Mean reward of the deterministic (mean-action) policy."""
        ev = self.make_eval_env()
        rewards = []
        for _ in range(max(episodes, 1)):
            s = ev.reset()
            for _ in range(ev.config.horizon):
                x = self.norm.normalize(s)
                out = ev.step(self.actor.mean(x))
                rewards.append(out.reward)
                s = out.next_state
                if out.done:
                    break
        return float(np.mean(rewards))

    def greedy_action(self, state: np.ndarray) -> np.ndarray:
        """Clamped mean action for one raw environment state."""
        x = self.norm.normalize(np.asarray(state, dtype=np.float64))
        return np.clip(self.actor.mean(x), 0.0, self.env.config.r_max)

    # -- persistence ----------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "actor_kind": self.actor_kind,
            "seed": self.seed,
            "episode": self.episode,
            "total_steps": self.total_steps,
            "hp": self.hp,
            "actor": self.actor.state_dict(),
            "critic": self.critic.state_dict(),
            "actor_opt": self.actor_opt.state_dict(),
            "critic_opt": self.critic_opt.state_dict(),
            "norm": self.norm.state_dict(),
            "buffer": self.buffer.state_dict(),
            "trainer_rng": self.rng.bit_generator.state,
            "env_rng": self.env.get_rng_state(),
            "env_instance": self.env.instance,
            "env_frozen": self.env.frozen,
            "last_update_stats": self._last_update_stats,
        }

    def load_state_dict(self, state: dict) -> None:
        if state.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version: "
                             f"{state.get('version')}")
        self.episode = state["episode"]
        self.total_steps = state["total_steps"]
        self.actor.load_state_dict(state["actor"])
        self.critic.load_state_dict(state["critic"])
        self.actor_opt.load_state_dict(state["actor_opt"])
        self.critic_opt.load_state_dict(state["critic_opt"])
        self.norm.load_state_dict(state["norm"])
        self.buffer.load_state_dict(state["buffer"])
        self.rng.bit_generator.state = state["trainer_rng"]
        self.env.set_rng_state(state["env_rng"])
        self.env.instance = state["env_instance"]
        self.env.frozen = state["env_frozen"]
        self._last_update_stats = state["last_update_stats"]


def train(env: ContractEnv, hp: HyperParams | None = None, seed: int = 0,
          actor_kind: str = "moe"):
    """Train a policy; returns (episode records, trainer)."""
    trainer = Trainer(env, hp, seed=seed, actor_kind=actor_kind)
    records = trainer.run(trainer.hp.episodes)
    return records, trainer
