"""High-level run entry points used by the CLI and the acceptance tests."""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from ..baselines import (BaselineKind, baseline_action_fn,
                         grid_search_oracle, unconstrained_utility)
from ..env import ContractEnv
from ..errors import ConfigError
from ..quality import QualitySimConfig
from ..trainer import Trainer
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, save_config
from .export import build_export, write_export
from .metrics import MetricsRecord, MetricsWriter


def make_env(cfg: RunConfig, seed_tag: int = 0) -> ContractEnv:
    sim = QualitySimConfig(q_min=cfg.oracle.q_min, q_max=cfg.oracle.q_max,
                           sigma=cfg.oracle.sigma,
                           quality_floor=cfg.env.quality_floor)
    return ContractEnv(cfg.env, sim, frozen=cfg.run.frozen_env,
                       seed=[cfg.run.seed, seed_tag])


def make_trainer(cfg: RunConfig) -> Trainer:
    env = make_env(cfg)
    env.reset()
    return Trainer(env, cfg.policy, seed=cfg.run.seed,
                   actor_kind=cfg.run.actor_kind)


def run_train(cfg: RunConfig, resume: str | Path | None = None) -> Path:
    """Train per config, appending metrics rows and writing checkpoints.

    Returns the final checkpoint path.
    """
    out = Path(cfg.run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(cfg, out / "config.effective.yaml")
    trainer = make_trainer(cfg)
    if resume is not None:
        payload = load_checkpoint(resume)
        trainer.load_state_dict(payload["trainer"])
    writer = MetricsWriter(out / "metrics.csv")
    ckpt_path = out / "checkpoint.pkl"
    start = time.monotonic()

    def on_episode(rec):
        writer.append(MetricsRecord(
            episode=rec.episode, train_reward=rec.train_reward,
            test_reward=rec.test_reward, actor_loss=rec.actor_loss,
            critic_loss=rec.critic_loss, gating_entropy=rec.gating_entropy,
            wall_clock_s=time.monotonic() - start))
        if cfg.policy.eval_interval and \
                rec.episode % cfg.policy.eval_interval == 0:
            save_checkpoint(ckpt_path, trainer.state_dict(), cfg.to_dict())

    remaining = cfg.policy.episodes - trainer.episode
    if remaining > 0:
        trainer.run(remaining, on_episode=on_episode)
    save_checkpoint(ckpt_path, trainer.state_dict(), cfg.to_dict())
    return ckpt_path


def load_trainer(checkpoint: str | Path, cfg: RunConfig) -> Trainer:
    payload = load_checkpoint(checkpoint)
    ckpt_k = payload["config"]["env"]["K"]
    if ckpt_k != cfg.env.K:
        raise ConfigError(f"checkpoint was trained with K={ckpt_k}, "
                          f"config has K={cfg.env.K}")
    trainer = make_trainer(cfg)
    if payload["trainer"]["actor_kind"] != trainer.actor_kind:
        raise ConfigError("checkpoint actor kind does not match config")
    trainer.load_state_dict(payload["trainer"])
    return trainer


def evaluate_policy(action_fn, cfg: RunConfig, episodes: int, seed: int,
                    unconstrained: bool = False) -> dict:
    """Greedy evaluation on fresh, seed-derived environments.

    ``action_fn(state, instance) -> action``.  With ``unconstrained=True``
    the per-step score ignores the feasibility constraints (used only by the
    complete-information benchmark).
    """
    per_episode = []
    feasible = []
    for ep in range(episodes):
        env = make_env(cfg)
        env.rng = np.random.default_rng([seed, 101, ep])
        s = env.reset()
        rewards = []
        for _ in range(env.config.horizon):
            inst = env.instance
            action = np.clip(np.asarray(action_fn(s, inst), dtype=np.float64),
                             0.0, env.config.r_max)
            out = env.step(action)
            if unconstrained:
                rewards.append(unconstrained_utility(inst, action))
                feasible.append(True)
            else:
                rewards.append(out.reward)
                feasible.append(out.feasible)
            s = out.next_state
            if out.done:
                break
        per_episode.append(float(np.mean(rewards)))
    if not per_episode:
        return {"episodes": 0, "mean_reward": None, "std_reward": None,
                "feasibility_rate": None}
    per_episode = np.asarray(per_episode)
    return {"episodes": episodes,
            "mean_reward": float(per_episode.mean()),
            "std_reward": float(per_episode.std()),
            "feasibility_rate": float(np.mean(feasible))}


def run_eval(checkpoint: str | Path, cfg: RunConfig, episodes: int) -> dict:
    trainer = load_trainer(checkpoint, cfg)
    summary = evaluate_policy(
        lambda s, inst: trainer.greedy_action(s), cfg, episodes,
        seed=cfg.run.seed)
    return summary


def run_baseline(kind: str, cfg: RunConfig, episodes: int,
                 resolution: int = 200) -> dict:
    kind = BaselineKind(kind)
    fn = baseline_action_fn(kind, cfg.env.r_max, seed=cfg.run.seed,
                            resolution=resolution)
    summary = evaluate_policy(fn, cfg, episodes, seed=cfg.run.seed,
                              unconstrained=kind is BaselineKind.COMPLETE_INFO)
    summary["kind"] = kind.value
    return summary


def run_oracle(cfg: RunConfig, resolution: int = 200) -> dict:
    env = make_env(cfg)
    env.reset()
    rewards, value = grid_search_oracle(env.instance, cfg.env.r_max,
                                        resolution)
    return {"rewards": rewards.tolist(), "value": value,
            "resolution": resolution}


def run_export(checkpoint: str | Path, cfg: RunConfig,
               out_path: str | Path | None = None,
               owner: str = "0x0") -> Path:
    trainer = load_trainer(checkpoint, cfg)
    env = make_env(cfg)
    state = env.reset()
    action = trainer.greedy_action(state)
    export = build_export(env.instance, action, owner=owner)
    out_path = Path(out_path) if out_path else \
        Path(cfg.run.output_dir) / "contract_export.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_export(export, out_path)
    return out_path
