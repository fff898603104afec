"""Clipped-surrogate policy optimization for the contract environment.

The actor is either the sparse mixture-of-experts policy or a plain MLP
(see ``nets``); the update minimizes

    -L_clip + moe_coef * gate_balance - entropy_coef * policy_entropy

with minibatch Adam, L2 weight decay, and global gradient-norm clipping.
Advantages come from generalized advantage estimation; value targets are
advantage + value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBuffer, NonFiniteGradient
from .nets import Adam, clip_grad_norm, gaussian_entropy, gaussian_log_prob


@dataclass
class HyperParams:
    gamma: float = 0.95
    lam: float = 0.95
    clip_eps: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    moe_coef: float = 0.01
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    rollout_steps: int = 512          # transitions per update
    minibatch_size: int = 512
    epochs: int = 10
    max_grad_norm: float = 0.5
    weight_decay: float = 1e-4
    episodes: int = 500
    eval_interval: int = 10
    eval_episodes: int = 4
    normalize_advantages: bool = True
    log_std_min: float = -2.3      # exploration floor, sigma >= 0.1
    log_std_max: float = 2.5
    n_experts: int = 3
    top_m: int = 1
    critic_hidden: int = 256
    mlp_hidden: int = 64              # plain-PPO actor width

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0 or not 0.0 <= self.lam <= 1.0:
            raise ValueError("gamma and lam must lie in [0, 1]")
        if self.clip_eps <= 0:
            raise ValueError("clip_eps must be positive")
        for lr in (self.actor_lr, self.critic_lr):
            if not 0.0 <= lr <= 1.0:
                raise ValueError("learning rates must lie in [0, 1]")


def compute_gae(rewards, values, bootstrap_value, gamma, lam):
    """GAE advantages and value targets for one trajectory segment.

    A_t = sum_l (gamma*lam)^l * delta_{t+l} with
    delta_t = r_t + gamma*V(s_{t+1}) - V(s_t); the value after the last step
    is ``bootstrap_value``.  Returns (advantages, targets = A + V).
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.size == 0:
        raise EmptyBuffer("cannot compute advantages of an empty trajectory")
    next_values = np.append(values[1:], bootstrap_value)
    deltas = rewards + gamma * next_values - values
    advantages = np.empty_like(deltas)
    acc = 0.0
    for t in range(deltas.size - 1, -1, -1):
        acc = deltas[t] + gamma * lam * acc
        advantages[t] = acc
    return advantages, advantages + values


def clipped_surrogate(logp_new, logp_old, advantages, clip_eps):
    """Mean of min(rho*A, clip(rho, 1-eps, 1+eps)*A)."""
    rho = np.exp(logp_new - logp_old)
    clipped = np.clip(rho, 1.0 - clip_eps, 1.0 + clip_eps)
    return float(np.mean(np.minimum(rho * advantages, clipped * advantages)))


def gating_balance_loss(gate_probs: np.ndarray) -> float:
    """Negative mean Shannon entropy of gate probability vectors."""
    p = np.atleast_2d(np.asarray(gate_probs, dtype=np.float64))
    if p.size == 0:
        raise EmptyBuffer("empty batch of gate probabilities")
    p_safe = np.clip(p, 1e-300, None)
    return float(np.mean(np.sum(p * np.log(p_safe), axis=-1)))


def actor_loss_and_grads(actor, states, actions, logp_old, advantages, hp):
    """Total actor loss and analytic gradients for one minibatch.

    Loss = -clipped surrogate + moe_coef * gate balance
           - entropy_coef * Gaussian policy entropy.
    """
    states = np.atleast_2d(states)
    n = states.shape[0]
    mu, cache = actor.mean_and_cache(states)
    log_std = actor.log_std
    std = np.exp(log_std)
    logp_new = gaussian_log_prob(actions, mu, log_std)

    rho = np.exp(logp_new - logp_old)
    clipped = np.clip(rho, 1.0 - hp.clip_eps, 1.0 + hp.clip_eps)
    surr = np.minimum(rho * advantages, clipped * advantages)
    balance = actor.gate_balance(cache)
    entropy = gaussian_entropy(log_std)
    moe_coef = hp.moe_coef if actor.is_mixture else 0.0
    loss = -float(np.mean(surr)) + moe_coef * balance \
        - hp.entropy_coef * entropy

    # gradient of the surrogate flows through rho only where either the
    # unclipped branch is active or the ratio lies inside the clip band
    in_band = (rho >= 1.0 - hp.clip_eps) & (rho <= 1.0 + hp.clip_eps)
    use_rho = (rho * advantages < clipped * advantages) | in_band
    dlogp = np.where(use_rho, -rho * advantages / n, 0.0)

    z = (actions - mu) / std
    d_mu = dlogp[:, None] * z / std
    grads = actor.backward_mean(cache, d_mu, balance_coeff=moe_coef)
    d_log_std = (dlogp[:, None] * (z * z - 1.0)).sum(axis=0)
    d_log_std -= hp.entropy_coef
    grads["log_std"] = d_log_std
    stats = {"surrogate": float(np.mean(surr)), "gate_balance": balance,
             "entropy": entropy}
    return loss, grads, stats


def critic_loss_and_grads(critic, states, targets, value_coef):
    """Value-coefficient-scaled MSE loss and its gradients."""
    states = np.atleast_2d(states)
    v, cache = critic.value_and_cache(states)
    residual = v - targets
    loss = value_coef * float(np.mean(residual * residual))
    dv = value_coef * 2.0 * residual / residual.size
    return loss, critic.backward(cache, dv)


class RolloutBuffer:
    """Finalized transitions accumulated until one update's worth is ready."""

    def __init__(self, state_dim: int, action_dim: int):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.clear()

    def clear(self) -> None:
        self.states: list[np.ndarray] = []
        self.actions: list[np.ndarray] = []
        self.logp: list[np.ndarray] = []
        self.advantages: list[np.ndarray] = []
        self.targets: list[np.ndarray] = []

    def add_segment(self, states, actions, logp, advantages, targets) -> None:
        self.states.append(np.asarray(states, dtype=np.float64))
        self.actions.append(np.asarray(actions, dtype=np.float64))
        self.logp.append(np.asarray(logp, dtype=np.float64))
        self.advantages.append(np.asarray(advantages, dtype=np.float64))
        self.targets.append(np.asarray(targets, dtype=np.float64))

    def __len__(self) -> int:
        return sum(s.shape[0] for s in self.states)

    def arrays(self):
        if not self.states:
            raise EmptyBuffer("rollout buffer is empty")
        return (np.concatenate(self.states), np.concatenate(self.actions),
                np.concatenate(self.logp), np.concatenate(self.advantages),
                np.concatenate(self.targets))

    def state_dict(self) -> dict:
        return {"states": [a.copy() for a in self.states],
                "actions": [a.copy() for a in self.actions],
                "logp": [a.copy() for a in self.logp],
                "advantages": [a.copy() for a in self.advantages],
                "targets": [a.copy() for a in self.targets]}

    def load_state_dict(self, state: dict) -> None:
        self.states = [a.copy() for a in state["states"]]
        self.actions = [a.copy() for a in state["actions"]]
        self.logp = [a.copy() for a in state["logp"]]
        self.advantages = [a.copy() for a in state["advantages"]]
        self.targets = [a.copy() for a in state["targets"]]


def _check_finite(grads: dict, what: str) -> None:
    for k, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in {what}[{k}]")


def update(buffer: RolloutBuffer, actor, critic, actor_opt: Adam,
           critic_opt: Adam, hp: HyperParams,
           rng: np.random.Generator) -> dict:
    """Minibatch-epoch parameter update; returns averaged loss statistics."""
    states, actions, logp_old, advantages, targets = buffer.arrays()
    n = states.shape[0]
    if hp.normalize_advantages and n > 1:
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

    stats = {"actor_loss": 0.0, "critic_loss": 0.0, "gate_balance": 0.0,
             "entropy": 0.0, "n_minibatches": 0}
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hp.minibatch_size):
            idx = order[start:start + hp.minibatch_size]
            a_loss, a_grads, a_stats = actor_loss_and_grads(
                actor, states[idx], actions[idx], logp_old[idx],
                advantages[idx], hp)
            c_loss, c_grads = critic_loss_and_grads(
                critic, states[idx], targets[idx], hp.value_coef)
            _check_finite(a_grads, "actor")
            _check_finite(c_grads, "critic")
            clip_grad_norm(a_grads, hp.max_grad_norm)
            clip_grad_norm(c_grads, hp.max_grad_norm)
            actor_opt.step(actor.params, a_grads)
            critic_opt.step(critic.params, c_grads)
            np.clip(actor.params["log_std"], hp.log_std_min, hp.log_std_max,
                    out=actor.params["log_std"])
            stats["actor_loss"] += a_loss
            stats["critic_loss"] += c_loss
            stats["gate_balance"] += a_stats["gate_balance"]
            stats["entropy"] += a_stats["entropy"]
            stats["n_minibatches"] += 1
    k = max(stats.pop("n_minibatches"), 1)
    return {key: val / k for key, val in stats.items()}
