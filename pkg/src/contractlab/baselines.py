"""Reference policies and oracles for benchmarking the learned policy.

* random: rewards drawn uniformly, ignoring the state;
* average: one identical mid-range reward for every type;
* complete_info: analytic per-type optimum when types are observable
  (incentive compatibility dropped, participation binds);
* grid_oracle: exhaustive search over the reward grid, the acceptance-test
  optimum for small K;
* plain_ppo: the non-mixture PPO ablation (see ``trainer.train`` with
  actor_kind="mlp").
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import _kernels
from .env import Instance


class BaselineKind(str, Enum):
    RANDOM = "random"
    AVERAGE = "average"
    COMPLETE_INFO = "complete_info"
    GRID_ORACLE = "grid_oracle"
    PLAIN_PPO = "plain_ppo"


def _k_from_state(state: np.ndarray) -> int:
    # layout [Q_1..Q_K, I, kappa, K, delta.., phi..] has length 3K+3
    return (len(state) - 3) // 3


def random_rewards(state: np.ndarray, r_max: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Uniform rewards in [0, r_max], independent of the state."""
    return rng.uniform(0.0, r_max, size=_k_from_state(state))


def average_rewards(state: np.ndarray, r_max: float) -> np.ndarray:
    """The same mid-range reward for every type."""
    return np.full(_k_from_state(state), r_max / 2.0)


def complete_info_rewards(quality: np.ndarray, phi: np.ndarray,
                          f: float, kappa: float) -> np.ndarray:
    """Per-type optimum with observable types: R_k = kappa*Q_k / (f*phi_k).

    Platform utility decreases in the reward, so with incentive
    compatibility dropped the participation constraint binds at every type.
    """
    denom = f * np.asarray(phi, dtype=np.float64)
    if np.any(denom == 0.0):
        raise ZeroDivisionError("f * phi must be nonzero for every type")
    return kappa * np.asarray(quality, dtype=np.float64) / denom


def grid_search_oracle(inst: Instance, r_max: float, resolution: int = 200):
    """Exhaustive optimum of the constrained objective over the reward grid.

    Evaluates every point of the uniform grid [0, r_max]^K (``resolution``
    points per axis) and returns (best rewards, best value); ties go to the
    lowest lexicographic grid index.  Guarded against K > 3.
    """
    k = inst.grid.K
    if k > 3:
        raise ValueError("grid search is limited to K <= 3")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axis = np.linspace(0.0, r_max, resolution)
    mesh = np.meshgrid(*([axis] * k), indexing="ij")
    candidates = np.stack([m.ravel() for m in mesh], axis=1)
    values, _ = _kernels.batch_menu_rewards(
        inst.quality, candidates, inst.grid.phi, inst.delta,
        inst.f, inst.kappa, inst.eta, inst.quality_floor)
    best = int(np.argmax(values))  # argmax returns the first (lowest) index
    return candidates[best].copy(), float(values[best])


def unconstrained_utility(inst: Instance, rewards: np.ndarray) -> float:
    """Expected platform utility with the feasibility constraints dropped
    (the complete-information benchmark's scoring rule)."""
    per_type = inst.eta * np.log(
        (inst.quality - inst.quality_floor) + 1.0) - np.asarray(rewards)
    return float(np.dot(inst.delta, per_type))


def baseline_action_fn(kind: BaselineKind, r_max: float, seed: int = 0,
                       resolution: int = 200):
    """(state, instance) -> action for the non-learned baselines."""
    kind = BaselineKind(kind)
    rng = np.random.default_rng([seed, 17])
    if kind is BaselineKind.RANDOM:
        return lambda s, inst: random_rewards(s, r_max, rng)
    if kind is BaselineKind.AVERAGE:
        return lambda s, inst: average_rewards(s, r_max)
    if kind is BaselineKind.COMPLETE_INFO:
        return lambda s, inst: complete_info_rewards(
            inst.quality, inst.grid.phi, inst.f, inst.kappa)
    if kind is BaselineKind.GRID_ORACLE:
        return lambda s, inst: grid_search_oracle(inst, r_max, resolution)[0]
    raise ValueError("plain_ppo is trained, not a closed-form baseline; "
                     "use trainer.train(actor_kind='mlp')")
