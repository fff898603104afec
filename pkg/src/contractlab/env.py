"""MDP wrapper around the contract model.

State layout (length 3K+3, public contract):

    [Q_1..Q_K, I, kappa, K, delta_1..delta_K, phi_1..phi_K]

The action is the K-vector of per-type rewards; the step reward is the
expected platform utility when the induced menu is feasible and exactly 0
otherwise.  By default a fresh problem instance (kappa, reputation bounds,
beta shapes, eta, quality draws) is sampled at every step so the learner sees
broad parameter coverage; ``frozen=True`` pins one instance for oracle
comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .economics import (ContractMenu, EnvConfig, TypeGrid, quantize_types,
                        type_probabilities)
from .errors import DimensionMismatch
from .quality import QualityReport, QualitySimConfig, simulate_quality


@dataclass(frozen=True)
class Instance:
    """One fully sampled contract-design problem."""

    grid: TypeGrid
    delta: np.ndarray
    quality: np.ndarray
    f: float
    kappa: float
    eta: float
    quality_floor: float


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    next_state: np.ndarray
    done: bool
    feasible: bool


def state_vector(inst: Instance, K: int) -> np.ndarray:
    return np.concatenate([
        inst.quality,
        [inst.quality_floor, inst.kappa, float(K)],
        inst.delta,
        inst.grid.phi,
    ])


class ContractEnv:
    """Contract-design environment with seeded reset/step.

    Each instance owns its RNG; independent instances may run in parallel
    with independent seeds.
    """

    def __init__(self, config: EnvConfig | None = None,
                 sim_config: QualitySimConfig | None = None,
                 frozen: bool = False, seed: int | None = None):
        self.config = config or EnvConfig()
        self.sim_config = sim_config or QualitySimConfig(
            quality_floor=self.config.quality_floor)
        self.frozen = frozen
        self.rng = np.random.default_rng(seed)
        self.instance: Instance | None = None
        self._t = 0

    @property
    def state_dim(self) -> int:
        return self.config.state_dim

    @property
    def action_dim(self) -> int:
        return self.config.action_dim

    def _sample_instance(self) -> Instance:
        cfg = self.config
        rng = self.rng
        kappa = rng.uniform(*cfg.kappa_range)
        phi_min = rng.uniform(*cfg.phi_min_range)
        phi_max = rng.uniform(*cfg.phi_max_range)
        alpha = rng.uniform(*cfg.alpha_range)
        beta = rng.uniform(*cfg.beta_range)
        eta = rng.uniform(*cfg.eta_range)
        grid = quantize_types(phi_min, phi_max, cfg.K)
        delta = type_probabilities(grid, alpha, beta)
        report: QualityReport = simulate_quality(grid, self.sim_config, rng)
        return Instance(grid=grid, delta=delta, quality=report.scores,
                        f=cfg.f, kappa=kappa, eta=eta,
                        quality_floor=cfg.quality_floor)

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self._t = 0
        if not (self.frozen and self.instance is not None):
            self.instance = self._sample_instance()
        return state_vector(self.instance, self.config.K)

    def step(self, action: np.ndarray) -> StepOutcome:
        if self.instance is None:
            raise RuntimeError("call reset() before step()")
        action = np.asarray(action, dtype=np.float64)
        if action.shape != (self.config.K,):
            raise DimensionMismatch(
                f"action must have shape ({self.config.K},), got {action.shape}")
        rewards = np.clip(action, 0.0, self.config.r_max)
        inst = self.instance
        value, feasible = _kernels.menu_reward(
            inst.quality, rewards, inst.grid.phi, inst.delta,
            inst.f, inst.kappa, inst.eta, inst.quality_floor)
        self._t += 1
        done = self._t >= self.config.horizon
        if not self.frozen:
            self.instance = self._sample_instance()
        next_state = state_vector(self.instance, self.config.K)
        return StepOutcome(reward=value, next_state=next_state,
                           done=done, feasible=feasible)

    def current_menu(self, action: np.ndarray) -> ContractMenu:
        """Menu induced by an action on the current instance (after clamping)."""
        rewards = np.clip(np.asarray(action, dtype=np.float64),
                          0.0, self.config.r_max)
        return ContractMenu(quality=self.instance.quality, reward=rewards)

    def freeze(self) -> None:
        """Pin the current instance (no re-randomization on step/reset)."""
        self.frozen = True

    def get_rng_state(self):
        return self.rng.bit_generator.state

    def set_rng_state(self, state) -> None:
        self.rng.bit_generator.state = state
