"""Incentive-contract design toolkit for user-generated content.

Core pieces: a constrained contract environment (``env``, ``economics``),
quality oracles (``quality``), a mixture-of-experts PPO learner (``nets``,
``ppo``, ``trainer``), reference baselines and oracles (``baselines``), and
the experiment harness (``harness``).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .economics import (ContractMenu, EnvConfig, TypeGrid, beta_cdf,
                        check_ic, check_ir, env_reward,
                        expected_platform_utility, platform_utility,
                        quantize_types, type_probabilities, user_utility)
from .env import ContractEnv, StepOutcome
from .ppo import HyperParams
from .trainer import Trainer, train

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "__version__",
    "ContractMenu", "EnvConfig", "TypeGrid", "beta_cdf", "check_ic",
    "check_ir", "env_reward", "expected_platform_utility",
    "platform_utility", "quantize_types", "type_probabilities",
    "user_utility",
    "ContractEnv", "StepOutcome", "HyperParams", "Trainer", "train",
]
