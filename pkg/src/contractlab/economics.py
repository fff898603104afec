"""Contract-theoretic economic model.

Reputation types are discretized on a uniform grid, type probabilities come
from a beta distribution on the normalized reputation range, and a contract
menu assigns each type a (quality, reward) pair.  Feasibility of a menu means
individual rationality (the lowest type nets a non-negative utility) plus
incentive compatibility (no type prefers another type's item) plus the
per-item quality floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import DimensionMismatch, QualityBelowThreshold

DELTA_SUM_TOL = 1e-9


@dataclass
class EnvConfig:
    """Economic parameters and the sampling ranges for randomized instances.

    Scalar fields are the values used when an instance is frozen; the
    ``*_range`` fields are half-open intervals sampled at reset time.
    """

    f: float = 1.0
    kappa: float = 2.0
    eta: float = 7.5
    quality_floor: float = 0.0   # threshold I
    K: int = 2
    phi_min: float = 5.0
    phi_max: float = 15.0
    alpha: float = 1.0
    beta: float = 1.0
    r_max: float = 20.0
    horizon: int = 64            # steps per episode
    kappa_range: tuple[float, float] = (1.0, 3.0)
    phi_min_range: tuple[float, float] = (5.0, 10.0)
    phi_max_range: tuple[float, float] = (10.0, 15.0)
    alpha_range: tuple[float, float] = (1.0, 2.0)
    beta_range: tuple[float, float] = (1.0, 2.0)
    eta_range: tuple[float, float] = (5.0, 10.0)

    def __post_init__(self):
        if self.phi_min >= self.phi_max:
            raise ValueError("phi_min must be < phi_max")
        if self.kappa <= 0 or self.eta <= 0:
            raise ValueError("kappa and eta must be positive")
        if self.K < 2:
            raise ValueError("need at least two types")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("beta-distribution shapes must be positive")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")

    @property
    def state_dim(self) -> int:
        return 3 * self.K + 3

    @property
    def action_dim(self) -> int:
        return self.K


@dataclass(frozen=True)
class TypeGrid:
    """Strictly increasing discretized reputation values."""

    phi: np.ndarray
    phi_min: float
    phi_max: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        object.__setattr__(self, "phi", phi)
        if phi.ndim != 1 or phi.size < 2:
            raise ValueError("grid needs at least two types")
        if not np.all(np.diff(phi) > 0):
            raise ValueError("grid must be strictly increasing")

    @property
    def K(self) -> int:
        return self.phi.size


@dataclass(frozen=True)
class ContractMenu:
    """K contract items: quality targets and token rewards, one per type."""

    quality: np.ndarray
    reward: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.quality, dtype=np.float64)
        r = np.asarray(self.reward, dtype=np.float64)
        object.__setattr__(self, "quality", q)
        object.__setattr__(self, "reward", r)
        if q.shape != r.shape or q.ndim != 1:
            raise DimensionMismatch("quality/reward must be equal-length vectors")

    @property
    def K(self) -> int:
        return self.quality.size

    @property
    def items(self) -> list[tuple[float, float]]:
        return list(zip(self.quality.tolist(), self.reward.tolist()))


def quantize_types(phi_min: float, phi_max: float, K: int) -> TypeGrid:
    """Uniform type grid: phi_k = phi_min + ((k-1)/K)(phi_max - phi_min)."""
    if phi_min >= phi_max:
        raise ValueError(f"invalid bounds: phi_min={phi_min} >= phi_max={phi_max}")
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    k = np.arange(K, dtype=np.float64)
    phi = phi_min + (k / K) * (phi_max - phi_min)
    return TypeGrid(phi=phi, phi_min=phi_min, phi_max=phi_max)


def beta_cdf(x: float, alpha: float, beta: float) -> float:
    """Regularized incomplete beta function I_x(alpha, beta)."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("shape parameters must be positive")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("x must lie in [0, 1]")
    out = betainc(alpha, beta, x)
    return float(out) if out.ndim == 0 else out


def type_probabilities(grid: TypeGrid, alpha: float, beta: float) -> np.ndarray:
    """Forward-difference type masses from the beta CDF on the normalized range.

    Reputation is mapped to u = (phi - phi_min)/(phi_max - phi_min) before
    applying the CDF so the masses sum to exactly 1 (u_1 = 0, top bin closes
    at u = 1).
    """
    u = (grid.phi - grid.phi_min) / (grid.phi_max - grid.phi_min)
    edges = np.append(u, 1.0)
    cdf = betainc(alpha, beta, edges)
    if alpha <= 0 or beta <= 0:
        raise ValueError("shape parameters must be positive")
    delta = np.diff(cdf)
    delta = np.clip(delta, 0.0, None)
    return delta


def user_utility(phi: float, quality: float, reward: float,
                 f: float, kappa: float) -> float:
    """Utility a type-phi user gets from an item: f*phi*R - kappa*Q."""
    return f * phi * reward - kappa * quality


def platform_utility(quality: float, reward: float,
                     eta: float, quality_floor: float) -> float:
    """Per-item platform utility: eta*ln((Q - I) + 1) - R.  Requires Q >= I."""
    if quality < quality_floor:
        raise QualityBelowThreshold(
            f"quality {quality} below threshold {quality_floor}")
    return eta * np.log((quality - quality_floor) + 1.0) - reward


def expected_platform_utility(menu: ContractMenu, delta: np.ndarray,
                              eta: float, quality_floor: float) -> float:
    """Probability-weighted platform utility over the menu."""
    delta = np.asarray(delta, dtype=np.float64)
    if delta.shape != menu.quality.shape:
        raise DimensionMismatch("type distribution does not match menu size")
    if np.any(menu.quality < quality_floor):
        raise QualityBelowThreshold("menu violates the quality floor")
    per_type = eta * np.log((menu.quality - quality_floor) + 1.0) - menu.reward
    return float(np.dot(delta, per_type))


def check_ir(menu: ContractMenu, grid: TypeGrid, f: float, kappa: float) -> bool:
    """Reduced individual rationality: the lowest type breaks even or better."""
    return bool(f * grid.phi[0] * menu.reward[0] - kappa * menu.quality[0] >= 0.0)


def check_ic(menu: ContractMenu, grid: TypeGrid, f: float, kappa: float) -> bool:
    """Incentive compatibility over all ordered type pairs, exact comparison."""
    # utilities[k, j]: utility type k derives from item j
    utilities = (f * np.outer(grid.phi, menu.reward)
                 - kappa * menu.quality[None, :])
    own = np.diag(utilities)
    return bool(np.all(own[:, None] >= utilities))


def menu_feasible(menu: ContractMenu, grid: TypeGrid, f: float, kappa: float,
                  quality_floor: float) -> bool:
    return (bool(np.all(menu.quality >= quality_floor))
            and check_ir(menu, grid, f, kappa)
            and check_ic(menu, grid, f, kappa))


def env_reward(menu: ContractMenu, delta: np.ndarray, grid: TypeGrid,
               f: float, kappa: float, eta: float,
               quality_floor: float) -> tuple[float, bool]:
    """Constrained platform objective: expected utility if feasible, else 0."""
    if menu.K != grid.K:
        raise DimensionMismatch("menu size does not match grid size")
    if not menu_feasible(menu, grid, f, kappa, quality_floor):
        return 0.0, False
    return expected_platform_utility(menu, delta, eta, quality_floor), True
