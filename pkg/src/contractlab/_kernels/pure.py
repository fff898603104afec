"""Pure-numpy menu evaluation kernels (fallback backend).

Semantics must match ``_core.pyx`` bit-for-bit: both evaluate the same
floating-point expressions in the same order, and feasibility comparisons
are exact (no tolerance).
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def batch_menu_rewards(quality, rewards, phi, delta, f, kappa, eta, floor):
    """Constrained platform objective for a batch of reward vectors.

    Parameters
    ----------
    quality : (K,) per-type quality values (shared across the batch).
    rewards : (N, K) candidate reward vectors.
    phi     : (K,) type grid.
    delta   : (K,) type probabilities.

    Returns
    -------
    values : (N,) expected platform utility where feasible, else 0.
    feasible : (N,) uint8 flags.
    """
    quality = np.ascontiguousarray(quality, dtype=np.float64)
    rewards = np.ascontiguousarray(rewards, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    delta = np.ascontiguousarray(delta, dtype=np.float64)
    n, k = rewards.shape

    quality_ok = bool(np.all(quality >= floor))
    feasible = np.zeros(n, dtype=np.uint8)
    values = np.zeros(n, dtype=np.float64)
    if not quality_ok:
        return values, feasible

    ir_ok = f * phi[0] * rewards[:, 0] - kappa * quality[0] >= 0.0

    # IC: own-item utility must beat the best alternative for every type.
    own = f * phi[None, :] * rewards - kappa * quality[None, :]
    ic_ok = np.ones(n, dtype=bool)
    for t in range(k):
        alternatives = f * phi[t] * rewards - kappa * quality[None, :]
        ic_ok &= own[:, t] >= alternatives.max(axis=1)

    ok = ir_ok & ic_ok
    base = float(np.dot(delta, eta * np.log((quality - floor) + 1.0)))
    values[ok] = base - rewards[ok] @ delta
    feasible[ok] = 1
    return values, feasible


def menu_reward(quality, reward, phi, delta, f, kappa, eta, floor):
    """Single-menu variant; returns (value, feasible)."""
    values, feas = batch_menu_rewards(
        quality, np.asarray(reward, dtype=np.float64)[None, :],
        phi, delta, f, kappa, eta, floor)
    return float(values[0]), bool(feas[0])
