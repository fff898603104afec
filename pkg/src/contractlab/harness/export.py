"""Deployment-style export of a designed contract.

Mirrors the on-chain variable set (owner, per-type id/recipient/evaluation/
reward).  Chain-side numeric fields are unsigned integers, so evaluation and
reward values are scaled by a documented factor and truncated; the factor is
recorded in the file so the export round-trips up to that quantization.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .. import _kernels
from ..env import Instance

EXPORT_SCHEMA_VERSION = 1
SCALE_FACTOR = 1000


def build_export(inst: Instance, rewards: np.ndarray,
                 owner: str = "0x0") -> dict:
    """Structured export of the (evaluation, reward) schedule for one instance."""
    rewards = np.asarray(rewards, dtype=np.float64)
    records = [
        {
            "id": k + 1,
            "recipient": "0x0",  # placeholder, assigned on-chain
            "evaluation": int(inst.quality[k] * SCALE_FACTOR),
            "reward": int(rewards[k] * SCALE_FACTOR),
        }
        for k in range(inst.grid.K)
    ]
    # the flag describes the quantized schedule (what actually deploys),
    # so re-checking the exported integers reproduces it exactly
    quality_q = np.array([r["evaluation"] for r in records]) / SCALE_FACTOR
    rewards_q = np.array([r["reward"] for r in records]) / SCALE_FACTOR
    _, feasible = _kernels.menu_reward(
        quality_q, rewards_q, inst.grid.phi, inst.delta,
        inst.f, inst.kappa, inst.eta, inst.quality_floor)
    return {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "scale_factor": SCALE_FACTOR,
        "owner": owner,
        "feasible": bool(feasible),
        "instance": {
            "phi": inst.grid.phi.tolist(),
            "phi_min": inst.grid.phi_min,
            "phi_max": inst.grid.phi_max,
            "delta": inst.delta.tolist(),
            "f": inst.f,
            "kappa": inst.kappa,
            "eta": inst.eta,
            "quality_floor": inst.quality_floor,
        },
        "items": records,
    }


def write_export(export: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(export, indent=2, sort_keys=True) + "\n")


def read_export(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema_version") != EXPORT_SCHEMA_VERSION:
        raise ValueError("unsupported export schema version")
    return data


def recheck_feasibility(export: dict) -> bool:
    """Re-derive the feasibility flag from the exported integers."""
    scale = float(export["scale_factor"])
    inst = export["instance"]
    quality = np.array([it["evaluation"] for it in export["items"]]) / scale
    rewards = np.array([it["reward"] for it in export["items"]]) / scale
    _, feasible = _kernels.menu_reward(
        quality, rewards, np.asarray(inst["phi"]), np.asarray(inst["delta"]),
        inst["f"], inst["kappa"], inst["eta"], inst["quality_floor"])
    return bool(feasible)
