"""Versioned binary checkpoints (pickle of the trainer state + config echo).

Loading a checkpoint and continuing training reproduces the trajectory of an
uninterrupted run exactly: the state captures parameters, optimizer moments,
normalization statistics, the partial rollout buffer, and every RNG state.
"""

from __future__ import annotations

import pickle
from pathlib import Path

CHECKPOINT_MAGIC = "contractlab-checkpoint"
CHECKPOINT_VERSION = 1


def save_checkpoint(path: str | Path, trainer_state: dict,
                    config_dict: dict) -> None:
    payload = {
        "magic": CHECKPOINT_MAGIC,
        "version": CHECKPOINT_VERSION,
        "trainer": trainer_state,
        "config": config_dict,
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("wb") as fh:
        pickle.dump(payload, fh, protocol=4)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> dict:
    with Path(path).open("rb") as fh:
        payload = pickle.load(fh)
    if not isinstance(payload, dict) or payload.get("magic") != CHECKPOINT_MAGIC:
        raise ValueError(f"{path} is not a contractlab checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version "
                         f"{payload.get('version')}")
    return payload
