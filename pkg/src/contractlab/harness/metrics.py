"""Metrics persistence: one CSV row per episode, schema-versioned header.

Wall-clock timing goes to a sidecar file so the main metrics file stays
byte-identical across reruns of the same (config, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..errors import EmptyBuffer

SCHEMA_HEADER = "# contractlab-metrics schema=1"
COLUMNS = ["episode", "train_reward", "test_reward", "actor_loss",
           "critic_loss", "gating_entropy"]


@dataclass
class MetricsRecord:
    episode: int
    train_reward: float
    test_reward: float | None = None
    actor_loss: float | None = None
    critic_loss: float | None = None
    gating_entropy: float | None = None
    wall_clock_s: float | None = None


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


class MetricsWriter:
    """Append-only CSV writer; episode indices must be strictly increasing."""

    def __init__(self, path: str | Path, timing_path: str | Path | None = None):
        self.path = Path(path)
        self.timing_path = Path(timing_path) if timing_path else \
            self.path.with_suffix(".timing.csv")
        self._last_episode = 0
        if not self.path.exists() or self.path.stat().st_size == 0:
            self.path.write_text(SCHEMA_HEADER + "\n" + ",".join(COLUMNS) + "\n")
            self.timing_path.write_text("episode,wall_clock_s\n")
        else:
            rows = read_metrics(self.path)
            if rows:
                self._last_episode = rows[-1].episode

    def append(self, rec: MetricsRecord) -> None:
        if rec.episode <= self._last_episode:
            raise ValueError(f"episode {rec.episode} is not past "
                             f"{self._last_episode}")
        self._last_episode = rec.episode
        row = ",".join([str(rec.episode), _fmt(rec.train_reward),
                        _fmt(rec.test_reward), _fmt(rec.actor_loss),
                        _fmt(rec.critic_loss), _fmt(rec.gating_entropy)])
        with self.path.open("a") as fh:
            fh.write(row + "\n")
        if rec.wall_clock_s is not None:
            with self.timing_path.open("a") as fh:
                fh.write(f"{rec.episode},{rec.wall_clock_s!r}\n")


def read_metrics(path: str | Path) -> list[MetricsRecord]:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != SCHEMA_HEADER:
        raise ValueError(f"{path} is not a contractlab metrics file")
    if lines[1].split(",") != COLUMNS:
        raise ValueError(f"{path} has an unexpected column set")
    records = []
    for row in csv.reader(lines[2:]):
        if not row:
            continue
        vals = [None if cell == "" else float(cell) for cell in row[1:]]
        records.append(MetricsRecord(int(row[0]), *vals))
    return records


def moving_average_table(records: list[MetricsRecord], window: int = 10):
    """(episode, smoothed train reward, test reward) rows for plotting.

    The smoothing is a trailing moving average over ``window`` episodes;
    test rewards pass through unsmoothed.
    """
    if not records:
        raise EmptyBuffer("metrics log is empty")
    if window < 1:
        raise ValueError("window must be >= 1")
    rewards = [r.train_reward for r in records]
    rows = []
    for i, rec in enumerate(records):
        lo = max(0, i - window + 1)
        chunk = rewards[lo:i + 1]
        rows.append((rec.episode, sum(chunk) / len(chunk), rec.test_reward))
    return rows
