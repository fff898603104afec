"""Run configuration: a YAML file with env / policy / oracle / run sections.

Unknown sections or keys are rejected by name; every omitted key falls back
to the documented default.  ``load_config -> to_dict -> load`` round-trips to
an identical configuration.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from ..economics import EnvConfig
from ..errors import ConfigError
from ..ppo import HyperParams
from ..quality import EvaluatorEndpointConfig, QualitySimConfig

ENDPOINT_URL_ENV = "CONTRACTLAB_EVALUATOR_URL"
ENDPOINT_KEY_ENV = "CONTRACTLAB_EVALUATOR_KEY"

_TUPLE_KEYS = {"kappa_range", "phi_min_range", "phi_max_range", "alpha_range",
               "beta_range", "eta_range", "rating_scale"}


@dataclass
class RunSection:
    seed: int = 0
    output_dir: str = "runs/default"
    actor_kind: str = "moe"     # "moe" | "mlp"
    frozen_env: bool = False

    def __post_init__(self):
        if self.actor_kind not in ("moe", "mlp"):
            raise ConfigError(f"unknown actor_kind: {self.actor_kind!r}")


@dataclass
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    policy: HyperParams = field(default_factory=HyperParams)
    oracle: QualitySimConfig = field(default_factory=QualitySimConfig)
    endpoint: EvaluatorEndpointConfig | None = None
    run: RunSection = field(default_factory=RunSection)

    def to_dict(self) -> dict:
        out = {
            "env": dataclasses.asdict(self.env),
            "policy": dataclasses.asdict(self.policy),
            "oracle": dataclasses.asdict(self.oracle),
            "run": dataclasses.asdict(self.run),
        }
        if self.endpoint is not None:
            out["oracle"]["endpoint"] = dataclasses.asdict(self.endpoint)
        for section in out.values():
            for key, value in section.items():
                if isinstance(value, tuple):
                    section[key] = list(value)
        if "endpoint" in out["oracle"] and isinstance(
                out["oracle"]["endpoint"].get("rating_scale"), tuple):
            out["oracle"]["endpoint"]["rating_scale"] = list(
                out["oracle"]["endpoint"]["rating_scale"])
        return out


def _build_section(cls, data: dict, section: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: "
                          f"{', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in data.items():
        if key in _TUPLE_KEYS and isinstance(value, (list, tuple)):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{section}] section: {exc}") from exc


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - {"env", "policy", "oracle", "run"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    oracle_data = dict(data.get("oracle") or {})
    endpoint_data = oracle_data.pop("endpoint", None)
    cfg = RunConfig(
        env=_build_section(EnvConfig, dict(data.get("env") or {}), "env"),
        policy=_build_section(HyperParams, dict(data.get("policy") or {}),
                              "policy"),
        oracle=_build_section(QualitySimConfig, oracle_data, "oracle"),
        run=_build_section(RunSection, dict(data.get("run") or {}), "run"),
    )
    if endpoint_data is not None:
        cfg.endpoint = _build_section(EvaluatorEndpointConfig,
                                      dict(endpoint_data), "oracle.endpoint")
    url = os.environ.get(ENDPOINT_URL_ENV)
    if url:
        if cfg.endpoint is None:
            cfg.endpoint = EvaluatorEndpointConfig(base_url=url)
        else:
            cfg.endpoint.base_url = url
    key = os.environ.get(ENDPOINT_KEY_ENV)
    if key and cfg.endpoint is not None:
        cfg.endpoint.api_key = key
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return from_dict(data)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
