"""Per-type content quality scores.

Training uses a cheap stochastic simulator: expected quality rises linearly
with reputation, with Gaussian noise to model imperfect evaluation, clamped
to [quality_floor, q_max].  At test time the simulator can be swapped for an
external evaluator driven by a few-shot / chain-of-thought prompt whose final
token is the rating.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import requests

from .economics import TypeGrid
from .errors import (EvaluatorUnavailable, RatingOutOfScale,
                     UnparseableResponse)


@dataclass
class QualitySimConfig:
    q_min: float = 0.0
    q_max: float = 10.0
    sigma: float = 0.5
    quality_floor: float = 0.0


@dataclass(frozen=True)
class QualityReport:
    scores: np.ndarray
    source: str = "simulator"          # "simulator" | "external"
    raw_responses: tuple[str, ...] | None = None


def simulate_quality(grid: TypeGrid, config: QualitySimConfig,
                     rng: np.random.Generator) -> QualityReport:
    """Noisy monotone ramp from reputation to quality.

    Expected score interpolates q_min..q_max across the reputation range;
    realized scores are clamped to [quality_floor, q_max].
    """
    ramp = config.q_min + (config.q_max - config.q_min) * (
        (grid.phi - grid.phi_min) / (grid.phi_max - grid.phi_min))
    noise = rng.normal(0.0, config.sigma, size=grid.K) if config.sigma > 0 \
        else np.zeros(grid.K)
    scores = np.clip(ramp + noise, config.quality_floor, config.q_max)
    return QualityReport(scores=scores, source="simulator")


@dataclass
class PromptTemplate:
    """Evaluation prompt: role setup, worked examples, step-by-step
    instruction, and a suffix forcing the rating to be the last token."""

    system_preamble: str = (
        "You are a content quality evaluator. Rate the given user-generated "
        "content considering clarity and aesthetics, on a scale from "
        "{lo} to {hi}.")
    few_shot_examples: list[tuple[str, float]] = field(default_factory=list)
    cot_instruction: str = (
        "Evaluate step by step: first assess clarity, then aesthetics, "
        "then combine them into a single rating.")
    direct_output_suffix: str = "Please directly output the quality rating."

    def __post_init__(self):
        if not self.direct_output_suffix:
            raise ValueError("direct_output_suffix must be non-empty")


def build_prompt(content_descriptor: str, template: PromptTemplate,
                 scale: tuple[float, float] = (0.0, 10.0)) -> str:
    """Deterministic concatenation: preamble, examples, CoT, content, suffix."""
    if not content_descriptor:
        raise ValueError("content descriptor must be non-empty")
    parts = [template.system_preamble.format(lo=scale[0], hi=scale[1])]
    for desc, rating in template.few_shot_examples:
        parts.append(f"Example content: {desc}\nExample rating: {rating}")
    parts.append(template.cot_instruction)
    parts.append(f"Content: {content_descriptor}")
    parts.append(template.direct_output_suffix)
    return "\n\n".join(parts)


_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")


def parse_rating(response: str, scale: tuple[float, float]) -> float:
    """Extract the final numeric token of an evaluator response."""
    tokens = _NUMBER.findall(response)
    if not tokens:
        raise UnparseableResponse(f"no numeric rating in response: {response!r}")
    rating = float(tokens[-1])
    lo, hi = scale
    if not lo <= rating <= hi:
        raise RatingOutOfScale(f"rating {rating} outside scale [{lo}, {hi}]")
    return rating


@dataclass
class EvaluatorEndpointConfig:
    base_url: str
    model: str = "gpt-5"
    timeout: float = 30.0
    retry_count: int = 2
    rating_scale: tuple[float, float] = (0.0, 10.0)
    api_key: str | None = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        lo, hi = self.rating_scale
        if lo >= hi:
            raise ValueError("rating scale min must be below max")


def evaluate_external(content_descriptor: str, template: PromptTemplate,
                      endpoint: EvaluatorEndpointConfig,
                      session: requests.Session | None = None) -> float:
    """Score content through the external evaluator endpoint.

    The request body carries the full prompt text and the model identifier;
    the response body is free text whose final numeric token is the rating.
    Transient failures and unparseable replies are retried up to
    ``retry_count`` times before raising EvaluatorUnavailable.  An in-scale
    parse failure (RatingOutOfScale) is not retried: the evaluator answered,
    just badly.
    """
    prompt = build_prompt(content_descriptor, template,
                          scale=endpoint.rating_scale)
    payload = {"model": endpoint.model, "prompt": prompt}
    headers = {}
    if endpoint.api_key:
        headers["Authorization"] = f"Bearer {endpoint.api_key}"
    http = session or requests
    last_error: Exception | None = None
    for _ in range(endpoint.retry_count + 1):
        try:
            resp = http.post(endpoint.base_url, json=payload, headers=headers,
                             timeout=endpoint.timeout)
            resp.raise_for_status()
            return parse_rating(resp.text, endpoint.rating_scale)
        except RatingOutOfScale:
            raise
        except (requests.RequestException, UnparseableResponse) as exc:
            last_error = exc
    raise EvaluatorUnavailable(
        f"evaluator at {endpoint.base_url} failed after "
        f"{endpoint.retry_count + 1} attempts") from last_error
