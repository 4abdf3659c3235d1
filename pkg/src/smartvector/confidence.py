"""Live confidence and temporal validity scores.

Both are pure functions of a vector and a reference time. Ages are measured
in whole days from ``created_at``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from datetime import datetime
from pathlib import Path

from smartvector.core import MAX_CONFIDENCE, MIN_CONFIDENCE, SmartVector, to_utc

SECONDS_PER_DAY = 86400
DEFAULT_HALF_LIFE = 30.0


@dataclass(frozen=True)
class ConfidenceParams:
    half_life_days: float = DEFAULT_HALF_LIFE
    alpha_pos: float = 0.03
    alpha_neg: float = 0.08
    beta: float = 0.01
    dormant_threshold: float = 0.15
    validity_floor: float = 0.05

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")
        if self.alpha_neg <= self.alpha_pos:
            raise ValueError("alpha_neg must exceed alpha_pos")
        if self.dormant_threshold >= 1:
            raise ValueError("dormant_threshold must be below 1")

    @classmethod
    def from_mapping(cls, data: dict) -> ConfidenceParams:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown confidence parameters: {sorted(unknown)}")
        return replace(cls(), **{k: float(v) for k, v in data.items()})

    @classmethod
    def load(cls, path: str | Path) -> ConfidenceParams:
        """Read a JSON object or ``key=value`` lines (``#`` comments allowed)."""
        text = Path(path).read_text(encoding="utf-8")
        if text.lstrip().startswith("{"):
            return cls.from_mapping(json.loads(text))
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
        return cls.from_mapping(data)


DEFAULT_PARAMS = ConfidenceParams()


def age_days(v: SmartVector, now: datetime) -> int:
    """Whole days since creation, never negative."""
    seconds = (to_utc(now) - v.created_at).total_seconds()
    return max(0, int(seconds // SECONDS_PER_DAY))


def _half_life(v: SmartVector, params: ConfidenceParams) -> float:
    # a vector-level half-life only wins when it was set away from the default
    if v.half_life_days != DEFAULT_HALF_LIFE:
        return v.half_life_days
    return params.half_life_days


def confidence(
    v: SmartVector, now: datetime, params: ConfidenceParams = DEFAULT_PARAMS
) -> float:
    decayed = v.base_confidence * 2.0 ** (-age_days(v, now) / _half_life(v, params))
    with_feedback = min(
        MAX_CONFIDENCE,
        max(
            MIN_CONFIDENCE,
            decayed
            + params.alpha_pos * v.positive_feedback
            - params.alpha_neg * v.negative_feedback,
        ),
    )
    return min(MAX_CONFIDENCE, with_feedback + params.beta * math.log1p(v.access_count))


def is_valid_at(v: SmartVector, t: datetime) -> bool:
    t = to_utc(t)
    if v.temporal_validity_start is not None and t < v.temporal_validity_start:
        return False
    if v.temporal_validity_end is not None and t > v.temporal_validity_end:
        return False
    return True


def temporal_score(
    v: SmartVector, t: datetime, params: ConfidenceParams = DEFAULT_PARAMS
) -> float:
    if not is_valid_at(v, t):
        return params.validity_floor
    return 2.0 ** (-age_days(v, t) / _half_life(v, params))


def is_dormant(v: SmartVector, now: datetime, params: ConfidenceParams = DEFAULT_PARAMS) -> bool:
    return confidence(v, now, params) < params.dormant_threshold
