"""Centralized defaults for binning, seeding and pipeline knobs.

Every default lives here so CLI flags and the pipeline runner share one
source of truth; any field can be overridden per run via a JSON config file
or individual flags.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .exceptions import ParameterError
from .popularity import DEFAULT_CAPS
from .temporal import DEFAULT_DURATION_BINS


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    threads: int | None = None
    duration_bins_s: tuple[float, ...] = DEFAULT_DURATION_BINS
    short_duration_threshold_s: float = 180.0  # "short event" cutoff for reports
    radius_stride: int = 1
    size_stride: int = 1
    zipf_catalog_size: int = 10
    zipf_alpha: float = 1.6
    zipf_replicates: int = 10_000
    confidence_levels: tuple[float, ...] = (0.95, 0.99)
    gain_caps: tuple[int, ...] = DEFAULT_CAPS

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONFIG = PipelineConfig()

_TUPLE_FIELDS = {"duration_bins_s", "confidence_levels", "gain_caps"}


def load_config(path: str | Path | None = None, **overrides) -> PipelineConfig:
    """Build a config from defaults, an optional JSON file, then keyword overrides."""
    data: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ParameterError(f"config file {path} must contain a JSON object")
        data.update(raw)
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    for key in _TUPLE_FIELDS & set(data):
        data[key] = tuple(data[key])
    return replace(DEFAULT_CONFIG, **data)
