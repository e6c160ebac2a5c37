"""Lab configuration: one structured file drives collection, training and eval.

Every tunable lives in a dataclass with the shipped default; a YAML config
file (and then CLI flags) may override any subset. Dataset and checkpoint
headers echo the fields they depend on so downstream stages can refuse
mismatched inputs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

SIGMA_FLOOR = 1e-4
DECISION_INTERVAL_MS = 60


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration."""


@dataclass
class ActionMapConfig:
    """Log-linear map between normalized actions in [-1, 1] and bps."""

    b_min_bps: float = 10_000.0
    b_max_bps: float = 8_000_000.0


@dataclass
class QoeConfig:
    """Constants of the deterministic audio/video quality surrogates."""

    alpha: float = 0.5
    audio_sat_bps: float = 25_000.0
    audio_jitter_decay_ms: float = 60.0
    video_ref_bps: float = 100_000.0
    video_ceil_bps: float = 8_000_000.0
    video_delay_knee_ms: float = 100.0
    video_delay_decay_ms: float = 200.0


@dataclass
class MediaConfig:
    """Sender-side media source parameters."""

    audio_bps: float = 30_000.0
    audio_pkt_bytes: int = 75
    audio_interval_ms: int = 20
    video_pkt_bytes: int = 1200
    probe_interval_ms: int = 5000
    probe_count: int = 10
    probe_rate_mult: float = 1.5
    probe_spacing_ms: int = 6
    probe_min_bytes: int = 50
    probe_max_bytes: int = 12_000


@dataclass
class ObservationConfig:
    """Monitoring-interval layout and feature normalization caps."""

    short_mi_ms: int = 60
    long_mi_ms: int = 600
    mi_count: int = 3
    delay_cap_ms: float = 1000.0
    jitter_cap_ms: float = 500.0


@dataclass
class BehaviorConfig:
    """Delay-gradient rule that generated the offline dataset's actions."""

    init_estimate_bps: float = 300_000.0
    ema_weight: float = 0.1
    decrease_gain: float = 0.85
    increase_gain: float = 1.05
    increase_offset_bps: float = 1000.0
    loss_decrease: float = 0.10
    loss_increase: float = 0.02
    grad_decrease_ms: float = 2.0
    grad_increase_ms: float = 0.5
    jitter_prob: float = 0.1
    jitter_span: float = 0.1


@dataclass
class TrainConfig:
    """Hyperparameters of the offline learners."""

    tau: float = 0.7
    beta: float = 3.0
    gamma: float = 0.99
    n_components: int = 3
    lr: float = 3e-5
    batch_size: int = 256
    epochs: int = 300
    window_len: int = 16
    awr_clip: float = 100.0
    eval_every: int = 5
    seed: int = 0
    hidden_width: int = 128
    hidden_layers: int = 5
    lstm_width: int = 128
    dropout: float = 0.05
    actor_recurrent: bool = True
    # Desk-scale reward preprocessing: r' = (r - center) * scale. The center
    # defaults to the dataset mean reward; scale (1 - gamma) keeps learned
    # return distributions on the QoE scale so the shipped lr is usable at
    # small step counts. Both are echoed into checkpoints.
    center_rewards: bool = True
    reward_scale: float = 0.01
    dtype: str = "float32"
    torch_threads: int = 1


@dataclass
class CollectConfig:
    """Dataset collection knobs."""

    calls_per_profile: int = 7
    obs_decimals: int = 9


@dataclass
class EvalConfig:
    """Online testbed evaluation knobs."""

    calls_per_profile: int = 15
    stochastic_actor: bool = False


@dataclass
class LabConfig:
    action_map: ActionMapConfig = field(default_factory=ActionMapConfig)
    qoe: QoeConfig = field(default_factory=QoeConfig)
    media: MediaConfig = field(default_factory=MediaConfig)
    observation: ObservationConfig = field(default_factory=ObservationConfig)
    behavior: BehaviorConfig = field(default_factory=BehaviorConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    collect: CollectConfig = field(default_factory=CollectConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def validate(self) -> None:
        if not 0.0 < self.action_map.b_min_bps < self.action_map.b_max_bps:
            raise ConfigError("action_map requires 0 < b_min_bps < b_max_bps")
        if not 0.0 <= self.qoe.alpha <= 1.0:
            raise ConfigError(f"qoe.alpha must be in [0, 1], got {self.qoe.alpha}")
        if not 0.0 < self.train.tau < 1.0:
            raise ConfigError(f"train.tau must be in (0, 1), got {self.train.tau}")
        if self.train.beta < 0.0:
            raise ConfigError(f"train.beta must be >= 0, got {self.train.beta}")
        if not 0.0 <= self.train.gamma < 1.0:
            raise ConfigError(f"train.gamma must be in [0, 1), got {self.train.gamma}")
        if self.train.n_components < 1:
            raise ConfigError("train.n_components must be >= 1")
        if self.train.dtype not in ("float32", "float64"):
            raise ConfigError(f"train.dtype must be float32 or float64, got {self.train.dtype}")


def _update_dataclass(obj: Any, data: dict, path: str) -> None:
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown config key {path}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"config section {path}{key} must be a mapping")
            _update_dataclass(current, value, f"{path}{key}.")
        else:
            setattr(obj, key, type(current)(value) if current is not None else value)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> LabConfig:
    """Build a LabConfig from defaults, an optional YAML file, then overrides."""
    cfg = LabConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        _update_dataclass(cfg, data, "")
    if overrides:
        _update_dataclass(cfg, overrides, "")
    cfg.validate()
    return cfg


def config_to_dict(cfg: Any) -> dict:
    """Dataclass tree to plain dict (for manifests and file headers)."""
    return dataclasses.asdict(cfg)
