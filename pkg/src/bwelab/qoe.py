"""Deterministic audio/video quality surrogates and the combined reward.

The production quality predictors are trained on subjective ratings and are
not reproducible here; these closed-form stand-ins keep only their shape
properties: monotone up in receive rate, monotone down in loss, jitter and
delay, with scores clamped to the MOS scale [1, 5]. Overshooting capacity
(loss, delay growth) and undershooting it (low rate) both depress the
reward, which is what the estimators are trained against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import QoeConfig
from .emulator import backend
from .session import ReceiveLog, _window_slice

import numpy as np


@dataclass(frozen=True)
class MediaWindowStats:
    """Receiver-visible aggregates over one reward window."""

    audio_rate_bps: float
    video_rate_bps: float
    loss_ratio: float
    jitter_ms: float
    one_way_delay_ms: float

    def __post_init__(self):
        if min(self.audio_rate_bps, self.video_rate_bps, self.jitter_ms, self.one_way_delay_ms) < 0:
            raise ValueError("media window stats must be non-negative")
        if not 0.0 <= self.loss_ratio <= 1.0:
            raise ValueError(f"loss_ratio {self.loss_ratio} outside [0, 1]")


def media_window_stats(rlog: ReceiveLog, start_ms: float, end_ms: float) -> MediaWindowStats:
    """Aggregate the receive log over [start_ms, end_ms).

    Rates are per media kind; loss (sequence-gap accounting), jitter and
    delay are over all delivered packets in the window.
    """
    sl = _window_slice(rlog.recv, start_ms, end_ms)
    received = sl.stop - sl.start
    window_s = (end_ms - start_ms) / 1000.0
    if received == 0:
        return MediaWindowStats(0.0, 0.0, 0.0, 0.0, 0.0)
    kind = rlog.kind[sl]
    size = rlog.size[sl]
    recv = rlog.recv[sl]
    send = rlog.send[sl]
    audio_rate = float(size[kind == backend.KIND_AUDIO].sum()) * 8.0 / window_s
    video_rate = float(size[kind == backend.KIND_VIDEO].sum()) * 8.0 / window_s
    prev_seq = int(rlog.seq[sl.start - 1]) if sl.start > 0 else -1
    lost = int(rlog.seq[sl.stop - 1]) - prev_seq - received
    loss_ratio = lost / (lost + received)
    jitter = float(np.std(np.diff(recv))) if received >= 2 else 0.0
    delay = float(np.mean(recv - send))
    return MediaWindowStats(audio_rate, video_rate, loss_ratio, jitter, delay)


def _clamp_mos(x: float) -> float:
    return min(max(x, 1.0), 5.0)


def audio_mos(s: MediaWindowStats, cfg: QoeConfig | None = None) -> float:
    """Audio quality surrogate: rate saturation, cubic loss decay,
    exponential jitter decay."""
    c = cfg or QoeConfig()
    score = (
        1.0
        + 4.0
        * min(1.0, s.audio_rate_bps / c.audio_sat_bps)
        * (1.0 - s.loss_ratio) ** 3
        * math.exp(-s.jitter_ms / c.audio_jitter_decay_ms)
    )
    return _clamp_mos(score)


def video_mos(s: MediaWindowStats, cfg: QoeConfig | None = None) -> float:
    """Video quality surrogate: log rate curve, quadratic loss decay,
    exponential decay of delay beyond a knee."""
    c = cfg or QoeConfig()
    rate_term = math.log1p(s.video_rate_bps / c.video_ref_bps) / math.log1p(
        c.video_ceil_bps / c.video_ref_bps
    )
    delay_term = math.exp(-max(0.0, s.one_way_delay_ms - c.video_delay_knee_ms) / c.video_delay_decay_ms)
    score = 1.0 + 4.0 * rate_term * (1.0 - s.loss_ratio) ** 2 * delay_term
    return _clamp_mos(score)


def qoe_reward(audio: float, video: float, alpha: float) -> float:
    """Convex combination of the audio and video scores."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return alpha * audio + (1.0 - alpha) * video


def window_reward(rlog: ReceiveLog, start_ms: float, end_ms: float, cfg: QoeConfig | None = None) -> float:
    """QoE reward over one window of the receive log."""
    c = cfg or QoeConfig()
    stats = media_window_stats(rlog, start_ms, end_ms)
    return qoe_reward(audio_mos(stats, c), video_mos(stats, c), c.alpha)
