"""Rule-based delay-gradient bandwidth estimator (the dataset's behavior policy).

A smoothed one-way delay is tracked with an EMA; its per-step gradient and
the newest short-interval loss ratio drive a multiplicative
decrease / additive-multiplicative increase rule. During data collection an
exploration jitter occasionally perturbs the estimate so the offline dataset
contains action diversity; evaluation runs jitter-free.
"""

from __future__ import annotations

import numpy as np

from .config import ActionMapConfig, BehaviorConfig
from .session import F_DELAY, F_LOSS, F_RECV_RATE, N_INTERVALS, Observation


class BehaviorPolicy:
    """Stateful estimator; one instance per call leg."""

    def __init__(
        self,
        cfg: BehaviorConfig | None = None,
        action_map: ActionMapConfig | None = None,
        explore: bool = False,
        rng: np.random.Generator | None = None,
    ):
        self.cfg = cfg or BehaviorConfig()
        self.action_map = action_map or ActionMapConfig()
        self.explore = explore
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.estimate_bps = float(self.cfg.init_estimate_bps)
        self.smoothed_delay_ms: float | None = None
        self.prev_smoothed_delay_ms = 0.0

    def step(self, raw_obs: Observation, norm_obs: Observation | None = None) -> float:
        """Consume the newest raw observation, return the bps estimate."""
        if raw_obs.normalized:
            raise ValueError("behavior policy expects the raw observation")
        c = self.cfg
        if raw_obs.values[F_RECV_RATE * N_INTERVALS] == 0.0:
            # Nothing received in the newest interval: no delay sample, hold.
            return self.estimate_bps
        delay = float(raw_obs.values[F_DELAY * N_INTERVALS])
        loss = float(raw_obs.values[F_LOSS * N_INTERVALS])
        if self.smoothed_delay_ms is None:
            # First usable sample: no gradient yet.
            self.smoothed_delay_ms = delay
        self.prev_smoothed_delay_ms = self.smoothed_delay_ms
        self.smoothed_delay_ms = (
            (1.0 - c.ema_weight) * self.smoothed_delay_ms + c.ema_weight * delay
        )
        gradient = self.smoothed_delay_ms - self.prev_smoothed_delay_ms

        est = self.estimate_bps
        if loss > c.loss_decrease or gradient > c.grad_decrease_ms:
            est = c.decrease_gain * est
        elif loss < c.loss_increase and gradient < c.grad_increase_ms:
            est = c.increase_gain * est + c.increase_offset_bps
        if self.explore and self.rng.random() < c.jitter_prob:
            est *= self.rng.uniform(1.0 - c.jitter_span, 1.0 + c.jitter_span)
        est = min(max(est, self.action_map.b_min_bps), self.action_map.b_max_bps)
        self.estimate_bps = est
        return est
