"""Full call loop: emulated link + media source + estimator at 60 ms cadence.

Shared by dataset collection and online evaluation. Each call is driven by a
policy object with reset()/step(); the step receives both the raw and the
normalized observation and returns the bandwidth estimate in bps, which
becomes the sender's target rate for the next decision interval.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import DECISION_INTERVAL_MS, LabConfig
from .emulator import backend
from .emulator.profiles import NetworkProfile
from .qoe import window_reward
from .session import OBS_DIM, Observation, ReceiveLog, build_observation, normalize_observation


def call_seed(root_seed: int, call_id: str) -> int:
    """Stable 64-bit seed for one call, derived from the root seed."""
    digest = hashlib.blake2b(f"{root_seed}:{call_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class CallTrace:
    """Everything a call produced, at decision resolution."""

    call_id: str
    profile_name: str
    raw_obs: np.ndarray  # [n_steps + 1, OBS_DIM]
    norm_obs: np.ndarray  # [n_steps + 1, OBS_DIM]
    actions_bps: np.ndarray  # [n_steps]
    rewards: np.ndarray  # [n_steps], reward of step t measured at t+1
    counters: dict

    @property
    def n_steps(self) -> int:
        return len(self.actions_bps)

    def mean_qoe(self) -> float:
        """Time-average reward, excluding the first decision interval whose
        trailing reward window predates the call."""
        return float(np.mean(self.rewards[1:]))

    def mean_action_bps(self) -> float:
        return float(np.mean(self.actions_bps))


def run_call(
    profile: NetworkProfile,
    policy,
    cfg: LabConfig,
    call_id: str,
    root_seed: int,
    backend_name: str | None = None,
) -> CallTrace:
    """Run one call leg; deterministic given (profile, policy, seeds)."""
    cadence = DECISION_INTERVAL_MS
    n_steps = profile.duration_ms // cadence
    kernel = backend.make_kernel(
        profile,
        cfg.media,
        call_seed(root_seed, call_id),
        media_enabled=True,
        backend=backend_name,
    )
    rlog = ReceiveLog()
    reward_span = cfg.observation.long_mi_ms

    raw_obs = np.zeros((n_steps + 1, OBS_DIM))
    norm_obs = np.zeros((n_steps + 1, OBS_DIM))
    actions = np.zeros(n_steps)
    rewards = np.zeros(n_steps)

    if hasattr(policy, "reset"):
        policy.reset()
    for t in range(n_steps):
        now = t * cadence
        obs = build_observation(rlog, now, cfg.observation)
        nobs = normalize_observation(obs, cfg.action_map, cfg.observation)
        raw_obs[t] = obs.values
        norm_obs[t] = nobs.values
        target = float(policy.step(obs, nobs))
        target = min(max(target, cfg.action_map.b_min_bps), cfg.action_map.b_max_bps)
        actions[t] = target
        kernel.run_interval(now, cadence, target)
        rlog.append_kernel_output(*kernel.output())
        end = now + cadence
        rewards[t] = window_reward(rlog, end - reward_span, end, cfg.qoe)
    final = build_observation(rlog, n_steps * cadence, cfg.observation)
    raw_obs[n_steps] = final.values
    norm_obs[n_steps] = normalize_observation(final, cfg.action_map, cfg.observation).values

    return CallTrace(
        call_id=call_id,
        profile_name=profile.name,
        raw_obs=raw_obs,
        norm_obs=norm_obs,
        actions_bps=actions,
        rewards=rewards,
        counters=kernel.counters(),
    )


class ConstantPolicy:
    """Always requests the same rate (diagnostic probe)."""

    def __init__(self, bps: float):
        self.bps = float(bps)

    def reset(self):
        pass

    def step(self, raw_obs: Observation, norm_obs: Observation) -> float:
        return self.bps
