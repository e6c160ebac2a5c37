"""Scripted network profiles: capacity schedule, delay, queue and loss model."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml


@dataclass(frozen=True)
class LossModel:
    """Packet loss process applied at delivery time.

    kind "none": lossless. kind "iid": Bernoulli(p) per packet. kind
    "gilbert": two-state Markov chain advanced per packet; packets are lost
    with probability loss_in_bad while the chain is in the bad state, never
    in the good state. Long-run loss rate of the gilbert model is
    loss_in_bad * p_good_to_bad / (p_good_to_bad + p_bad_to_good).
    """

    kind: str = "none"
    p: float = 0.0
    p_good_to_bad: float = 0.0
    p_bad_to_good: float = 0.0
    loss_in_bad: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "iid", "gilbert"):
            raise ValueError(f"unknown loss model kind {self.kind!r}")
        for name in ("p", "p_good_to_bad", "p_bad_to_good", "loss_in_bad"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"loss model {name}={v} outside [0, 1]")

    @classmethod
    def none(cls) -> "LossModel":
        return cls("none")

    @classmethod
    def iid(cls, p: float) -> "LossModel":
        return cls("iid", p=p)

    @classmethod
    def gilbert(cls, p_good_to_bad: float, p_bad_to_good: float, loss_in_bad: float) -> "LossModel":
        return cls(
            "gilbert",
            p_good_to_bad=p_good_to_bad,
            p_bad_to_good=p_bad_to_good,
            loss_in_bad=loss_in_bad,
        )

    def stationary_loss_rate(self) -> float:
        if self.kind == "iid":
            return self.p
        if self.kind == "gilbert":
            denom = self.p_good_to_bad + self.p_bad_to_good
            if denom == 0.0:
                return 0.0
            return self.loss_in_bad * self.p_good_to_bad / denom
        return 0.0


@dataclass(frozen=True)
class NetworkProfile:
    """One emulated call's bottleneck-link script."""

    name: str
    capacity_schedule: tuple[tuple[int, float], ...]
    base_delay_ms: float = 25.0
    loss_model: LossModel = field(default_factory=LossModel.none)
    queue_capacity_ms: float = 300.0
    duration_ms: int = 60_000

    def __post_init__(self):
        if not self.capacity_schedule:
            raise ValueError(f"profile {self.name}: empty capacity schedule")
        sched = tuple((int(t), float(bps)) for t, bps in self.capacity_schedule)
        object.__setattr__(self, "capacity_schedule", sched)
        if sched[0][0] != 0:
            raise ValueError(f"profile {self.name}: schedule must start at 0 ms")
        starts = [t for t, _ in sched]
        if starts != sorted(starts):
            raise ValueError(f"profile {self.name}: schedule not sorted by start_ms")
        if any(bps <= 0.0 for _, bps in sched):
            raise ValueError(f"profile {self.name}: capacity_bps must be > 0")
        if self.duration_ms < 10_000:
            raise ValueError(f"profile {self.name}: duration_ms must be >= 10000")
        if self.base_delay_ms < 0.0 or self.queue_capacity_ms <= 0.0:
            raise ValueError(f"profile {self.name}: bad delay/queue parameters")

    def capacity_at(self, t_ms: float) -> float:
        cap = self.capacity_schedule[0][1]
        for start, bps in self.capacity_schedule:
            if start <= t_ms:
                cap = bps
            else:
                break
        return cap

    def with_duration(self, duration_ms: int) -> "NetworkProfile":
        return NetworkProfile(
            self.name,
            self.capacity_schedule,
            self.base_delay_ms,
            self.loss_model,
            self.queue_capacity_ms,
            duration_ms,
        )


def _square_wave(low_bps: float, high_bps: float, period_ms: int, duration_ms: int):
    sched = []
    t, high = 0, False
    while t < duration_ms:
        sched.append((t, high_bps if high else low_bps))
        high = not high
        t += period_ms
    return tuple(sched)


def builtin_profiles(duration_ms: int = 60_000) -> list[NetworkProfile]:
    """The shipped profile set: fixed, fluctuating, burst-loss, random-loss
    and a cellular-like piecewise trace."""
    const = lambda bps: ((0, bps),)
    profiles = [
        NetworkProfile("fb_8m", const(8_000_000.0), duration_ms=duration_ms),
        NetworkProfile("fb_4m", const(4_000_000.0), duration_ms=duration_ms),
        NetworkProfile("fb_1m", const(1_000_000.0), duration_ms=duration_ms),
        NetworkProfile("fb_500k", const(500_000.0), duration_ms=duration_ms),
        NetworkProfile("fb_100k", const(100_000.0), duration_ms=duration_ms),
        NetworkProfile(
            "flb_500k_2m",
            _square_wave(500_000.0, 2_000_000.0, 10_000, duration_ms),
            duration_ms=duration_ms,
        ),
        # Gilbert parameters hit ~10% and ~25% stationary loss with half the
        # packets dropped while the chain is in the bad state.
        NetworkProfile(
            "bl_1ml10",
            const(1_000_000.0),
            loss_model=LossModel.gilbert(0.05, 0.20, 0.5),
            duration_ms=duration_ms,
        ),
        NetworkProfile(
            "bl_1ml25",
            const(1_000_000.0),
            loss_model=LossModel.gilbert(0.10, 0.10, 0.5),
            duration_ms=duration_ms,
        ),
        NetworkProfile(
            "rndl_1ml20",
            const(1_000_000.0),
            loss_model=LossModel.iid(0.20),
            duration_ms=duration_ms,
        ),
        NetworkProfile(
            "lte_700k",
            (
                (0, 500_000.0),
                (8_000, 700_000.0),
                (16_000, 400_000.0),
                (24_000, 300_000.0),
                (32_000, 600_000.0),
                (40_000, 700_000.0),
                (48_000, 350_000.0),
                (54_000, 500_000.0),
            ),
            base_delay_ms=45.0,
            duration_ms=duration_ms,
        ),
    ]
    return profiles


def get_profile(name: str, duration_ms: int = 60_000) -> NetworkProfile:
    for prof in builtin_profiles(duration_ms):
        if prof.name == name:
            return prof
    raise KeyError(f"no builtin profile named {name!r}")


def profiles_to_yaml(profiles: list[NetworkProfile]) -> str:
    """Serialize profiles as a multi-document YAML stream, one per profile."""
    docs = []
    for p in profiles:
        doc = {
            "name": p.name,
            "capacity_schedule": [[t, bps] for t, bps in p.capacity_schedule],
            "base_delay_ms": p.base_delay_ms,
            "loss_model": {
                "kind": p.loss_model.kind,
                "p": p.loss_model.p,
                "p_good_to_bad": p.loss_model.p_good_to_bad,
                "p_bad_to_good": p.loss_model.p_bad_to_good,
                "loss_in_bad": p.loss_model.loss_in_bad,
            },
            "queue_capacity_ms": p.queue_capacity_ms,
            "duration_ms": p.duration_ms,
        }
        docs.append(doc)
    return yaml.safe_dump_all(docs, sort_keys=False)


def profiles_from_yaml(text: str) -> list[NetworkProfile]:
    profiles = []
    for doc in yaml.safe_load_all(text):
        if doc is None:
            continue
        loss = doc.get("loss_model", {"kind": "none"})
        profiles.append(
            NetworkProfile(
                name=doc["name"],
                capacity_schedule=tuple((t, bps) for t, bps in doc["capacity_schedule"]),
                base_delay_ms=float(doc.get("base_delay_ms", 25.0)),
                loss_model=LossModel(
                    kind=loss.get("kind", "none"),
                    p=float(loss.get("p", 0.0)),
                    p_good_to_bad=float(loss.get("p_good_to_bad", 0.0)),
                    p_bad_to_good=float(loss.get("p_bad_to_good", 0.0)),
                    loss_in_bad=float(loss.get("loss_in_bad", 0.0)),
                ),
                queue_capacity_ms=float(doc.get("queue_capacity_ms", 300.0)),
                duration_ms=int(doc.get("duration_ms", 60_000)),
            )
        )
    return profiles


def load_profiles(path: str | Path) -> list[NetworkProfile]:
    with open(path, "r", encoding="utf-8") as fh:
        return profiles_from_yaml(fh.read())
