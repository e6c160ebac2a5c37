"""Packet-level link API: a friendly wrapper over the tick kernel.

This is the unit-test surface for the link physics. The fast path used by
calls (media generation fused with the link) talks to the kernel directly;
see bwelab.runner.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import backend
from .profiles import NetworkProfile

_KIND_NAMES = {
    backend.KIND_AUDIO: "audio",
    backend.KIND_VIDEO: "video",
    backend.KIND_SCREENSHARE: "screenshare",
    backend.KIND_PROBING: "probing",
}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}
_STATUS_NAMES = {
    backend.STATUS_DELIVERED: "delivered",
    backend.STATUS_LOST: "lost",
    backend.STATUS_DROPPED: "dropped",
}


@dataclass(frozen=True)
class PacketRecord:
    """One packet's fate. recv_ts_ms is None unless status == "delivered"."""

    seq: int
    kind: str
    size_bytes: int
    send_ts_ms: float
    recv_ts_ms: float | None
    status: str


class LinkState:
    """A media-less kernel instance plus its profile, for tick stepping."""

    def __init__(self, profile: NetworkProfile, rng_seed: int = 0, media_cfg=None, backend_name=None):
        if media_cfg is None:
            from ..config import MediaConfig

            media_cfg = MediaConfig()
        self.profile = profile
        self.kernel = backend.make_kernel(
            profile, media_cfg, rng_seed, media_enabled=False, backend=backend_name
        )

    def counters(self) -> dict:
        return self.kernel.counters()


def step_link(
    state: LinkState, tick_ms: int, arrivals: list[tuple[str, int]]
) -> tuple[LinkState, list[PacketRecord]]:
    """Advance the link one 1 ms tick.

    arrivals are (kind, size_bytes) pairs stamped send_ts_ms = tick_ms; the
    kernel assigns strictly increasing sequence numbers in arrival order.
    Returns the packets resolved during this tick: delivered ones carry
    recv_ts_ms = send_ts + base_delay + queue delay (queueing plus their own
    serialization time), lost/dropped ones carry recv_ts_ms = None.
    """
    for kind, size_bytes in arrivals:
        state.kernel.inject(_KIND_CODES[kind], size_bytes)
    state.kernel.run_interval(tick_ms, 1, 0.0)
    seq, kind, size, send, recv, status = state.kernel.output()
    records = [
        PacketRecord(
            int(seq[i]),
            _KIND_NAMES[int(kind[i])],
            int(size[i]),
            float(send[i]),
            float(recv[i]) if status[i] == backend.STATUS_DELIVERED else None,
            _STATUS_NAMES[int(status[i])],
        )
        for i in range(len(seq))
    ]
    return state, records
