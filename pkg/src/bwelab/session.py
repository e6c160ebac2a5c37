"""Receiver-side session state: packet log, features and the action map.

The observation vector is 54 numbers: 9 features, each over 3 short (60 ms)
and 3 long (600 ms) monitoring intervals, feature-major with the newest
interval first. Features per interval: receiving rate (bps), mean one-way
delay (ms), loss ratio (sequence-gap accounting), jitter (std of
consecutive inter-arrival gaps, ms), packet-count fractions of video,
audio, screenshare and probing packets, and the latest probing-train rate
estimate (bps). Intervals with zero received packets yield all zeros.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import ActionMapConfig, ObservationConfig
from .emulator import backend

log = logging.getLogger("bwelab.session")

N_FEATURES = 9
N_INTERVALS = 6
OBS_DIM = N_FEATURES * N_INTERVALS

F_RECV_RATE = 0
F_DELAY = 1
F_LOSS = 2
F_JITTER = 3
F_P_VIDEO = 4
F_P_AUDIO = 5
F_P_SCREENSHARE = 6
F_P_PROBING = 7
F_PROBE_EST = 8

_PROBE_TRAIN_GAP_MS = 1000.0


@dataclass
class Observation:
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (OBS_DIM,):
            raise ValueError(f"observation must have shape ({OBS_DIM},), got {self.values.shape}")


class ReceiveLog:
    """Delivered packets of one call leg, in receive order.

    The link is FIFO so receive order equals send order among delivered
    packets; recv_ts is non-decreasing, which the windowed feature
    extraction relies on. Probing packets are additionally mirrored into
    dedicated arrays so train-rate estimates avoid full-log scans.
    """

    def __init__(self, capacity: int = 4096):
        self._seq = np.empty(capacity, dtype=np.int64)
        self._kind = np.empty(capacity, dtype=np.int8)
        self._size = np.empty(capacity, dtype=np.int32)
        self._send = np.empty(capacity, dtype=np.float64)
        self._recv = np.empty(capacity, dtype=np.float64)
        self.n = 0
        self._probe_send: list[float] = []
        self._probe_recv: list[float] = []
        self._probe_size: list[int] = []

    def _grow(self, needed: int):
        cap = len(self._seq)
        while cap < needed:
            cap *= 2
        for name in ("_seq", "_kind", "_size", "_send", "_recv"):
            old = getattr(self, name)
            new = np.empty(cap, dtype=old.dtype)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)

    def append_kernel_output(self, seq, kind, size, send, recv, status):
        """Append the delivered packets from one kernel interval."""
        mask = status == backend.STATUS_DELIVERED
        m = int(mask.sum())
        if m == 0:
            return
        if self.n + m > len(self._seq):
            self._grow(self.n + m)
        sl = slice(self.n, self.n + m)
        self._seq[sl] = seq[mask]
        self._kind[sl] = kind[mask]
        self._size[sl] = size[mask]
        self._send[sl] = send[mask]
        self._recv[sl] = recv[mask]
        self.n += m
        probe = mask & (kind == backend.KIND_PROBING)
        if probe.any():
            self._probe_send.extend(send[probe].tolist())
            self._probe_recv.extend(recv[probe].tolist())
            self._probe_size.extend(size[probe].tolist())

    @property
    def seq(self):
        return self._seq[: self.n]

    @property
    def kind(self):
        return self._kind[: self.n]

    @property
    def size(self):
        return self._size[: self.n]

    @property
    def send(self):
        return self._send[: self.n]

    @property
    def recv(self):
        return self._recv[: self.n]

    def probe_estimate_at(self, t_ms: float) -> float:
        """Delivered-rate estimate of the most recent probing train.

        Trains are probe packets grouped by send gaps above 1 s. The rate is
        the bits of every delivered packet after the first divided by the
        receive span, the classic packet-train estimate; 0 before the first
        train with at least two delivered packets.
        """
        n = len(self._probe_recv)
        best = 0.0
        first_recv = None
        prev_send = None
        bytes_after_first = 0
        last_recv = 0.0
        count = 0
        for i in range(n):
            if self._probe_recv[i] > t_ms:
                break
            if prev_send is not None and self._probe_send[i] - prev_send <= _PROBE_TRAIN_GAP_MS:
                bytes_after_first += self._probe_size[i]
                last_recv = self._probe_recv[i]
                count += 1
            else:
                if count >= 2 and last_recv > first_recv:
                    best = bytes_after_first * 8000.0 / (last_recv - first_recv)
                first_recv = self._probe_recv[i]
                last_recv = first_recv
                bytes_after_first = 0
                count = 1
            prev_send = self._probe_send[i]
        if count >= 2 and last_recv > first_recv:
            best = bytes_after_first * 8000.0 / (last_recv - first_recv)
        return best


def _window_slice(recv: np.ndarray, start_ms: float, end_ms: float) -> slice:
    i0 = int(np.searchsorted(recv, start_ms, side="left"))
    i1 = int(np.searchsorted(recv, end_ms, side="left"))
    return slice(i0, i1)


def window_features(rlog: ReceiveLog, start_ms: float, end_ms: float) -> np.ndarray:
    """The 9 per-interval features over [start_ms, end_ms)."""
    out = np.zeros(N_FEATURES)
    sl = _window_slice(rlog.recv, start_ms, end_ms)
    received = sl.stop - sl.start
    if received == 0:
        return out
    seq = rlog.seq
    size = rlog.size[sl]
    recv = rlog.recv[sl]
    send = rlog.send[sl]
    kind = rlog.kind[sl]
    window_s = (end_ms - start_ms) / 1000.0
    out[F_RECV_RATE] = float(size.sum()) * 8.0 / window_s
    out[F_DELAY] = float(np.mean(recv - send))
    # Sequence gaps relative to the previous delivered packet of the call;
    # gaps spanning the window edge belong to the successor's window.
    prev_seq = int(seq[sl.start - 1]) if sl.start > 0 else -1
    lost = int(seq[sl.stop - 1]) - prev_seq - received
    out[F_LOSS] = lost / (lost + received)
    if received >= 2:
        out[F_JITTER] = float(np.std(np.diff(recv)))
    counts = np.bincount(kind, minlength=4)
    out[F_P_VIDEO] = counts[backend.KIND_VIDEO] / received
    out[F_P_AUDIO] = counts[backend.KIND_AUDIO] / received
    out[F_P_SCREENSHARE] = counts[backend.KIND_SCREENSHARE] / received
    out[F_P_PROBING] = counts[backend.KIND_PROBING] / received
    out[F_PROBE_EST] = rlog.probe_estimate_at(end_ms)
    return out


def build_observation(rlog: ReceiveLog, now_ms: float, obs_cfg: ObservationConfig | None = None) -> Observation:
    """Raw observation at a decision instant; pure function of the log."""
    cfg = obs_cfg or ObservationConfig()
    values = np.zeros(OBS_DIM)
    spans = [cfg.short_mi_ms] * cfg.mi_count + [cfg.long_mi_ms] * cfg.mi_count
    for m, span in enumerate(spans):
        k = (m % cfg.mi_count) + 1
        feats = window_features(rlog, now_ms - span * k, now_ms - span * (k - 1))
        values[m::N_INTERVALS] = feats
    return Observation(values, normalized=False)


def normalize_observation(
    obs: Observation,
    action_map: ActionMapConfig | None = None,
    obs_cfg: ObservationConfig | None = None,
) -> Observation:
    """Map every feature into [0, 1]; applied exactly once per observation.

    Rates and the probing estimate are log-compressed by ln(1+x)/ln(1+B_max)
    and clipped at 1; delays and jitter are capped then scaled; loss ratios
    and packet-kind fractions pass through.
    """
    if obs.normalized:
        raise ValueError("observation is already normalized")
    am = action_map or ActionMapConfig()
    cfg = obs_cfg or ObservationConfig()
    v = obs.values.copy()
    log_den = math.log1p(am.b_max_bps)

    def seg(f):
        return slice(f * N_INTERVALS, (f + 1) * N_INTERVALS)

    for f in (F_RECV_RATE, F_PROBE_EST):
        v[seg(f)] = np.minimum(np.log1p(v[seg(f)]) / log_den, 1.0)
    v[seg(F_DELAY)] = np.minimum(v[seg(F_DELAY)], cfg.delay_cap_ms) / cfg.delay_cap_ms
    v[seg(F_JITTER)] = np.minimum(v[seg(F_JITTER)], cfg.jitter_cap_ms) / cfg.jitter_cap_ms
    return Observation(v, normalized=True)


class _ClampWarned:
    action = False
    bps = False


def action_to_bps(a: float, action_map: ActionMapConfig | None = None) -> float:
    """Log-linear map from a normalized action in [-1, 1] to bps."""
    am = action_map or ActionMapConfig()
    if a < -1.0 or a > 1.0:
        if not _ClampWarned.action:
            log.warning("action %.6f outside [-1, 1]; clamping", a)
            _ClampWarned.action = True
        a = min(max(a, -1.0), 1.0)
    lo, hi = math.log(am.b_min_bps), math.log(am.b_max_bps)
    return math.exp(lo + (a + 1.0) / 2.0 * (hi - lo))


def bps_to_action(b: float, action_map: ActionMapConfig | None = None) -> float:
    """Inverse of action_to_bps; round-trips within 1e-9 relative."""
    am = action_map or ActionMapConfig()
    if b < am.b_min_bps or b > am.b_max_bps:
        if not _ClampWarned.bps:
            log.warning("bps %.1f outside [%.0f, %.0f]; clamping", b, am.b_min_bps, am.b_max_bps)
            _ClampWarned.bps = True
        b = min(max(b, am.b_min_bps), am.b_max_bps)
    lo, hi = math.log(am.b_min_bps), math.log(am.b_max_bps)
    return (math.log(b) - lo) / (hi - lo) * 2.0 - 1.0
