"""Pure-Python emulation kernel: media source + bottleneck link, 1 ms ticks.

This module defines the reference semantics. The compiled twin in
_ckernel.pyx is a line-for-line transliteration and must produce
bit-identical packet streams (asserted by the backend parity tests). Keep
the arithmetic and its ordering in the two files in lockstep.

Per tick the kernel:
  1. looks up the scheduled link capacity,
  2. emits sender packets (audio cadence, probing trains, paced video
     sharing one byte budget with probing), stamped send_ts = tick,
  3. enqueues arrivals into a drop-tail FIFO limited to queue_capacity_ms
     worth of bytes at the current capacity,
  4. drains the queue at the current capacity with byte-granular carryover;
     a packet finishing serialization at fraction f of the tick is
     delivered at recv_ts = tick + f + base_delay_ms, then the loss model
     decides whether it is marked lost instead.

Statuses: 0 delivered, 1 lost (loss model), 2 dropped (queue overflow).
recv_ts is -1.0 for anything but status 0.

Packet kinds: 0 audio, 1 video, 2 screenshare (never generated, kept for
wire-format fidelity), 3 probing.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0

KIND_AUDIO = 0
KIND_VIDEO = 1
KIND_SCREENSHARE = 2
KIND_PROBING = 3

STATUS_DELIVERED = 0
STATUS_LOST = 1
STATUS_DROPPED = 2

_QUEUE_SLOTS = 16384
_OUT_SLOTS = 8192
_CREDIT_FLOOR = -120_000.0

LOSS_NONE = 0
LOSS_IID = 1
LOSS_GILBERT = 2


class CallKernel:
    """One call leg: sender media model feeding one emulated link."""

    def __init__(
        self,
        cap_start_ms,
        cap_bps,
        base_delay_ms,
        queue_capacity_ms,
        loss_kind,
        loss_p,
        p_good_to_bad,
        p_bad_to_good,
        loss_in_bad,
        rng_seed,
        media_enabled,
        audio_bps,
        audio_pkt_bytes,
        audio_interval_ms,
        video_pkt_bytes,
        probe_interval_ms,
        probe_count,
        probe_rate_mult,
        probe_spacing_ms,
        probe_min_bytes,
        probe_max_bytes,
    ):
        self.cap_start_ms = [int(t) for t in cap_start_ms]
        self.cap_bps = [float(b) for b in cap_bps]
        self.n_caps = len(self.cap_bps)
        self.cap_idx = 0
        self.base_delay_ms = float(base_delay_ms)
        self.queue_capacity_ms = float(queue_capacity_ms)

        self.loss_kind = int(loss_kind)
        self.loss_p = float(loss_p)
        self.p_good_to_bad = float(p_good_to_bad)
        self.p_bad_to_good = float(p_bad_to_good)
        self.loss_in_bad = float(loss_in_bad)
        self.rng_state = int(rng_seed) & _M64
        self.in_bad = 0

        self.media_enabled = bool(media_enabled)
        self.audio_bps = float(audio_bps)
        self.audio_pkt_bytes = int(audio_pkt_bytes)
        self.audio_interval_ms = int(audio_interval_ms)
        self.video_pkt_bytes = int(video_pkt_bytes)
        self.probe_interval_ms = int(probe_interval_ms)
        self.probe_count = int(probe_count)
        self.probe_rate_mult = float(probe_rate_mult)
        self.probe_spacing_ms = int(probe_spacing_ms)
        self.probe_min_bytes = int(probe_min_bytes)
        self.probe_max_bytes = int(probe_max_bytes)

        self.next_seq = 0
        self.video_credit = 0.0
        self.next_probe_start = self.probe_interval_ms
        self.probe_left = 0
        self.probe_next_emit = -1
        self.probe_size = 0

        self.q_seq = [0] * _QUEUE_SLOTS
        self.q_kind = [0] * _QUEUE_SLOTS
        self.q_size = [0] * _QUEUE_SLOTS
        self.q_send = [0.0] * _QUEUE_SLOTS
        self.q_head = 0
        self.q_len = 0
        self.q_bytes = 0
        self.head_served = 0.0

        self.pend_kind = []
        self.pend_size = []

        self.sent = 0
        self.delivered = 0
        self.lost = 0
        self.dropped = 0

        self.out_seq = np.zeros(_OUT_SLOTS, dtype=np.int64)
        self.out_kind = np.zeros(_OUT_SLOTS, dtype=np.int8)
        self.out_size = np.zeros(_OUT_SLOTS, dtype=np.int32)
        self.out_send = np.zeros(_OUT_SLOTS, dtype=np.float64)
        self.out_recv = np.zeros(_OUT_SLOTS, dtype=np.float64)
        self.out_status = np.zeros(_OUT_SLOTS, dtype=np.int8)
        self.out_n = 0

    # -- RNG (splitmix64, kept identical to emulator.loss) --

    def _uniform(self):
        s = (self.rng_state + 0x9E3779B97F4A7C15) & _M64
        self.rng_state = s
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        z = z ^ (z >> 31)
        return (z >> 11) * _INV_2_53

    def _draw_lost(self):
        if self.loss_kind == LOSS_IID:
            return self._uniform() < self.loss_p
        if self.loss_kind == LOSS_GILBERT:
            u = self._uniform()
            if self.in_bad:
                self.in_bad = 0 if u < self.p_bad_to_good else 1
            else:
                self.in_bad = 1 if u < self.p_good_to_bad else 0
            if self.in_bad:
                return self._uniform() < self.loss_in_bad
            return False
        return False

    # -- bookkeeping --

    def inject(self, kind, size_bytes):
        """Queue one external arrival for the first tick of the next run."""
        self.pend_kind.append(int(kind))
        self.pend_size.append(int(size_bytes))

    def _record(self, seq, kind, size, send_ts, recv_ts, status):
        n = self.out_n
        if n >= _OUT_SLOTS:
            raise RuntimeError("kernel output buffer overflow; shorten the interval")
        self.out_seq[n] = seq
        self.out_kind[n] = kind
        self.out_size[n] = size
        self.out_send[n] = send_ts
        self.out_recv[n] = recv_ts
        self.out_status[n] = status
        self.out_n = n + 1

    def _enqueue(self, kind, size, t, limit_bytes):
        seq = self.next_seq
        self.next_seq = seq + 1
        self.sent += 1
        if self.q_bytes + size > limit_bytes:
            self.dropped += 1
            self._record(seq, kind, size, float(t), -1.0, STATUS_DROPPED)
            return
        if self.q_len >= _QUEUE_SLOTS:
            raise RuntimeError("kernel queue slot overflow")
        slot = (self.q_head + self.q_len) % _QUEUE_SLOTS
        self.q_seq[slot] = seq
        self.q_kind[slot] = kind
        self.q_size[slot] = size
        self.q_send[slot] = float(t)
        self.q_len += 1
        self.q_bytes += size

    def run_interval(self, t0_ms, n_ticks, target_bps):
        """Advance n_ticks 1 ms ticks starting at t0_ms; returns the number
        of packets resolved (delivered, lost or dropped) during the run."""
        t0_ms = int(t0_ms)
        target_bps = float(target_bps)
        self.out_n = 0
        for k in range(n_ticks):
            t = t0_ms + k
            # 1. capacity lookup
            while self.cap_idx + 1 < self.n_caps and self.cap_start_ms[self.cap_idx + 1] <= t:
                self.cap_idx += 1
            cap_bpms = self.cap_bps[self.cap_idx] / 8000.0
            limit_bytes = cap_bpms * self.queue_capacity_ms

            # 2. arrivals: external first, then media (audio, probing, video)
            if self.pend_kind:
                for kind, size in zip(self.pend_kind, self.pend_size):
                    self._enqueue(kind, size, t, limit_bytes)
                self.pend_kind = []
                self.pend_size = []
            if self.media_enabled:
                if t % self.audio_interval_ms == 0:
                    self._enqueue(KIND_AUDIO, self.audio_pkt_bytes, t, limit_bytes)
                if t == self.next_probe_start:
                    size = int(
                        self.probe_rate_mult * target_bps * self.probe_spacing_ms / 8000.0 + 0.5
                    )
                    size = min(max(size, self.probe_min_bytes), self.probe_max_bytes)
                    self.probe_size = size
                    self.probe_left = self.probe_count
                    self.probe_next_emit = t
                    self.next_probe_start += self.probe_interval_ms
                if self.probe_left > 0 and t == self.probe_next_emit:
                    self._enqueue(KIND_PROBING, self.probe_size, t, limit_bytes)
                    self.video_credit -= self.probe_size
                    if self.video_credit < _CREDIT_FLOOR:
                        self.video_credit = _CREDIT_FLOOR
                    self.probe_left -= 1
                    self.probe_next_emit += self.probe_spacing_ms
                video_bps = target_bps - self.audio_bps
                if video_bps > 0.0:
                    self.video_credit += video_bps / 8000.0
                while self.video_credit >= self.video_pkt_bytes:
                    self._enqueue(KIND_VIDEO, self.video_pkt_bytes, t, limit_bytes)
                    self.video_credit -= self.video_pkt_bytes

            # 3. service at the current capacity, byte-granular carryover
            used = 0.0
            while self.q_len > 0:
                head = self.q_head
                need = self.q_size[head] - self.head_served
                if used + need <= cap_bpms:
                    used += need
                    completion = t + used / cap_bpms
                    seq = self.q_seq[head]
                    kind = self.q_kind[head]
                    size = self.q_size[head]
                    send_ts = self.q_send[head]
                    self.q_head = (head + 1) % _QUEUE_SLOTS
                    self.q_len -= 1
                    self.q_bytes -= size
                    self.head_served = 0.0
                    if self._draw_lost():
                        self.lost += 1
                        self._record(seq, kind, size, send_ts, -1.0, STATUS_LOST)
                    else:
                        self.delivered += 1
                        recv = completion + self.base_delay_ms
                        self._record(seq, kind, size, send_ts, recv, STATUS_DELIVERED)
                else:
                    self.head_served += cap_bpms - used
                    break
        return self.out_n

    def output(self):
        """Views of the packets resolved by the last run_interval call."""
        n = self.out_n
        return (
            self.out_seq[:n],
            self.out_kind[:n],
            self.out_size[:n],
            self.out_send[:n],
            self.out_recv[:n],
            self.out_status[:n],
        )

    def counters(self):
        return {
            "sent": self.sent,
            "delivered": self.delivered,
            "lost": self.lost,
            "dropped": self.dropped,
            "queued": self.q_len,
        }
