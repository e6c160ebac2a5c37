# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled emulation kernel: line-for-line twin of _pycore.CallKernel.

Keep the arithmetic and its ordering in lockstep with _pycore.py; the
backend parity test asserts bit-identical packet streams. See _pycore for
the semantics documentation.
"""

import numpy as np

from libc.stdint cimport int8_t, int32_t, int64_t, uint64_t

cdef double _INV_2_53 = 1.0 / 9007199254740992.0

KIND_AUDIO = 0
KIND_VIDEO = 1
KIND_SCREENSHARE = 2
KIND_PROBING = 3

STATUS_DELIVERED = 0
STATUS_LOST = 1
STATUS_DROPPED = 2

DEF QUEUE_SLOTS = 16384
DEF OUT_SLOTS = 8192
cdef double _CREDIT_FLOOR = -120000.0

LOSS_NONE = 0
LOSS_IID = 1
LOSS_GILBERT = 2


cdef class CallKernel:
    cdef int64_t[:] cap_start_ms
    cdef double[:] cap_bps
    cdef int n_caps, cap_idx
    cdef double base_delay_ms, queue_capacity_ms

    cdef int loss_kind
    cdef double loss_p, p_good_to_bad, p_bad_to_good, loss_in_bad
    cdef uint64_t rng_state
    cdef int in_bad

    cdef bint media_enabled
    cdef double audio_bps
    cdef int audio_pkt_bytes, audio_interval_ms, video_pkt_bytes
    cdef int probe_interval_ms, probe_count, probe_spacing_ms
    cdef double probe_rate_mult
    cdef int probe_min_bytes, probe_max_bytes

    cdef int64_t next_seq
    cdef double video_credit
    cdef int64_t next_probe_start
    cdef int probe_left
    cdef int64_t probe_next_emit
    cdef int probe_size

    cdef int64_t[:] q_seq
    cdef int8_t[:] q_kind
    cdef int32_t[:] q_size
    cdef double[:] q_send
    cdef int q_head, q_len
    cdef int64_t q_bytes
    cdef double head_served

    cdef list pend_kind
    cdef list pend_size

    cdef public int64_t sent, delivered, lost, dropped

    cdef object out_seq_arr, out_kind_arr, out_size_arr, out_send_arr, out_recv_arr, out_status_arr
    cdef int64_t[:] out_seq
    cdef int8_t[:] out_kind
    cdef int32_t[:] out_size
    cdef double[:] out_send
    cdef double[:] out_recv
    cdef int8_t[:] out_status
    cdef int out_n

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
        self.cap_start_ms = np.asarray(cap_start_ms, dtype=np.int64)
        self.cap_bps = np.asarray(cap_bps, dtype=np.float64)
        self.n_caps = self.cap_bps.shape[0]
        self.cap_idx = 0
        self.base_delay_ms = base_delay_ms
        self.queue_capacity_ms = queue_capacity_ms

        self.loss_kind = loss_kind
        self.loss_p = loss_p
        self.p_good_to_bad = p_good_to_bad
        self.p_bad_to_good = p_bad_to_good
        self.loss_in_bad = loss_in_bad
        self.rng_state = <uint64_t> (int(rng_seed) & ((1 << 64) - 1))
        self.in_bad = 0

        self.media_enabled = media_enabled
        self.audio_bps = audio_bps
        self.audio_pkt_bytes = audio_pkt_bytes
        self.audio_interval_ms = audio_interval_ms
        self.video_pkt_bytes = video_pkt_bytes
        self.probe_interval_ms = probe_interval_ms
        self.probe_count = probe_count
        self.probe_rate_mult = probe_rate_mult
        self.probe_spacing_ms = probe_spacing_ms
        self.probe_min_bytes = probe_min_bytes
        self.probe_max_bytes = probe_max_bytes

        self.next_seq = 0
        self.video_credit = 0.0
        self.next_probe_start = self.probe_interval_ms
        self.probe_left = 0
        self.probe_next_emit = -1
        self.probe_size = 0

        self.q_seq = np.zeros(QUEUE_SLOTS, dtype=np.int64)
        self.q_kind = np.zeros(QUEUE_SLOTS, dtype=np.int8)
        self.q_size = np.zeros(QUEUE_SLOTS, dtype=np.int32)
        self.q_send = np.zeros(QUEUE_SLOTS, dtype=np.float64)
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

        self.out_seq_arr = np.zeros(OUT_SLOTS, dtype=np.int64)
        self.out_kind_arr = np.zeros(OUT_SLOTS, dtype=np.int8)
        self.out_size_arr = np.zeros(OUT_SLOTS, dtype=np.int32)
        self.out_send_arr = np.zeros(OUT_SLOTS, dtype=np.float64)
        self.out_recv_arr = np.zeros(OUT_SLOTS, dtype=np.float64)
        self.out_status_arr = np.zeros(OUT_SLOTS, dtype=np.int8)
        self.out_seq = self.out_seq_arr
        self.out_kind = self.out_kind_arr
        self.out_size = self.out_size_arr
        self.out_send = self.out_send_arr
        self.out_recv = self.out_recv_arr
        self.out_status = self.out_status_arr
        self.out_n = 0

    cdef inline double _uniform(self):
        cdef uint64_t s = self.rng_state + <uint64_t> 0x9E3779B97F4A7C15
        self.rng_state = s
        cdef uint64_t z = s
        z = (z ^ (z >> 30)) * <uint64_t> 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * <uint64_t> 0x94D049BB133111EB
        z = z ^ (z >> 31)
        return <double> (z >> 11) * _INV_2_53

    cdef inline bint _draw_lost(self):
        cdef double u
        if self.loss_kind == 1:  # iid
            return self._uniform() < self.loss_p
        if self.loss_kind == 2:  # gilbert
            u = self._uniform()
            if self.in_bad:
                self.in_bad = 0 if u < self.p_bad_to_good else 1
            else:
                self.in_bad = 1 if u < self.p_good_to_bad else 0
            if self.in_bad:
                return self._uniform() < self.loss_in_bad
            return False
        return False

    def inject(self, kind, size_bytes):
        self.pend_kind.append(int(kind))
        self.pend_size.append(int(size_bytes))

    cdef inline int _record(
        self, int64_t seq, int kind, int size, double send_ts, double recv_ts, int status
    ) except -1:
        cdef int n = self.out_n
        if n >= OUT_SLOTS:
            raise RuntimeError("kernel output buffer overflow; shorten the interval")
        self.out_seq[n] = seq
        self.out_kind[n] = <int8_t> kind
        self.out_size[n] = size
        self.out_send[n] = send_ts
        self.out_recv[n] = recv_ts
        self.out_status[n] = <int8_t> status
        self.out_n = n + 1
        return 0

    cdef inline int _enqueue(self, int kind, int size, int64_t t, double limit_bytes) except -1:
        cdef int64_t seq = self.next_seq
        cdef int slot
        self.next_seq = seq + 1
        self.sent += 1
        if self.q_bytes + size > limit_bytes:
            self.dropped += 1
            self._record(seq, kind, size, <double> t, -1.0, 2)
            return 0
        if self.q_len >= QUEUE_SLOTS:
            raise RuntimeError("kernel queue slot overflow")
        slot = (self.q_head + self.q_len) % QUEUE_SLOTS
        self.q_seq[slot] = seq
        self.q_kind[slot] = <int8_t> kind
        self.q_size[slot] = size
        self.q_send[slot] = <double> t
        self.q_len += 1
        self.q_bytes += size
        return 0

    def run_interval(self, t0_ms, n_ticks, target_bps):
        cdef int64_t t0 = int(t0_ms)
        cdef int n = int(n_ticks)
        cdef double target = float(target_bps)
        cdef int64_t t
        cdef int k, head, size, kind, psize
        cdef int64_t seq
        cdef double cap_bpms, limit_bytes, used, need, completion, send_ts, video_bps
        self.out_n = 0
        for k in range(n):
            t = t0 + k
            while self.cap_idx + 1 < self.n_caps and self.cap_start_ms[self.cap_idx + 1] <= t:
                self.cap_idx += 1
            cap_bpms = self.cap_bps[self.cap_idx] / 8000.0
            limit_bytes = cap_bpms * self.queue_capacity_ms

            if self.pend_kind:
                for kind_o, size_o in zip(self.pend_kind, self.pend_size):
                    self._enqueue(<int> kind_o, <int> size_o, t, limit_bytes)
                self.pend_kind = []
                self.pend_size = []
            if self.media_enabled:
                if t % self.audio_interval_ms == 0:
                    self._enqueue(0, self.audio_pkt_bytes, t, limit_bytes)
                if t == self.next_probe_start:
                    psize = <int> (self.probe_rate_mult * target * self.probe_spacing_ms / 8000.0 + 0.5)
                    if psize < self.probe_min_bytes:
                        psize = self.probe_min_bytes
                    if psize > self.probe_max_bytes:
                        psize = self.probe_max_bytes
                    self.probe_size = psize
                    self.probe_left = self.probe_count
                    self.probe_next_emit = t
                    self.next_probe_start += self.probe_interval_ms
                if self.probe_left > 0 and t == self.probe_next_emit:
                    self._enqueue(3, self.probe_size, t, limit_bytes)
                    self.video_credit -= self.probe_size
                    if self.video_credit < _CREDIT_FLOOR:
                        self.video_credit = _CREDIT_FLOOR
                    self.probe_left -= 1
                    self.probe_next_emit += self.probe_spacing_ms
                video_bps = target - self.audio_bps
                if video_bps > 0.0:
                    self.video_credit += video_bps / 8000.0
                while self.video_credit >= self.video_pkt_bytes:
                    self._enqueue(1, self.video_pkt_bytes, t, limit_bytes)
                    self.video_credit -= self.video_pkt_bytes

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
                    self.q_head = (head + 1) % QUEUE_SLOTS
                    self.q_len -= 1
                    self.q_bytes -= size
                    self.head_served = 0.0
                    if self._draw_lost():
                        self.lost += 1
                        self._record(seq, kind, size, send_ts, -1.0, 1)
                    else:
                        self.delivered += 1
                        self._record(seq, kind, size, send_ts, completion + self.base_delay_ms, 0)
                else:
                    self.head_served += cap_bpms - used
                    break
        return self.out_n

    def output(self):
        n = self.out_n
        return (
            self.out_seq_arr[:n],
            self.out_kind_arr[:n],
            self.out_size_arr[:n],
            self.out_send_arr[:n],
            self.out_recv_arr[:n],
            self.out_status_arr[:n],
        )

    def counters(self):
        return {
            "sent": self.sent,
            "delivered": self.delivered,
            "lost": self.lost,
            "dropped": self.dropped,
            "queued": self.q_len,
        }
