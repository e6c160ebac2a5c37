"""Selects the emulation kernel implementation at import time.

The compiled Cython kernel is preferred; the pure-Python twin is used when
the extension is unavailable or when BWELAB_PURE_PYTHON is set (handy for
debugging and for benchmarking the two against each other).
"""

from __future__ import annotations

import os

from . import _pycore

if os.environ.get("BWELAB_PURE_PYTHON"):
    _kernel_mod = _pycore
    BACKEND_NAME = "python"
else:
    try:
        from . import _ckernel as _kernel_mod  # type: ignore[attr-defined]

        BACKEND_NAME = "cython"
    except ImportError:
        _kernel_mod = _pycore
        BACKEND_NAME = "python"

KIND_AUDIO = _pycore.KIND_AUDIO
KIND_VIDEO = _pycore.KIND_VIDEO
KIND_SCREENSHARE = _pycore.KIND_SCREENSHARE
KIND_PROBING = _pycore.KIND_PROBING
STATUS_DELIVERED = _pycore.STATUS_DELIVERED
STATUS_LOST = _pycore.STATUS_LOST
STATUS_DROPPED = _pycore.STATUS_DROPPED

_LOSS_KIND_CODE = {"none": _pycore.LOSS_NONE, "iid": _pycore.LOSS_IID, "gilbert": _pycore.LOSS_GILBERT}


def make_kernel(profile, media_cfg, rng_seed, media_enabled=True, backend=None):
    """Build a CallKernel for one call leg on the selected backend."""
    if backend is None:
        mod = _kernel_mod
    elif backend == "python":
        mod = _pycore
    elif backend == "cython":
        from . import _ckernel as mod  # raises ImportError if not built
    else:
        raise ValueError(f"unknown backend {backend!r}")
    lm = profile.loss_model
    return mod.CallKernel(
        [t for t, _ in profile.capacity_schedule],
        [b for _, b in profile.capacity_schedule],
        profile.base_delay_ms,
        profile.queue_capacity_ms,
        _LOSS_KIND_CODE[lm.kind],
        lm.p,
        lm.p_good_to_bad,
        lm.p_bad_to_good,
        lm.loss_in_bad,
        rng_seed,
        media_enabled,
        media_cfg.audio_bps,
        media_cfg.audio_pkt_bytes,
        media_cfg.audio_interval_ms,
        media_cfg.video_pkt_bytes,
        media_cfg.probe_interval_ms,
        media_cfg.probe_count,
        media_cfg.probe_rate_mult,
        media_cfg.probe_spacing_ms,
        media_cfg.probe_min_bytes,
        media_cfg.probe_max_bytes,
    )
