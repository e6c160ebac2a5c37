from .backend import BACKEND_NAME, make_kernel
from .link import LinkState, PacketRecord, step_link
from .loss import LossState, sample_loss
from .profiles import (
    LossModel,
    NetworkProfile,
    builtin_profiles,
    get_profile,
    load_profiles,
    profiles_from_yaml,
    profiles_to_yaml,
)

__all__ = [
    "BACKEND_NAME",
    "LinkState",
    "LossModel",
    "LossState",
    "NetworkProfile",
    "PacketRecord",
    "builtin_profiles",
    "get_profile",
    "load_profiles",
    "make_kernel",
    "profiles_from_yaml",
    "profiles_to_yaml",
    "sample_loss",
    "step_link",
]
