"""bwelab: a desk-scale lab for QoE-driven bandwidth estimation.

Emulated RTC calls over synthetic bottleneck links, offline trajectory
collection labeled with a QoE reward surrogate, and training/evaluation of
distributional offline RL bandwidth estimators against rule-based and
imitation baselines.
"""

__version__ = "0.1.0"
