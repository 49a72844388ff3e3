"""Weakly-supervised lesion localization toolkit.

Trains an object-presence classifier from image-level labels only, then a
PPO crop-control policy whose reward is the frozen classifier's presence
probability on the current crop.  Ships MIL and fully-supervised baselines,
a synthetic-lesion dataset generator, and a dice/IoU evaluation harness.
"""

__version__ = "0.1.0"
