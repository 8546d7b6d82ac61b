"""CSI fingerprint indoor localization: simulator, calibration, entropy and
angle-delay fingerprints, and kernel-regression matching."""

from _csiloc import *  # noqa: F401,F403
from _csiloc import __version__  # noqa: F401
