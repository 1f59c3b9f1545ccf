"""Massive-MIMO Rician channel simulator with LOS-based conjugate beamforming.

Submodules
----------
channel      steering vectors, Rician links, correlated scattering, user drops
beamforming  LOS-matched beamformers, MRC/ZF/MMSE detectors, downlink precoder
analytic     closed-form statistical SINRs, rate bounds and scaling limits
estimation   pilot-based MMSE estimation of the scattered channel
montecarlo   seeded ergodic-rate estimation and parameter sweeps
cli          config files, presets, CSV/SVG output
"""

from .errors import DegenerateAngleWarning, InvalidArgumentError, SingularMatrixError

__version__ = "0.1.0"

__all__ = ["InvalidArgumentError", "SingularMatrixError", "DegenerateAngleWarning", "__version__"]
