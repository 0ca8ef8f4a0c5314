"""Smooth compactly supported test-function families used by experiments.

The profiles are Gaussians with a C^infinity transition to exact zero at
the support edges, so grid sums, Gauss-Legendre rules, and FFTs all
converge spectrally on them; hard-truncated data would floor every
convergence scan at the truncation-jump scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import SpinorField, sample_field
from .propagators import gauss_legendre_nodes


def _smooth_step(t):
    """C^infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
        out = a / (a + b)
    out[t <= 0.0] = 0.0
    out[t >= 1.0] = 1.0
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Gaussian envelope exp(-(x-c)^2/(4 sigma^2) - i carrier x) tapered to
    exact zero on [lo, lo+taper] and [hi-taper, hi]."""

    center: float
    sigma: float
    carrier: float = 0.0
    n_sigma: float = 6.0
    taper: float = None

    @property
    def lo(self):
        return self.center - self.n_sigma * self.sigma

    @property
    def hi(self):
        return self.center + self.n_sigma * self.sigma

    @property
    def support(self):
        return (self.lo, self.hi)

    def _taper_width(self):
        return self.sigma if self.taper is None else self.taper

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = self._taper_width()
        win = (_smooth_step((x - self.lo) / d)
               * _smooth_step((self.hi - x) / d))
        return (np.exp(-((x - self.center) ** 2) / (4.0 * self.sigma ** 2)
                       - 1j * self.carrier * x) * win)

    def envelope_sq(self, x):
        v = self(x)
        return np.abs(v) ** 2

    def norm_sq(self, n_gl=2048):
        x, w = gauss_legendre_nodes(self.lo, self.hi, n_gl)
        return float(np.sum(self.envelope_sq(x) * w))

    def to_field(self, h, component=0, time_tag=0.0) -> SpinorField:
        fn = lambda x: self(x)
        return sample_field(fn if component == 0 else None,
                            fn if component == 1 else None,
                            self.lo, self.hi, h, time_tag)
