"""Two-component spinor fields on uniform grids, potentials, Fourier helpers.

Conventions used everywhere in the package (fixed here, in one place):

* spinor component 0 is the paper-style "component 1" (upper), component 1
  is "component 2" (lower); L = diag(1, -1).
* Fourier transform  fhat(xi) = (2 pi)^{-1/2} Integral e^{-i xi x} f(x) dx,
  under which the free line generator i L d/dx acts as multiplication by
  diag(-xi, +xi).
* L^2 inner products are rectangle sums h * sum(conj(f) g); fields are
  compactly supported well inside their grids, so this is spectrally
  accurate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

L_MATRIX = np.diag([1.0, -1.0])
DEFAULT_GAMMA = np.array([[0.0, 1.0], [1.0, 0.0]])

FIELD_HEADER = "# spinor-field v1"


@dataclass(frozen=True)
class SpinorField:
    """Complex 2-component field sampled on a uniform spatial grid.

    values[i, c] is component c at x = x_min + i*h.  time_tag records which
    constant-time slice the sample lives on; propagators check and update it.
    """

    x_min: float
    h: float
    values: np.ndarray
    time_tag: float = 0.0

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[1] != 2:
            raise DomainError("values must have shape (n, 2)")
        if not np.all(np.isfinite(v.view(float))):
            raise DomainError("field values must be finite")
        if not (self.h > 0):
            raise DomainError("grid spacing must be positive")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def x_max(self):
        return self.x_min + (self.n - 1) * self.h

    @property
    def x(self):
        return self.x_min + self.h * np.arange(self.n)

    def norm_sq(self):
        return float(self.h * np.sum(np.abs(self.values) ** 2))

    def norm(self):
        return float(np.sqrt(self.norm_sq()))

    def inner(self, other: "SpinorField") -> complex:
        """(self | other), antilinear in self; grids must coincide."""
        if not self.same_grid(other):
            raise DomainError("inner product requires identical grids")
        return complex(self.h * np.vdot(self.values, other.values))

    def same_grid(self, other):
        return (self.n == other.n
                and abs(self.x_min - other.x_min) <= 1e-9 * max(1.0, abs(self.x_min))
                and abs(self.h - other.h) <= 1e-12 * self.h)

    def component(self, c):
        return self.values[:, c]

    def with_values(self, values, time_tag=None):
        return replace(self, values=values,
                       time_tag=self.time_tag if time_tag is None else time_tag)

    def support_bounds(self, tol=0.0):
        """Smallest/largest grid x carrying |value| > tol, or None if empty."""
        mask = np.max(np.abs(self.values), axis=1) > tol
        if not np.any(mask):
            return None
        idx = np.nonzero(mask)[0]
        return self.x_min + self.h * idx[0], self.x_min + self.h * idx[-1]

    # -- serialization: five columns (x, Re p1, Im p1, Re p2, Im p2) ----------

    def save_text(self, path):
        header = f"{FIELD_HEADER} h={self.h!r} t={self.time_tag!r}"
        cols = np.column_stack([
            self.x,
            self.values[:, 0].real, self.values[:, 0].imag,
            self.values[:, 1].real, self.values[:, 1].imag,
        ])
        np.savetxt(path, cols, header=header.lstrip("# "), comments="# ")

    @staticmethod
    def load_text(path):
        with open(path) as fh:
            header = fh.readline().strip()
        if not header.startswith(FIELD_HEADER):
            raise DomainError(f"expected header starting {FIELD_HEADER!r}")
        fields = dict(tok.split("=") for tok in header.split()[3:])
        data = np.atleast_2d(np.loadtxt(path, comments="#"))
        values = np.empty((data.shape[0], 2), dtype=complex)
        values[:, 0] = data[:, 1] + 1j * data[:, 2]
        values[:, 1] = data[:, 3] + 1j * data[:, 4]
        return SpinorField(x_min=float(data[0, 0]), h=float(fields["h"]),
                           values=values, time_tag=float(fields["t"]))


def make_grid_field(x_min, x_max, h, time_tag=0.0):
    n = int(round((x_max - x_min) / h)) + 1
    return SpinorField(x_min=x_min, h=h, values=np.zeros((n, 2), complex),
                       time_tag=time_tag)


def sample_field(fn1, fn2, x_min, x_max, h, time_tag=0.0):
    """Sample component callables (either may be None) on a fresh grid."""
    f = make_grid_field(x_min, x_max, h, time_tag)
    v = f.values
    if fn1 is not None:
        v[:, 0] = fn1(f.x)
    if fn2 is not None:
        v[:, 1] = fn2(f.x)
    return f


def gaussian_packet(center, sigma, carrier=0.0, component=0, h=None,
                    n_sigma=8.0, time_tag=0.0, x_min=None, x_max=None):
    """Truncated Gaussian bump  exp(-(x-c)^2/(4 sigma^2) - i carrier x).

    |f|^2 has standard deviation sigma; the support is cut at n_sigma sigma
    (hard zero outside), so supp f is [center - n_sigma sigma,
    center + n_sigma sigma] up to the grid.
    """
    if h is None:
        h = sigma / 64.0
    lo = center - n_sigma * sigma if x_min is None else x_min
    hi = center + n_sigma * sigma if x_max is None else x_max

    def env(x):
        out = np.exp(-((x - center) ** 2) / (4.0 * sigma ** 2)
                     - 1j * carrier * x)
        out[np.abs(x - center) > n_sigma * sigma] = 0.0
        return out

    return sample_field(env if component == 0 else None,
                        env if component == 1 else None,
                        lo, hi, h, time_tag)


def translate_field(f: SpinorField, t: float) -> SpinorField:
    """Left translation f^t(x) = f(x + t); both components, metadata shift only."""
    return replace(f, x_min=f.x_min - t)


def embed_field(f: SpinorField, x_min: float, x_max: float) -> SpinorField:
    """Zero-pad f into a larger aligned grid covering [x_min, x_max]."""
    n_left = int(np.ceil(max(0.0, (f.x_min - x_min) / f.h - 1e-9)))
    n_right = int(np.ceil(max(0.0, (x_max - f.x_max) / f.h - 1e-9)))
    values = np.zeros((n_left + f.n + n_right, 2), dtype=complex)
    values[n_left:n_left + f.n] = f.values
    return SpinorField(x_min=f.x_min - n_left * f.h, h=f.h, values=values,
                       time_tag=f.time_tag)


def resample_values(values, x_min, h, new_x, pad_factor=2):
    """Band-limited (FFT) resampling of compactly supported grid data.

    Returns (new_values, residual) where residual bounds the wrap-around
    leakage caused by treating the padded data as periodic.
    """
    n = values.shape[0]
    npad = pad_factor * n
    out = np.zeros((len(new_x),) + values.shape[1:], dtype=complex)
    residual = 0.0
    xi = 2.0 * np.pi * np.fft.fftfreq(npad, d=h)
    cols = values.reshape(n, -1)
    ocols = out.reshape(len(new_x), -1)
    for c in range(cols.shape[1]):
        padded = np.zeros(npad, complex)
        padded[:n] = cols[:, c]
        spec = np.fft.fft(padded)
        # evaluate the trigonometric interpolant at the new nodes
        phase = np.exp(1j * np.outer(new_x - x_min, xi))
        ocols[:, c] = phase @ spec / npad
        edge = np.abs(cols[:, c])
        if n > 4:
            residual = max(residual, float(edge[0]), float(edge[-1]))
    return out, residual


# -- Fourier helpers ----------------------------------------------------------

def fourier_transform(values, x_min, h, dxi_max=None):
    """fhat on the fft grid; returns (xi, fhat) with the package convention.

    dxi_max requests zero-padding until the xi-grid spacing 2 pi/(n h) drops
    below it, so spectral densities can be integrated against structured
    multipliers (Fermi factors) without grid bias.
    """
    n = values.shape[0]
    if dxi_max is not None:
        need = int(np.ceil(2.0 * np.pi / (dxi_max * h)))
        if need > n:
            pad = np.zeros((need - n,) + values.shape[1:], dtype=complex)
            values = np.concatenate([values, pad], axis=0)
            n = need
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    phase = np.exp(-1j * xi * x_min)
    fhat = h / np.sqrt(2.0 * np.pi) * phase[:, None] * np.fft.fft(values, axis=0)
    return xi, fhat


def inverse_fourier_transform(fhat, xi, x_min, h):
    n = fhat.shape[0]
    phase = np.exp(1j * xi * x_min)
    vals = np.fft.ifft(phase[:, None] * fhat, axis=0)
    return np.sqrt(2.0 * np.pi) / h * vals


# -- potentials ----------------------------------------------------------------

def _check_gamma(gamma):
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (2, 2):
        raise DomainError("gamma must be 2x2")
    if not np.allclose(gamma, gamma.conj().T, atol=1e-12):
        raise DomainError("gamma must be Hermitian")
    if not np.allclose(gamma @ gamma, np.eye(2), atol=1e-12):
        raise DomainError("gamma^2 must be the identity")
    if not np.allclose(gamma @ L_MATRIX + L_MATRIX @ gamma, 0.0, atol=1e-12):
        raise DomainError("gamma must anticommute with L")
    return gamma


@dataclass(frozen=True)
class DiracPotential:
    """Hermitian matrix potential V(x) with V -> 0 at -inf, V -> m*gamma at +inf.

    shape:
      zero           V = 0 everywhere (massless comparison dynamics)
      constant_mass  V = m*gamma everywhere (eternal massive line)
      tanh_switch    V = m/2 (1 + tanh((x - center)/width)) gamma
    """

    m: float = 1.0
    shape: str = "tanh_switch"
    center: float = 0.0
    width: float = 1.0
    gamma: np.ndarray = field(default_factory=lambda: DEFAULT_GAMMA.copy())

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))
        if self.shape not in ("zero", "constant_mass", "tanh_switch"):
            raise DomainError(f"unknown potential shape {self.shape!r}")
        if self.shape != "zero" and not self.m > 0:
            raise DomainError("mass must be positive")
        if self.shape == "tanh_switch" and not self.width > 0:
            raise DomainError("switch width must be positive")

    @property
    def is_zero(self):
        return self.shape == "zero"

    def scalar_profile(self, x):
        """V(x) = profile(x) * gamma; returns the scalar profile."""
        x = np.asarray(x, dtype=float)
        if self.shape == "zero":
            return np.zeros_like(x)
        if self.shape == "constant_mass":
            return np.full_like(x, self.m)
        return 0.5 * self.m * (1.0 + np.tanh((x - self.center) / self.width))

    def __call__(self, x):
        """Matrix samples with shape x.shape + (2, 2)."""
        prof = self.scalar_profile(x)
        return prof[..., None, None] * self.gamma

    def shifted(self, a):
        """Potential x -> V(x - a); only meaningful for tanh_switch."""
        if self.shape != "tanh_switch":
            return self
        return replace(self, center=self.center + a)


ZERO_POTENTIAL = DiracPotential(m=1.0, shape="zero")
