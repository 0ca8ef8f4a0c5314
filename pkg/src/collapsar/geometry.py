"""Collapsing-star boundary: profile z(t), reflection coefficient, inverses.

The boundary curve x = z(t) is stationary (z = 0) for t <= 0 and approaches
the null line x = -t at exponential rate 2*kappa for t -> +infinity, so that
t + z(t) increases to a finite limit ``x_star``.  Everything downstream
(reflection times, reflected packets, the conjugated late-time propagators)
is driven by the two strictly monotone maps

    ztilde : t -> t + z(t)      (inverse: ``tau``, the reflection time)
    w      : t -> t - z(t)      (inverse: ``inverse_advance``)

The default analytic profile is

    zdot(t) = -(1 - exp(-2 kappa t))^2,  t >= 0,

which integrates in closed form, is C^2 across t = 0, satisfies
-1 <= zdot <= 0 and gives x_star = 3/(4 kappa).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError

TABLE_HEADER = "# star-boundary v1"

_BISECT_ITERS = 90
_NEWTON_ITERS = 4


def _as_array(t):
    a = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DomainError("non-finite time passed to boundary evaluation")
    return a


@dataclass(frozen=True)
class StarBoundary:
    """Immutable collapse profile.

    Attributes
    ----------
    kappa : float
        Surface gravity; sets the approach rate 2*kappa of t + z(t) to x_star
        and the inverse temperature beta = 2*pi/kappa of the thermal targets.
    profile : str
        "analytic_default" or "user_tabulated".
    x_star : float
        Finite limit of t + z(t).
    """

    kappa: float
    profile: str = "analytic_default"
    x_star: float = field(init=False)
    _spline: object = field(default=None, repr=False, compare=False)
    _t_table_max: float = field(default=np.inf, repr=False, compare=False)

    def __post_init__(self):
        if not (self.kappa > 0 and np.isfinite(self.kappa)):
            raise DomainError("kappa must be a positive finite real")
        if self.profile == "analytic_default":
            object.__setattr__(self, "x_star", 3.0 / (4.0 * self.kappa))
        elif self.profile == "user_tabulated":
            tmax = self._t_table_max
            object.__setattr__(self, "x_star", tmax + float(self._spline(tmax)))
        else:
            raise DomainError(f"unknown profile {self.profile!r}")

    # -- profile ------------------------------------------------------------

    def z(self, t):
        t = _as_array(t)
        if self.profile == "analytic_default":
            k = self.kappa
            tp = np.maximum(t, 0.0)
            e2 = np.exp(-2.0 * k * tp)
            e4 = e2 * e2
            out = -tp + (1.0 - e2) / k - (1.0 - e4) / (4.0 * k)
            return np.where(t <= 0.0, 0.0, out)
        self._check_table_range(t)
        out = self._spline(np.maximum(t, 0.0))
        return np.where(t <= 0.0, 0.0, out)

    def zdot(self, t):
        t = _as_array(t)
        if self.profile == "analytic_default":
            k = self.kappa
            tp = np.maximum(t, 0.0)
            e2 = np.exp(-2.0 * k * tp)
            out = -((1.0 - e2) ** 2)
            return np.where(t <= 0.0, 0.0, out)
        self._check_table_range(t)
        out = self._spline(np.maximum(t, 0.0), 1)
        return np.where(t <= 0.0, 0.0, out)

    def zddot(self, t):
        t = _as_array(t)
        if self.profile == "analytic_default":
            k = self.kappa
            tp = np.maximum(t, 0.0)
            e2 = np.exp(-2.0 * k * tp)
            out = -4.0 * k * e2 * (1.0 - e2)
            return np.where(t <= 0.0, 0.0, out)
        self._check_table_range(t)
        out = self._spline(np.maximum(t, 0.0), 2)
        return np.where(t <= 0.0, 0.0, out)

    def boundary_eval(self, t):
        """(z, zdot, zddot) at time t."""
        return self.z(t), self.zdot(t), self.zddot(t)

    def _check_table_range(self, t):
        if np.any(np.asarray(t) > self._t_table_max + 1e-12):
            raise DomainError(
                f"tabulated profile only covers t <= {self._t_table_max}"
            )

    # -- derived quantities ---------------------------------------------------

    def lam(self, t):
        """Reflection coefficient sqrt((1 + zdot)/(1 - zdot)) in (0, 1]."""
        zd = self.zdot(t)
        return np.sqrt((1.0 + zd) / (1.0 - zd))

    def ztilde(self, t):
        """t + z(t); strictly increasing, limit x_star."""
        t = _as_array(t)
        if self.profile == "analytic_default":
            # written in terms of decaying exponentials so that large t does
            # not lose x_star to cancellation
            k = self.kappa
            tp = np.maximum(t, 0.0)
            e2 = np.exp(-2.0 * k * tp)
            out = self.x_star - e2 / k + e2 * e2 / (4.0 * k)
            return np.where(t <= 0.0, t, out)
        return np.where(t <= 0.0, t, t + self.z(t))

    def one_plus_zdot(self, t):
        """1 + zdot(t), evaluated without cancellation for the default profile."""
        t = _as_array(t)
        if self.profile == "analytic_default":
            k = self.kappa
            tp = np.maximum(t, 0.0)
            e2 = np.exp(-2.0 * k * tp)
            out = e2 * (2.0 - e2)
            return np.where(t <= 0.0, 1.0, out)
        return 1.0 + self.zdot(t)

    def log_gap(self, t):
        """log(x_star - ztilde(t)), stable to arbitrarily late times."""
        t = _as_array(t)
        if self.profile == "analytic_default":
            k = self.kappa
            tp = np.maximum(t, 0.0)
            # x_star - ztilde = (e^{-2kt}/k)(1 - e^{-2kt}/4)
            out = -2.0 * k * tp - np.log(k) + np.log1p(-np.exp(-2.0 * k * tp) / 4.0)
            neg = np.log(np.maximum(self.x_star - np.minimum(t, 0.0), self.x_star))
            return np.where(t <= 0.0, neg, out)
        gap = self.x_star - self.ztilde(t)
        if np.any(gap <= 0):
            raise DomainError("tabulated profile reached x_star within the table")
        return np.log(gap)

    def one_plus_zdot_over_gap(self, t):
        """(1 + zdot(t)) / (x_star - ztilde(t)); bounded (-> 2 kappa)."""
        t = _as_array(t)
        if self.profile == "analytic_default":
            k = self.kappa
            tp = np.maximum(t, 0.0)
            e2 = np.exp(-2.0 * k * tp)
            out = k * (2.0 - e2) / (1.0 - e2 / 4.0)
            return np.where(t <= 0.0, 1.0 / (self.x_star - t), out)
        return self.one_plus_zdot(t) / (self.x_star - self.ztilde(t))

    def tau(self, y):
        """Inverse of ztilde: the boundary time with t + z(t) = y.

        Defined for y < x_star; equals y for y <= 0.  Bracketing bisection
        refined by Newton; residual |ztilde(tau) - y| <= 1e-10 * scale.
        """
        y_arr = np.asarray(y, dtype=float)
        scalar = y_arr.ndim == 0
        y_arr = np.atleast_1d(y_arr)
        if np.any(y_arr >= self.x_star):
            raise DomainError("reflection time does not exist: y >= x_star")
        out = np.where(y_arr <= 0.0, y_arr, 0.0)
        pos = y_arr > 0.0
        if np.any(pos):
            out[pos] = self._invert_increasing(self.ztilde, y_arr[pos],
                                               self._tau_upper(y_arr[pos]))
        return out[0] if scalar else out

    def _tau_upper(self, y):
        if self.profile == "analytic_default":
            # asymptotic seed: x_star - ztilde(t) ~ exp(-2 kappa t)/kappa
            seed = -np.log(self.kappa * (self.x_star - y)) / (2.0 * self.kappa)
            return np.maximum(seed, 0.0) + 2.0 / self.kappa
        return np.full_like(y, self._t_table_max)

    def inverse_advance(self, w):
        """Inverse of t - z(t) (strictly increasing, slope in [1, 2])."""
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        scalar = np.asarray(w).ndim == 0
        out = np.where(w_arr <= 0.0, w_arr, 0.0)
        pos = w_arr > 0.0
        if np.any(pos):
            out[pos] = self._invert_increasing(
                lambda t: t - self.z(t), w_arr[pos], w_arr[pos])
        return out[0] if scalar else out

    def _invert_increasing(self, fn, targets, hi):
        lo = np.zeros_like(targets)
        hi = np.asarray(hi, dtype=float).copy()
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            high = fn(mid) > targets
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        t = 0.5 * (lo + hi)
        for _ in range(_NEWTON_ITERS):
            # derivative of ztilde is 1 + zdot, of t - z is 1 - zdot; a small
            # forward difference covers both uniformly and stays inside the
            # already-tight bracket
            d = 1e-7
            slope = (fn(t + d) - fn(t)) / d
            step = np.where(slope > 1e-300, (fn(t) - targets) / np.maximum(slope, 1e-300), 0.0)
            t = np.clip(t - step, lo, hi)
        return t

    # -- construction ----------------------------------------------------------

    @staticmethod
    def tabulated(t_samples, z_samples, kappa):
        """Boundary from a uniformly spaced (t, z) table covering t >= 0."""
        t_samples = np.asarray(t_samples, dtype=float)
        z_samples = np.asarray(z_samples, dtype=float)
        if t_samples.ndim != 1 or t_samples.shape != z_samples.shape:
            raise DomainError("tabulated profile needs matching 1-d t and z arrays")
        dt = np.diff(t_samples)
        if len(dt) < 4 or not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
            raise DomainError("tabulated profile requires uniform t spacing")
        if abs(t_samples[0]) > 1e-12:
            raise DomainError("tabulated profile must start at t = 0")
        spline = CubicSpline(t_samples, z_samples, bc_type=((1, 0.0), "not-a-knot"))
        b = StarBoundary(kappa=kappa, profile="user_tabulated",
                         _spline=spline, _t_table_max=float(t_samples[-1]))
        _reject_invalid_table(b, t_samples)
        return b

    @staticmethod
    def from_table_text(path, kappa):
        with open(path) as fh:
            header = fh.readline().strip()
        if header != TABLE_HEADER:
            raise DomainError(f"expected header {TABLE_HEADER!r}, got {header!r}")
        data = np.loadtxt(path, comments="#")
        return StarBoundary.tabulated(data[:, 0], data[:, 1], kappa)


def _reject_invalid_table(b, t_samples):
    zd = b.zdot(t_samples)
    bad = (zd > 1e-9) | (zd < -1.0 - 1e-9)
    if np.any(bad):
        raise DomainError(
            "tabulated profile violates -1 <= zdot <= 0 at t = "
            f"{t_samples[bad][:5].tolist()}"
        )
    zt = b.ztilde(t_samples)
    if np.any(np.diff(zt) < -1e-10):
        raise DomainError("tabulated profile has decreasing t + z(t)")


@dataclass
class BoundaryCheck:
    name: str
    passed: bool
    detail: str = ""
    violating_times: list = field(default_factory=list)


@dataclass
class BoundaryReport:
    checks: list
    fitted_rate: float
    kappa: float

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def summary(self):
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}"
                 for c in self.checks]
        lines.append(f"fitted approach rate: {self.fitted_rate:.6g} "
                     f"(threshold {2 * self.kappa * 0.95:.6g})")
        return "\n".join(lines)


def validate_boundary(b: StarBoundary, t_max: float, n_samples: int = 2001) -> BoundaryReport:
    """Numerically check the boundary invariants on a sample grid.

    Fits the exponential rate of x_star - (t + z(t)) on [t_max/2, t_max];
    the fit must reach at least 2*kappa*(1 - 0.05).
    """
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    t_max = min(t_max, b._t_table_max)
    ts = np.linspace(-t_max / 4.0, t_max, n_samples)
    checks = []

    tneg = ts[ts <= 0]
    zn, zdn, _ = b.boundary_eval(tneg)
    ok = np.allclose(zn, 0.0, atol=1e-12) and np.allclose(zdn, 0.0, atol=1e-12)
    checks.append(BoundaryCheck("stationary past (z = zdot = 0 for t <= 0)", ok))

    tpos = ts[ts >= 0]
    zd = b.zdot(tpos)
    bad = (zd > 1e-9) | (zd < -1 - 1e-9)
    checks.append(BoundaryCheck(
        "velocity bound -1 <= zdot <= 0", not np.any(bad),
        violating_times=tpos[bad][:10].tolist()))

    eps = 1e-6
    jumps = [abs(float(f(eps) - f(-eps))) for f in (b.z, b.zdot, b.zddot)]
    ok = jumps[0] < 1e-8 and jumps[1] < 1e-8 and jumps[2] < 1e-4
    checks.append(BoundaryCheck(
        "C^2 matching at t = 0", ok, detail=f"jumps {jumps}"))

    zt = b.ztilde(ts)
    dec = np.diff(zt) < -1e-10
    checks.append(BoundaryCheck(
        "t + z(t) nondecreasing", not np.any(dec),
        violating_times=ts[:-1][dec][:10].tolist()))

    twin = np.linspace(t_max / 2.0, t_max * 0.95, 200)
    gap = b.x_star - b.ztilde(twin)
    fitted = np.nan
    if np.all(gap > 0):
        slope = np.polyfit(twin, np.log(gap), 1)[0]
        fitted = -slope
    ok = np.isfinite(fitted) and fitted >= 2.0 * b.kappa * 0.95
    checks.append(BoundaryCheck(
        "exponential approach rate >= 1.9 kappa", ok,
        detail=f"fitted {fitted:.4g}"))

    res = np.array([
        abs(float(b.ztilde(b.tau(y)) - y))
        for y in np.linspace(0.0, b.x_star * (1 - 1e-6), 37)
    ])
    checks.append(BoundaryCheck(
        "tau inverts t + z(t) (residual <= 1e-10)", bool(np.max(res) <= 1e-10),
        detail=f"max residual {np.max(res):.3g}"))

    return BoundaryReport(checks=checks, fitted_rate=fitted, kappa=b.kappa)
