"""Scenario drivers: the three Hawking-effect scans and the supporting
diagnostic/verification suites, each with an independently computed target.

Every scan certifies its own quadratures (norm accounting per rung) and
emits rows suitable for CSV plus a summary with named assertions; nothing
asserted here is computed by the pipeline under test.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import car, interacting
from .car import (AlgebraElement, ArrayVector, FockRep, GridVector,
                  MatrixCovariance, quasifree_expectation, random_element)
from .errors import ConfigError, DomainError
from .fields import (DiracPotential, SpinorField, ZERO_POTENTIAL, embed_field,
                     fourier_transform, translate_field)
from .geometry import StarBoundary, validate_boundary
from .interacting import (build_interaction, dyson_propagator, evenness_check,
                          ground_state_analysis, interacting_dynamics_apply,
                          perturbed_vacuum_state, represented_generator,
                          stationary_hamiltonian, unitarity_residual)
from .packets import BumpProfile
from .propagators import (evolve_constant_mass_fourier, evolve_line,
                          gauss_legendre_nodes, propagate_boundary_numeric,
                          propagate_free_boundary_explicit, propagate_free_line,
                          reflected_packet, spectral_packet)
from .spectral import (SpectralForm, discretize_dirac, fermi_factor,
                       field_phi_overlaps, free_line_form, halfline_free_projection,
                       lower_component_fraction, packet_phi_overlaps,
                       packet_positive_form, projection_difference_form,
                       propagation_diagnostics, quadratic_form, simpson_weights,
                       wave_operator_left_line, wave_operator_right,
                       apply_dirac_line)


@dataclass
class Assertion:
    id: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    name: str
    columns: list
    rows: list
    summary: dict
    assertions: list

    @property
    def passed(self):
        return all(a.passed for a in self.assertions)

    def failing_ids(self):
        return [a.id for a in self.assertions if not a.passed]


def _fit_rate(ts, errs):
    """Exponential decay rate from a log-linear fit; nan when degenerate."""
    ts = np.asarray(ts, float)
    errs = np.asarray(errs, float)
    good = errs > 0
    if np.sum(good) < 2:
        return float("nan")
    return float(-np.polyfit(ts[good], np.log(errs[good]), 1)[0])


# -- Hawking effect I: left movers -> thermal state ---------------------------------


@dataclass
class HawkingConfig:
    kappa: float = 1.0
    sigma: float = 0.5
    carrier: float = 1.0
    delta: float = 0.5
    n_sigma: float = 6.0
    t_ladder: tuple = (2.0, 4.0, 6.0, 8.0)
    rel_tol: float = 0.02
    norm_tol: float = 1e-6
    potential: str = "zero"       # "zero" or "tanh_switch"
    mass: float = 1.0
    switch_width: float = 1.0
    n_mu: int = 24001
    op_cells: int = 768            # half-line operator resolution (V != 0)
    e_cut: float = 4.0             # spectral cutoff for the projection-difference
    seed: int = 0

    def boundary(self):
        return StarBoundary(kappa=self.kappa)

    def profile(self):
        b = self.boundary()
        center = b.x_star + self.delta + self.n_sigma * self.sigma
        return BumpProfile(center=center, sigma=self.sigma,
                           carrier=self.carrier, n_sigma=self.n_sigma)

    def potential_obj(self):
        if self.potential == "zero":
            return ZERO_POTENTIAL
        return DiracPotential(m=self.mass, shape=self.potential,
                              width=self.switch_width)


def _packet_resolution(cfg, t):
    mu_halfwidth = (abs(cfg.carrier) / cfg.kappa + 14.0 / (cfg.kappa * cfg.sigma)
                    + 4.0)
    n_u = int(2.0 * cfg.kappa * (t + 8.0 * cfg.sigma + 4.0) * mu_halfwidth / 0.25)
    return mu_halfwidth, max(n_u, 1600)


def _left_packet(cfg, t, n_u=None):
    prof = cfg.profile()
    b = cfg.boundary()
    mu_hw, n_u_auto = _packet_resolution(cfg, t)
    return reflected_packet(prof, b, t, support=prof.support,
                            norm_sq=prof.norm_sq(), allow_partial=True,
                            n_u=n_u or n_u_auto), mu_hw


def hawking1_left_scan(cfg: HawkingConfig) -> ExperimentReport:
    """q(t) = <u^0(0,t) f^t, 1_{R+}(b_0) u^0(0,t) f^t> (+ measured potential
    correction) against the Fermi-Dirac target at beta = 2 pi / kappa."""
    b = cfg.boundary()
    beta = 2.0 * np.pi / cfg.kappa
    prof = cfg.profile()
    nsq = prof.norm_sq()
    V = cfg.potential_obj()

    # independent oracle: Fourier multiplier on the full line
    f_field = prof.to_field(h=cfg.sigma / 128.0)
    target = free_line_form(SpectralForm("thermal", beta=beta), f_field)

    ops = None
    if not V.is_zero:
        x_op = prof.hi + 2.0
        ops = (discretize_dirac("halfline", V, cfg.op_cells, x_op),
               discretize_dirac("halfline", ZERO_POTENTIAL, cfg.op_cells, x_op))

    rows = []
    errs = []
    asserts = []
    corr_values = []
    for t in cfg.t_ladder:
        pk, mu_hw = _left_packet(cfg, t)
        res = packet_positive_form(pk, -cfg.carrier / cfg.kappa, mu_hw,
                                   n_mu=cfg.n_mu,
                                   k_max=abs(cfg.carrier) + 14.0 / cfg.sigma,
                                   n_k=4001)
        acct = abs(np.sqrt(res.total) - np.sqrt(nsq))
        ok_norm = acct <= cfg.norm_tol
        asserts.append(Assertion(f"norm-accounting-t{t:g}", ok_norm,
                                 f"|norm - |f|| = {acct:.3g}"))
        corr = 0.0
        if ops is not None:
            corr = projection_difference_form(ops[0], ops[1], pk, cfg.e_cut)
            corr_values.append(abs(corr))
        q = res.positive + corr
        err = abs(q - target)
        rows.append((t, q, target, err, acct + res.k_tail_estimate))
        errs.append(err / target)

    decreasing = all(a > bb for a, bb in zip(errs, errs[1:]))
    asserts.append(Assertion("errors-strictly-decreasing", decreasing,
                             f"relative errors {errs}"))
    asserts.append(Assertion("final-relative-error", errs[-1] <= cfg.rel_tol,
                             f"{errs[-1]:.3g} <= {cfg.rel_tol}"))
    if corr_values:
        dec_corr = all(a >= bb for a, bb in zip(corr_values, corr_values[1:]))
        asserts.append(Assertion("potential-correction-decreasing", dec_corr,
                                 f"|<psi,K psi>| ladder {corr_values}"))

    cross = _factorization_check(cfg)
    asserts.append(Assertion("split-factorization", cross <= 1e-3,
                             f"relative cross/factorization defect {cross:.3g}"))

    return ExperimentReport(
        name="hawking1-left",
        columns=["t", "observed", "target", "error", "truncation"],
        rows=rows,
        summary={"target": target, "target_provenance": "fourier-multiplier-oracle",
                 "beta": beta, "fitted_rate": _fit_rate(cfg.t_ladder, errs),
                 "relative_errors": errs,
                 "factorization_defect": cross},
        assertions=asserts)


def _factorization_check(cfg: HawkingConfig) -> float:
    """Covariance-level assembly of the limit state: for A1 in the upper
    (reflected) sector and A2 in the lower (static) sector, the vacuum
    expectation of gamma^t(A1) A2 factorizes as the product of the thermal
    and vacuum values; the defect is driven by the cross two-point function
    <f2, Pi_+ u(0,t) f1^t> which decays by weak convergence."""
    t = cfg.t_ladder[-1]
    pk, mu_hw = _left_packet(cfg, t)
    res = packet_positive_form(pk, -cfg.carrier / cfg.kappa, mu_hw,
                               n_mu=cfg.n_mu,
                               k_max=abs(cfg.carrier) + 14.0 / cfg.sigma,
                               n_k=4001)
    # static right-mover test vector (lower component, compact)
    g2 = BumpProfile(center=cfg.profile().center, sigma=cfg.sigma,
                     carrier=-0.7, n_sigma=cfg.n_sigma)
    h2 = cfg.sigma / 128.0
    f2 = g2.to_field(h=h2, component=1)
    k_max = abs(cfg.carrier) + 16.0 / cfg.sigma
    ks = np.linspace(-k_max, k_max, 4001)
    T2 = field_phi_overlaps(f2, ks)
    T1 = packet_phi_overlaps(pk, ks)
    w = simpson_weights(len(ks), ks[1] - ks[0])
    cross = complex(np.sum(w * (ks > 0) * np.conj(T2) * T1))
    q11 = res.positive
    q22, _ = halfline_free_projection(f2, k_max=k_max)
    # 4-point factorization defect for A = psi*(F1)psi(F1) psi*(F2)psi(F2):
    # wick det mixes only through the cross pairings
    denom = max(abs(q11 * q22), 1e-30)
    return abs(cross) ** 2 / denom


# -- Hawking effect I: right movers -> vacuum via the wave operator ------------------


@dataclass
class HawkingRightConfig:
    kappa: float = 1.0
    sigma: float = 0.4
    carrier: float = 2.0
    delta: float = 0.6
    n_sigma: float = 6.0
    t_ladder: tuple = (4.0, 8.0, 12.0, 16.0, 20.0)
    h: float = 2.0 ** -8
    mass: float = 1.0
    switch_width: float = 1.0
    potential: str = "tanh_switch"
    op_cells: int = 1024
    tol_scale: float = 5e-3
    seed: int = 0

    def boundary(self):
        return StarBoundary(kappa=self.kappa)

    def potential_obj(self):
        if self.potential == "zero":
            return ZERO_POTENTIAL
        return DiracPotential(m=self.mass, shape=self.potential,
                              width=self.switch_width)


def hawking1_right_scan(cfg: HawkingRightConfig) -> ExperimentReport:
    b = cfg.boundary()
    V = cfg.potential_obj()
    prof = BumpProfile(center=b.x_star + cfg.delta + cfg.n_sigma * cfg.sigma,
                       sigma=cfg.sigma, carrier=cfg.carrier,
                       n_sigma=cfg.n_sigma)
    f = prof.to_field(h=cfg.h, component=1)
    nsq = f.norm_sq()
    x_op = prof.hi + 3.0
    op = discretize_dirac("halfline", V, cfg.op_cells, x_op)
    form = SpectralForm("positive")

    wave = wave_operator_right(f, V, b, cfg.t_ladder, tol=1e-6)
    target = quadratic_form(form, op, wave.limit)

    rows = []
    asserts = []
    qs = []
    for t in cfg.t_ladder:
        ft = replace(translate_field(f, t), time_tag=t)
        ft = embed_field(ft, float(b.z(t)) - 1.0, prof.hi + 1.0)
        psi = propagate_boundary_numeric(ft, b, V, 0.0)
        nerr = abs(psi.norm() - np.sqrt(nsq))
        q = quadratic_form(form, op, psi)
        qs.append(q)
        rows.append((t, q, target, abs(q - target), nerr))
        asserts.append(Assertion(f"unitarity-t{t:g}", nerr <= 5e-4 * np.sqrt(nsq),
                                 f"norm defect {nerr:.3g}"))

    final_err = abs(qs[-1] - target)
    asserts.append(Assertion("wave-rungs-decay", wave.converged,
                             f"rung table {wave.table}"))
    asserts.append(Assertion("final-error", final_err <= cfg.tol_scale * nsq,
                             f"{final_err:.3g} <= {cfg.tol_scale * nsq:.3g}"))
    return ExperimentReport(
        name="hawking1-right",
        columns=["t", "observed", "target", "error", "truncation"],
        rows=rows,
        summary={"target": target,
                 "target_provenance": "wave-operator-limit (rung-certified)",
                 "wave_table": wave.table},
        assertions=asserts)


# -- temperature fit ------------------------------------------------------------------


@dataclass
class TemperatureFitConfig:
    kappa: float = 1.0
    carriers: tuple = (0.08, 0.16, 0.24, 0.35, 0.5)   # in units of kappa
    sigma_scale: float = 12.0                          # sigma = scale / kappa
    delta_scale: float = 0.5
    rel_tol: float = 0.05
    n_mu: int = 8001
    seed: int = 0


def _occupation(kappa, omega, sigma, delta, n_sigma=6.0, n_mu=8001):
    b = StarBoundary(kappa=kappa)
    prof = BumpProfile(center=b.x_star + delta + n_sigma * sigma, sigma=sigma,
                       carrier=omega, n_sigma=n_sigma)
    nsq = prof.norm_sq()
    t_big = (prof.hi - b.x_star) / 2.0 + 3.0 / kappa
    mu_max = abs(omega) / kappa + 6.0 / (kappa * sigma) + 2.0
    n_u = int(2 * kappa * (t_big + 2.0) * mu_max / 0.3) + 800
    pk = reflected_packet(prof, b, t_big, support=prof.support, norm_sq=nsq,
                          n_u=n_u)
    res = packet_positive_form(pk, -omega / kappa, mu_max, n_mu=n_mu)
    if abs(res.total - nsq) / nsq > 1e-6:
        raise DomainError(f"occupation norm accounting failed ({res.total} vs {nsq})")
    return res.positive / nsq


def temperature_fit(cfg: TemperatureFitConfig) -> ExperimentReport:
    """Fit the Fermi-Dirac occupation curve c(omega) = (1+e^{-beta omega})^{-1}
    over the carrier ladder; the sign follows the Fourier convention (a
    carrier omega packet concentrates at xi = -omega, i.e. energy +omega)."""
    from scipy.optimize import minimize_scalar
    beta_true = 2.0 * np.pi / cfg.kappa
    sigma = cfg.sigma_scale / cfg.kappa
    delta = cfg.delta_scale / cfg.kappa
    omegas = np.array([c * cfg.kappa for c in cfg.carriers])
    obs = np.array([_occupation(cfg.kappa, om, sigma, delta, n_mu=cfg.n_mu)
                    for om in omegas])

    def model(bh):
        return 1.0 / (1.0 + np.exp(-bh * omegas))

    r = minimize_scalar(lambda bh: float(np.sum((obs - model(bh)) ** 2)),
                        bounds=(0.2 * beta_true, 5.0 * beta_true),
                        method="bounded")
    beta_hat = float(r.x)
    resid = float(np.sqrt(np.sum((obs - model(beta_hat)) ** 2)))
    rel = abs(beta_hat - beta_true) / beta_true
    rows = [(om, o, float(m)) for om, o, m in zip(omegas, obs, model(beta_hat))]
    asserts = [
        Assertion("beta-hat-within-tolerance", rel <= cfg.rel_tol,
                  f"beta_hat {beta_hat:.5g} vs 2 pi/kappa {beta_true:.5g} "
                  f"({100 * rel:.2f}%)"),
        Assertion("fit-residual", resid <= 0.02, f"residual {resid:.3g}"),
    ]
    return ExperimentReport(
        name="temperature-fit",
        columns=["carrier", "occupation", "fit"],
        rows=rows,
        summary={"beta_hat": beta_hat, "beta_true": beta_true,
                 "relative_error": rel, "residual": resid,
                 "target_provenance": "fermi-dirac least squares over carriers"},
        assertions=asserts)


# -- interaction overlap scan ----------------------------------------------------------


@dataclass
class OverlapScanConfig:
    kappa: float = 1.0
    sigma: float = 0.4
    carrier: float = 1.0
    delta: float = 0.5
    n_sigma: float = 6.0
    g_center: float = 6.0
    g_sigma: float = 0.5
    mass: float = 1.0
    switch_width: float = 1.0
    h: float = 2.0 ** -8
    t_ladder: tuple = (6.0, 9.0, 12.0, 15.0)
    sigma_grid: tuple = (0.0, 2.0, 4.0, 6.0, 8.0)
    seed: int = 0


def interaction_overlap_scan(cfg: OverlapScanConfig) -> ExperimentReport:
    """|(g x e_i | u^V(sigma, t) f^t)| over (sigma, t): exact on-grid zero
    once the propagated support [z(sigma), R - sigma] clears supp g, and
    decay in t at fixed sigma (weak convergence)."""
    b = StarBoundary(kappa=cfg.kappa)
    V = DiracPotential(m=cfg.mass, shape="tanh_switch", width=cfg.switch_width)
    prof = BumpProfile(center=b.x_star + cfg.delta + cfg.n_sigma * cfg.sigma,
                       sigma=cfg.sigma, carrier=cfg.carrier, n_sigma=cfg.n_sigma)
    gprof = BumpProfile(center=cfg.g_center, sigma=cfg.g_sigma, n_sigma=4.0)
    M = np.array([[1.0, 0.25], [0.25, -0.6]])
    _, es = np.linalg.eigh(M)
    R_sup = prof.hi
    clear_sigma = R_sup - gprof.lo   # beyond this, supports are disjoint

    rows = []
    asserts = []
    zero_checked = False
    col_t_tables = {}
    for t in cfg.t_ladder:
        f = prof.to_field(h=cfg.h, component=0)
        ft = replace(translate_field(f, t), time_tag=t)
        ft = embed_field(ft, float(b.z(t)) - 1.0, max(prof.hi, gprof.hi) + 1.0)
        gv = [None, None]
        psi = ft
        prev_sigma = t
        for sig in sorted([s for s in cfg.sigma_grid if s <= t], reverse=True):
            psi = propagate_boundary_numeric(psi, b, V, sig)
            if gv[0] is None:
                gfield = gprof.to_field(h=cfg.h)
                gfield = embed_field(gfield, psi.x_min, psi.x_max)
                gv = [gfield.values[:, 0].copy(), None]
            ge = embed_field(gprof.to_field(h=cfg.h), psi.x_min, psi.x_max)
            for i in range(2):
                spin = es[:, i]
                ov = psi.h * np.sum(
                    np.conj(ge.values[:, 0] * spin[0]) * psi.values[:, 0]
                    + np.conj(ge.values[:, 0] * spin[1]) * psi.values[:, 1])
                rows.append((t, sig, i, abs(ov)))
                col_t_tables.setdefault((sig, i), []).append((t, abs(ov)))
                if sig >= clear_sigma:
                    zero_checked = True
                    asserts.append(Assertion(
                        f"exact-zero-sigma{sig:g}-t{t:g}-i{i}",
                        abs(ov) <= 1e-12,
                        f"|overlap| = {abs(ov):.3g} with supports cleared"))
    for (sig, i), tab in sorted(col_t_tables.items()):
        if sig == 0.0 and len(tab) >= 2:
            vals = [v for _, v in sorted(tab)]
            asserts.append(Assertion(
                f"decay-in-t-sigma0-i{i}",
                all(a >= bb for a, bb in zip(vals, vals[1:])),
                f"{vals}"))
    if not zero_checked:
        asserts.append(Assertion("clearing-sigma-reached", False,
                                 f"no sigma >= {clear_sigma:g} in the grid"))
    return ExperimentReport(
        name="overlap-scan",
        columns=["t", "sigma", "spinor_index", "overlap"],
        rows=rows,
        summary={"clear_sigma": clear_sigma},
        assertions=asserts)


# -- Hawking effect III ------------------------------------------------------------------


@dataclass
class Hawking3Config:
    kappa: float = 1.0
    mass: float = 1.0
    switch_width: float = 0.6
    T_ladder: tuple = (3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
    window: tuple = (-1.0, 0.0)
    h: float = 2.0 ** -9
    f_sigma: float = 0.2
    f_delta: float = 0.25
    f_n_sigma: float = 4.0
    g_sigma: float = 0.45
    g_delta: float = 2.6
    g_coupling_M: tuple = ((1.0, 0.3), (0.3, -0.7))
    g_power: int = 2
    n_shape_modes: int = 9
    loss_budget: float = 1e-3
    rk4_step: float = 2e-2
    rate_floor_scale: float = 1.8   # fitted rate >= this * kappa
    seed: int = 0


def _gamma_shift(f: SpinorField, a) -> SpinorField:
    """gamma^a f(x) = f(x + a) on both components; exact grid shift."""
    k = a / f.h
    if abs(k - round(k)) > 1e-9:
        raise DomainError("shift must be grid-commensurate")
    k = int(round(k))
    v = np.zeros_like(f.values)
    if k == 0:
        v[:] = f.values
    elif k > 0:
        v[:-k] = f.values[k:]
    else:
        v[-k:] = f.values[:k]
    return f.with_values(v)


def _hat_free_exact(f: SpinorField, s, t) -> SpinorField:
    """u-hat^0_inf(s, t) f = (gamma^{2(t-s)} f_0, f_1): exact grid shift."""
    shifted = _gamma_shift(f, 2.0 * (t - s))
    v = f.values.copy()
    v[:, 0] = shifted.values[:, 0]
    return f.with_values(v, time_tag=s)


def hawking3_effective_scan(cfg: Hawking3Config) -> ExperimentReport:
    b = StarBoundary(kappa=cfg.kappa)
    s, t = cfg.window
    V = DiracPotential(m=cfg.mass, shape="tanh_switch", width=cfg.switch_width)
    # classical part: conjugated boundary propagators vs the limiting one.
    # data reflects off the star during [T+s, T+t]; the comparison is taken
    # on x > x_star, the image of the paper's normalized half line (the
    # squeezed reflected sliver below x_star is the horizon shadow).
    c0 = b.x_star + cfg.f_delta + cfg.f_n_sigma * cfg.f_sigma
    p0 = BumpProfile(center=c0, sigma=cfg.f_sigma, carrier=1.3,
                     n_sigma=cfg.f_n_sigma)
    p1 = BumpProfile(center=c0 + 0.4, sigma=cfg.f_sigma, carrier=-0.9,
                     n_sigma=cfg.f_n_sigma)
    f = p0.to_field(h=cfg.h, component=0, time_tag=t)
    f = embed_field(f, 0.0, p1.hi + 2.0 * (t - s) + 0.5)
    f.values[:, 1] = p1(f.x)
    nf = f.norm()
    limit = _hat_free_exact(f, s, t)
    mask = f.x > b.x_star

    rows = []
    errsT = []
    for T in cfg.T_ladder:
        data = replace(translate_field(f, T + t), time_tag=T + t)
        data = embed_field(data, float(b.z(T + t)) - 1.5,
                           f.x_max - (T + t) + 1.0)
        moved = propagate_boundary_numeric(data, b, V, T + s)
        back = replace(translate_field(moved, -(T + s)), time_tag=s)
        vals = _resample_onto(back, f)
        err = float(np.sqrt(f.h * np.sum(
            np.abs(vals[mask] - limit.values[mask]) ** 2)))
        errsT.append(err)
        rows.append((T, err))
    rate = _fit_rate(cfg.T_ladder, errsT)
    asserts = [
        Assertion("classical-errors-decreasing",
                  all(a > bb for a, bb in zip(errsT, errsT[1:])),
                  f"{errsT}"),
        Assertion("classical-rate",
                  rate >= cfg.rate_floor_scale * cfg.kappa,
                  f"fitted rate {rate:.3g} >= {cfg.rate_floor_scale * cfg.kappa}"),
    ]

    quantum = _hawking3_quantum(cfg, b, s, t)
    asserts.extend(quantum["assertions"])
    return ExperimentReport(
        name="hawking3",
        columns=["T", "classical_error"],
        rows=rows,
        summary={"fitted_rate": rate, "norm": nf,
                 "target_provenance": "closed-form limiting propagator",
                 **{k: v for k, v in quantum.items() if k != "assertions"}},
        assertions=asserts)


def _resample_onto(src: SpinorField, ref: SpinorField):
    """Copy src values onto ref's grid (grids must be h-commensurate)."""
    off = (ref.x_min - src.x_min) / src.h
    if abs(off - round(off)) > 1e-6:
        raise DomainError("incommensurate grids")
    off = int(round(off))
    out = np.zeros_like(ref.values)
    n = min(ref.n, src.n - off) if off >= 0 else None
    if off >= 0:
        take = src.values[off:off + ref.n]
        out[:take.shape[0]] = take
    else:
        out[-off:] = src.values[:ref.n + off]
    return out


def _hawking3_quantum(cfg, b, s, t):
    """Effective interacting dynamics on a shape-mode basis, evaluated in
    the free limiting Hawking state (thermal upper sector (x) vacuum lower
    sector), including the I = 0 reduction check."""
    beta = 2.0 * np.pi / cfg.kappa
    gc = b.x_star + cfg.g_delta + 6.0 * cfg.g_sigma
    g = BumpProfile(center=gc, sigma=cfg.g_sigma, n_sigma=6.0)
    span = 2.0 * (t - s)
    # grid commensurate with the window shift so W_{t-s} is an exact re-index
    n_per = int(round(span / (cfg.g_sigma / 48.0)))
    h3 = span / n_per
    x_max = g.hi + span + 1.0
    n_pts = int(round(x_max / h3)) + 1
    grid_x = h3 * np.arange(n_pts)

    # shape modes: SVD of the translate family (covering the catalog's
    # extra shifts as well as the dynamical window)
    a_extra = 1.2
    shifts = np.linspace(0.0, span + a_extra, 61)
    fam = np.stack([g(grid_x + a) for a in shifts], axis=1)
    un, sv, _ = np.linalg.svd(fam, full_matrices=False)
    k0 = cfg.n_shape_modes - 1
    modes0 = un[:, :k0] / np.sqrt(h3)

    gl2 = np.sqrt(float(h3 * np.sum(np.abs(g(grid_x)) ** 2)))
    lower_col = g(grid_x) / gl2
    basis = []
    for j in range(k0):
        v = np.zeros((n_pts, 2), complex)
        v[:, 0] = modes0[:, j]
        basis.append(GridVector(v, h3))
    vlow = np.zeros((n_pts, 2), complex)
    vlow[:, 1] = lower_col
    basis.append(GridVector(vlow, h3))
    rep = FockRep(basis)

    # covariance of the free limiting state on the mode basis
    cmat = np.zeros((rep.n_modes, rep.n_modes), complex)
    xi, fh = fourier_transform(np.ascontiguousarray(modes0), 0.0, h3,
                               dxi_max=2e-3)
    dxi = xi[1] - xi[0]
    wtherm = fermi_factor(-xi, beta)   # (1 + e^{beta xi})^{-1}
    for j in range(k0):
        for k in range(j, k0):
            val = complex(dxi * np.sum(np.conj(fh[:, j]) * wtherm * fh[:, k]))
            cmat[j, k] = val
            cmat[k, j] = np.conj(val)
    # lower sector: vacuum positive projection of the half line (V = 0 core;
    # the right-mover wave morphism is the identity on this support)
    fld = SpinorField(x_min=0.0, h=h3, values=vlow)
    qpos, _ = halfline_free_projection(fld, k_max=18.0 / cfg.g_sigma)
    cmat[-1, -1] = qpos
    cov = MatrixCovariance(cmat, tol=1e-8)
    rho = rep.density_matrix(cov)

    M = np.array(cfg.g_coupling_M, dtype=complex)
    lams, es = np.linalg.eigh(M)
    worst_loss = 0.0

    def field_matrix(vec):
        nonlocal worst_loss
        m, loss = rep.field(vec)
        worst_loss = max(worst_loss, loss / max(vec.norm() ** 2, 1e-30))
        return m

    def H(sigma):
        a_shift = 2.0 * (sigma - s)
        base = np.zeros((rep.dim, rep.dim), complex)
        for lam, i in zip(lams, range(2)):
            col = es[:, i]
            v = np.zeros((n_pts, 2), complex)
            v[:, 0] = col[0] * g(grid_x + a_shift)
            v[:, 1] = col[1] * g(grid_x)
            fm = field_matrix(GridVector(v, h3))
            base += float(lam) * (fm.conj().T @ fm)
        return np.linalg.matrix_power(base, cfg.g_power)

    R = dyson_propagator(H, s, t, rk4_step=cfg.rk4_step).matrix

    def fam_vec(shift0, c0_, c1_):
        v = np.zeros((n_pts, 2), complex)
        v[:, 0] = c0_ * g(grid_x + shift0)
        v[:, 1] = c1_ * g(grid_x)
        return GridVector(v, h3)

    va = fam_vec(0.4, 0.8, 0.6)
    vb = fam_vec(1.1, 0.5j, 0.5)
    catalog = {
        "identity": AlgebraElement.unit(),
        "number-a": AlgebraElement.psi_star(va) * AlgebraElement.psi(va),
        "pair-ab": AlgebraElement.psi_star(va) * AlgebraElement.psi(vb),
        "quartic": (AlgebraElement.psi_star(va) * AlgebraElement.psi_star(vb)
                    * AlgebraElement.psi(vb) * AlgebraElement.psi(va)),
    }

    def w_map(v):
        vals = v.values.copy()
        col = np.zeros_like(vals[:, 0])
        k = int(round(span / h3))
        col[:-k] = vals[k:, 0]
        vals[:, 0] = col
        return GridVector(vals, h3)

    # exact pair function of the limiting free state (no mode truncation):
    # thermal multiplier on the upper components, half-line vacuum
    # projection on the lower ones
    ft_cache = {}

    def _upper_hat(vec):
        key = id(vec)
        if key not in ft_cache:
            xi_v, fh_v = fourier_transform(
                np.ascontiguousarray(vec.values[:, :1]), 0.0, h3, dxi_max=2e-3)
            ft_cache[key] = (xi_v, fh_v[:, 0], vec)
        return ft_cache[key]

    ks_pair = np.linspace(0.0, 18.0 / cfg.g_sigma, 4001)
    wk_pair = simpson_weights(len(ks_pair), ks_pair[1] - ks_pair[0])

    def pair_exact(fv, gv):
        xi_f, fh_f, _ = _upper_hat(fv)
        _, fh_g, _ = _upper_hat(gv)
        dxi_p = xi_f[1] - xi_f[0]
        up = complex(dxi_p * np.sum(np.conj(fh_g) * fermi_factor(-xi_f, beta)
                                    * fh_f))
        lf = SpinorField(x_min=0.0, h=h3,
                         values=np.stack([np.zeros(n_pts, complex),
                                          fv.values[:, 1]], axis=1))
        lg = SpinorField(x_min=0.0, h=h3,
                         values=np.stack([np.zeros(n_pts, complex),
                                          gv.values[:, 1]], axis=1))
        Tf = field_phi_overlaps(lf, ks_pair)
        Tg = field_phi_overlaps(lg, ks_pair)
        low = complex(np.sum(wk_pair * np.conj(Tg) * Tf))
        return up + low

    exact_cov = car.CallableCovariance(pair_exact)

    values = {}
    red_defect = 0.0
    rep_defect = 0.0
    for name, A in catalog.items():
        Am, loss = rep.represent(A.map_vectors(w_map))
        worst_loss = max(worst_loss, loss)
        val = complex(np.trace(rho @ (R @ Am @ R.conj().T)))
        values[name] = val
        A0, _ = rep.represent(A)
        # I = 0 reduction at the exact (untruncated) covariance level
        lhs = quasifree_expectation(exact_cov, A.map_vectors(w_map))
        rhs = quasifree_expectation(exact_cov, A)
        red_defect = max(red_defect, abs(lhs - rhs))
        rep_defect = max(rep_defect,
                         abs(complex(np.trace(rho @ Am))
                             - complex(np.trace(rho @ A0))))

    asserts = [
        Assertion("free-reduction",
                  red_defect <= 1e-9,
                  f"I=0 value vs state invariance defect {red_defect:.3g} "
                  f"(truncated-rep defect {rep_defect:.3g})"),
        Assertion("mode-truncation-loss", worst_loss <= cfg.loss_budget,
                  f"max projection loss {worst_loss:.3g} <= {cfg.loss_budget}"),
        Assertion("R-unitary", unitarity_residual(R) <= 1e-8,
                  f"{unitarity_residual(R):.3g}"),
        Assertion("R-even", evenness_check(R, rep) <= 1e-9,
                  f"{evenness_check(R, rep):.3g}"),
    ]
    return {"assertions": asserts,
            "effective_values": {k: [v.real, v.imag] for k, v in values.items()},
            "projection_loss": worst_loss,
            "shape_singular_values": sv[:cfg.n_shape_modes].tolist()}


# -- Hawking effect II diagnostics -----------------------------------------------------


@dataclass
class Hawking2Config:
    kappa: float = 1.0
    mass: float = 1.0
    switch_width: float = 1.0
    h: float = 2.0 ** -8
    t_ladder: tuple = (10.0, 16.0, 22.0, 28.0)
    beta_large: float = 200.0
    line_cells: int = 1024
    line_half: float = 12.0
    seed: int = 0


def hawking2_diagnostics(cfg: Hawking2Config) -> ExperimentReport:
    b = StarBoundary(kappa=cfg.kappa)
    V = DiracPotential(m=cfg.mass, shape="tanh_switch", width=cfg.switch_width)
    beta = 2.0 * np.pi / cfg.kappa
    asserts = []
    rows = []

    # (a) thermal covariance on the line operator; beta -> inf vacuum limit
    op = discretize_dirac("line", V, cfg.line_cells, cfg.line_half)
    pkt = spectral_packet(-cfg.line_half, cfg.line_half, 2 * cfg.line_half / cfg.line_cells,
                          cfg.mass, carrier=-3.0, sigma_xi=0.8, branch=+1,
                          center=4.0)
    q_beta = quadratic_form(SpectralForm("thermal", beta=cfg.beta_large), op, pkt)
    q_pos = quadratic_form(SpectralForm("positive"), op, pkt)
    asserts.append(Assertion("thermal-to-vacuum-limit",
                             abs(q_beta - q_pos) <= 1e-6,
                             f"|thermal(beta={cfg.beta_large}) - vacuum| = "
                             f"{abs(q_beta - q_pos):.3g}"))
    q_th = quadratic_form(SpectralForm("thermal", beta=beta), op, pkt)
    rows.append(("thermal-covariance", q_th, q_pos))

    # (b) wave operator e^{i t b_0} e^{-i t b_inf} on a right mover, with the
    # covariance identity (f, Pi+(b_inf) f) = (w f, Pi+(b_0) w f)
    h2 = cfg.h
    f_r = spectral_packet(-6.0, 30.0, h2, cfg.mass, carrier=-2.5, sigma_xi=0.7,
                          branch=-1, center=6.0)
    frac_moving = _velocity_of(f_r, V, 6.0)
    psi = f_r
    rung_rows = []
    prev = None
    t_prev = 0.0
    for tt in cfg.t_ladder:
        psi = evolve_line(psi, V, -(tt - t_prev), warn_leak=False)
        fwd = _halfline_forward(psi, b, V, tt - t_prev)
        rung = (float(np.sqrt(psi.h * np.sum(np.abs(fwd.values - (prev if prev is not None else f_r).values) ** 2)))
                if True else 0.0)
        rung_rows.append((tt, rung))
        prev = psi.values.copy()
        prev = None
        t_prev = tt
        prev = psi
    # recompute rung table properly: local increments
    rung_rows, w_image = _halfline_wave_table(f_r, b, V, cfg.t_ladder)
    rungs = [r for _, r in rung_rows]
    asserts.append(Assertion("halfline-wave-rungs-decreasing",
                             all(a >= bb for a, bb in zip(rungs, rungs[1:])),
                             f"{rungs}"))
    x_op = 34.0
    opV0 = discretize_dirac("halfline", V, 1400, x_op)
    q_img = quadratic_form(SpectralForm("positive"), opV0, w_image)
    q_src = quadratic_form(SpectralForm("positive"), op, f_r)
    rows.append(("vacuum-covariance-transport", q_img, q_src))
    asserts.append(Assertion("covariance-intertwining",
                             abs(q_img - q_src) <= 5e-3,
                             f"|{q_img:.6f} - {q_src:.6f}|"))

    # (c) conditional-expectation loss E_t -> 1
    a_field = BumpProfile(center=-3.0, sigma=0.8, n_sigma=5.0).to_field(h=cfg.h)
    losses = []
    for tt in cfg.t_ladder:
        z = float(b.z(tt))
        mask = a_field.x <= z
        lost = float(a_field.h * np.sum(np.abs(a_field.values[mask]) ** 2))
        losses.append(lost)
        rows.append((f"Et-loss-t{tt:g}", lost, 0.0))
    asserts.append(Assertion("Et-loss-decreasing",
                             all(a >= bb for a, bb in zip(losses, losses[1:]))
                             and losses[-1] < losses[0],
                             f"{losses}"))

    # (d) Prop 2.4 window: boundary vs line propagation agree mid-flight
    t_w = 20.0
    fw = BumpProfile(center=2.0, sigma=0.4, carrier=1.0, n_sigma=5.0).to_field(
        h=cfg.h, component=0)
    C = (b.x_star - fw.support_bounds()[0]) / 2.0 + 1.0
    worst = 0.0
    for frac in (1.0, 1.5, 2.0):
        s_w = t_w / 2.0 + frac * C
        data = replace(translate_field(fw, 0.0), time_tag=t_w)
        data = embed_field(data, float(b.z(t_w)) - 1.0, fw.x_max + t_w + 1.0)
        out_b, err_b = propagate_boundary_numeric(data, b, V, s_w,
                                                  error_estimate=True)
        out_l = evolve_line(data, V, s_w - t_w, warn_leak=False)
        d = float(np.sqrt(out_b.h * np.sum(np.abs(out_b.values - out_l.values) ** 2)))
        worst = max(worst, d / max(err_b, 1e-14))
        rows.append((f"window-s{frac:g}C", d, err_b))
    asserts.append(Assertion("window-agreement", worst <= 2.0,
                             f"max diff / scheme error = {worst:.3g}"))

    return ExperimentReport(
        name="hawking2-diagnostics",
        columns=["check", "observed", "reference"],
        rows=rows,
        summary={"wave_table": rung_rows, "moving_velocity": frac_moving},
        assertions=asserts)


def _velocity_of(f, V, t_probe):
    res = propagation_diagnostics(f, V, [t_probe], c0=0.2)
    vg = res.velocity_grid
    return float(vg[np.argmax(res.velocity_mass)])


def _halfline_forward(psi, b, V, dt):
    data = replace(psi, time_tag=-dt)
    return propagate_boundary_numeric(data, b, V, 0.0)


def _halfline_wave_table(f, b, V, ladder):
    """Rung table for s-lim e^{i t b^V_0} e^{-i t b^V_inf} on right movers."""
    psi = f
    t_prev = 0.0
    table = []
    for tt in ladder:
        dt = tt - t_prev
        psi_next = evolve_line(psi, V, -dt, warn_leak=False)
        pulled = _halfline_forward(psi_next, b, V, dt)
        rung = float(np.sqrt(psi.h * np.sum(np.abs(pulled.values - psi.values) ** 2)))
        table.append((tt, rung))
        psi = psi_next
        t_prev = tt
    image = _halfline_forward_long(psi, b, V, ladder[-1])
    return table, image


def _halfline_forward_long(psi, b, V, total):
    data = replace(psi, time_tag=-total)
    return propagate_boundary_numeric(data, b, V, 0.0)


# -- ground-state / dyson / car suites ---------------------------------------------------


@dataclass
class GroundStateConfig:
    lam_ladder: tuple = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5)
    probe_lambda: float = 0.05
    seed: int = 0


def ground_state_experiment(cfg: GroundStateConfig) -> ExperimentReport:
    rng = np.random.default_rng(cfg.seed)
    basis = [ArrayVector(np.eye(4)[j]) for j in range(4)]
    rep = FockRep(basis)
    g = np.array([0.6, 0.8])
    M = np.array([[1.0, 0.2], [0.2, -0.8]])
    inter = build_interaction(g, M, 2)
    b4 = np.diag([1.0, -1.0, 1.7, -0.4]) + 0.15 * rng.normal(size=(4, 4))
    b4 = (b4 + b4.conj().T) / 2.0
    rows_obj = ground_state_analysis(b4, inter, rep, cfg.lam_ladder)
    rows = [(r.lam, r.energy, r.gap, r.charge, int(r.degenerate)) for r in rows_obj]
    probe = next(r for r in rows_obj if abs(r.lam - cfg.probe_lambda) < 1e-12)
    asserts = [
        Assertion("probe-nondegenerate", not probe.degenerate,
                  f"gap {probe.gap:.3g}"),
        Assertion("probe-charge-zero", abs(probe.charge) <= 1e-10,
                  f"|<Q>| = {abs(probe.charge):.3g}"),
        Assertion("lambda0-energy-zero", abs(rows_obj[0].energy) <= 1e-10,
                  f"E(0) = {rows_obj[0].energy:.3g}"),
    ]
    threshold = 0.0
    for r in rows_obj:
        if r.degenerate or abs(r.charge) > 1e-10:
            break
        threshold = r.lam
    return ExperimentReport(
        name="ground-state",
        columns=["lambda", "energy", "gap", "charge", "degenerate"],
        rows=rows,
        summary={"observed_threshold": threshold,
                 "spectrum": np.linalg.eigvalsh(b4).tolist()},
        assertions=asserts)


@dataclass
class DysonCheckConfig:
    seed: int = 0
    rk4_step: float = 1e-3


def dyson_check_experiment(cfg: DysonCheckConfig) -> ExperimentReport:
    from scipy.linalg import expm
    rng = np.random.default_rng(cfg.seed)
    basis = [ArrayVector(np.eye(5)[j]) for j in range(5)]
    rep = FockRep(basis)

    class PadVec:
        def __init__(self, gv):
            self.gv = np.asarray(gv, complex)

        def spinor_tensor(self, e):
            v = np.zeros(5, complex)
            v[:4] = np.kron(self.gv, e)
            return ArrayVector(v)

    inter = build_interaction(PadVec([0.8, 0.6]),
                              np.array([[1.0, 0.3 + 0.2j], [0.3 - 0.2j, -0.5]]), 2)
    bmat = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    bmat = (bmat + bmat.conj().T) / 2.0

    def free_map(s, sig):
        U = expm(1j * (s - sig) * bmat)
        return lambda v: ArrayVector(U @ v.data)

    gen = represented_generator(free_map, inter, rep, 0.0)
    H = lambda sig: gen(sig)[0]
    R02 = dyson_propagator(H, 0.0, 2.0, rk4_step=cfg.rk4_step).matrix
    R01 = dyson_propagator(H, 0.0, 1.0, rk4_step=cfg.rk4_step).matrix
    R12 = dyson_propagator(H, 1.0, 2.0, rk4_step=cfg.rk4_step).matrix
    uni = unitarity_residual(R02)
    coc = float(np.linalg.norm(R01 @ R12 - R02, 2))
    even = evenness_check(R02, rep)

    ser = dyson_propagator(H, 0.0, 1.0, method="series", series_order=14,
                           series_nodes=401, tail_tol=1e-7)
    rk = dyson_propagator(H, 0.0, 1.0, rk4_step=5e-4).matrix
    svr = float(np.linalg.norm(rk - ser.matrix, 2))

    s_, tp_, t_ = 0.0, 0.7, 1.5
    gen_tp = represented_generator(free_map, inter, rep, tp_)
    R_tp = dyson_propagator(lambda x: gen_tp(x)[0], tp_, t_,
                            rk4_step=cfg.rk4_step).matrix
    G = rep.dgamma(bmat)
    conj = expm(1j * (s_ - tp_) * G)
    chain = float(np.linalg.norm(conj @ R_tp @ conj.conj().T
                                 - dyson_propagator(lambda x: gen(x)[0], tp_, t_,
                                                    rk4_step=cfg.rk4_step).matrix, 2))

    b2 = np.zeros((5, 5), complex)
    blk = rng.normal(size=(4, 4))
    b2[:4, :4] = (blk + blk.T) / 2.0
    b2[4, 4] = 0.7

    def fm2(s, sig):
        U = expm(1j * (s - sig) * b2)
        return lambda v: ArrayVector(U @ v.data)

    A = AlgebraElement.psi(ArrayVector(np.eye(5)[4]))
    res = interacting_dynamics_apply(fm2, inter, rep, A, 0.0, 1.5,
                                     rk4_step=cfg.rk4_step)
    free_only, _ = rep.represent(A.map_vectors(fm2(0.0, 1.5)))
    loc = float(np.linalg.norm(res.matrix - free_only, 2))

    # artificially odd generator: evenness check must fail by O(1)
    odd_gen = rep.represent(AlgebraElement.psi(basis[0])
                            + AlgebraElement.psi_star(basis[0]))[0]
    R_odd = dyson_propagator(lambda x: odd_gen, 0.0, 1.0,
                             rk4_step=cfg.rk4_step).matrix
    odd_resid = evenness_check(R_odd, rep)

    rows = [("unitarity", uni), ("cocycle", coc), ("evenness", even),
            ("series-vs-rk4", svr), ("chain-identity", chain),
            ("zero-overlap-locality", loc), ("odd-generator-evenness", odd_resid)]
    asserts = [
        Assertion("unitarity", uni <= 1e-8, f"{uni:.3g}"),
        Assertion("cocycle", coc <= 1e-8, f"{coc:.3g}"),
        Assertion("evenness", even <= 1e-9, f"{even:.3g}"),
        Assertion("series-vs-rk4", svr <= 1e-8,
                  f"{svr:.3g} (tail bound {ser.tail_bound:.3g})"),
        Assertion("chain-identity", chain <= 1e-8, f"{chain:.3g}"),
        Assertion("zero-overlap-locality", loc <= 1e-9, f"{loc:.3g}"),
        Assertion("odd-generator-detected", odd_resid > 0.1, f"{odd_resid:.3g}"),
    ]
    return ExperimentReport(
        name="dyson-check",
        columns=["check", "residual"],
        rows=rows,
        summary={"series_tail_bound": ser.tail_bound},
        assertions=asserts)


@dataclass
class CarSuiteConfig:
    seed: int = 0
    n_wick: int = 50
    n_positivity: int = 100


def car_suite_experiment(cfg: CarSuiteConfig) -> ExperimentReport:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    asserts = []

    worst_car = 0.0
    for n in (2, 4, 6):
        rep = FockRep([ArrayVector(np.eye(n)[j]) for j in range(n)])
        for i in range(n):
            for j in range(n):
                ai = rep.annihilator(i)
                anti1 = ai @ rep.annihilator(j) + rep.annihilator(j) @ ai
                anti2 = (ai @ rep.creator(j) + rep.creator(j) @ ai
                         - (1.0 if i == j else 0.0) * np.eye(rep.dim))
                worst_car = max(worst_car, float(np.max(np.abs(anti1))),
                                float(np.max(np.abs(anti2))))
    rows.append(("car-identities", worst_car))
    asserts.append(Assertion("car-identities", worst_car <= 1e-12,
                             f"{worst_car:.3g}"))

    n = 4
    rep = FockRep([ArrayVector(np.eye(n)[j]) for j in range(n)])
    hmat = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    hmat = (hmat + hmat.conj().T) / 2.0
    rho = car.gibbs_density_matrix(rep, hmat, 0.9)
    cov = car.gibbs_covariance(hmat, 0.9)
    worst_wick = 0.0
    vecs = [ArrayVector(rng.normal(size=n) + 1j * rng.normal(size=n))
            for _ in range(4)]
    for _ in range(cfg.n_wick):
        a = random_element(rng, vecs, max_degree=4, n_terms=3)
        m, _ = rep.represent(a)
        worst_wick = max(worst_wick,
                         abs(complex(np.trace(rho @ m))
                             - quasifree_expectation(cov, a)))
    rows.append(("wick-vs-gibbs", worst_wick))
    asserts.append(Assertion("wick-vs-gibbs", worst_wick <= 1e-10,
                             f"{worst_wick:.3g}"))

    def proj1(v):
        d = v.data.copy()
        d[2:] = 0
        return ArrayVector(d)

    def proj2(v):
        d = v.data.copy()
        d[:2] = 0
        return ArrayVector(d)

    worst_rt = 0.0
    for _ in range(10):
        a = random_element(rng, vecs, max_degree=3, n_terms=3)
        gsplit = car.exponential_law_split(a, proj1, proj2)
        m1, _ = rep.represent(a)
        m2, _ = rep.represent(car.exponential_law_unsplit(gsplit))
        worst_rt = max(worst_rt, float(np.max(np.abs(m1 - m2))))
    rows.append(("exponential-law-roundtrip", worst_rt))
    asserts.append(Assertion("exponential-law-roundtrip", worst_rt <= 1e-12,
                             f"{worst_rt:.3g}"))

    cb = cov.c.copy()
    cb[:2, 2:] = 0
    cb[2:, :2] = 0
    cov_b = MatrixCovariance(cb, check=False)
    om1 = lambda el: quasifree_expectation(cov_b, el)
    om2 = om1
    min_pos = np.inf
    for _ in range(cfg.n_positivity):
        A = random_element(rng, vecs, max_degree=2, n_terms=3)
        gsplit = car.exponential_law_split(A.adjoint() * A, proj1, proj2)
        val = car.graded_state_tensor(om1, om2, gsplit)
        min_pos = min(min_pos, val.real)
    rows.append(("graded-positivity-min", float(min_pos)))
    asserts.append(Assertion("graded-positivity", min_pos >= -1e-10,
                             f"min omega(A*A) = {min_pos:.3g}"))

    theta = np.pi / 2.0
    from scipy.linalg import expm
    bq = np.diag([1.0, -0.7, 1.3, -0.4])
    Q = rep.charge(bq)
    worst_rot = 0.0
    for v in vecs:
        lhs = expm(1j * theta * Q) @ rep.field(v)[0] @ expm(-1j * theta * Q)
        rhs = rep.field(v.scaled(np.exp(1j * theta)))[0]
        worst_rot = max(worst_rot, float(np.max(np.abs(lhs - rhs))))
    rows.append(("charge-rotation", worst_rot))
    asserts.append(Assertion("charge-rotation", worst_rot <= 1e-10,
                             f"{worst_rot:.3g}"))

    worst_par = 0.0
    for v in vecs:
        lhs = rep.parity @ rep.field(v)[0] @ rep.parity
        rhs = rep.field(v.scaled(-1.0))[0]
        worst_par = max(worst_par, float(np.max(np.abs(lhs - rhs))))
    rows.append(("parity-conjugation", worst_par))
    asserts.append(Assertion("parity-conjugation", worst_par <= 1e-12,
                             f"{worst_par:.3g}"))

    worst_no = 0.0
    for _ in range(10):
        a = random_element(rng, vecs, max_degree=4, n_terms=2)
        m1, _ = rep.represent(a)
        m2, _ = rep.represent(a.normal_order())
        worst_no = max(worst_no, float(np.max(np.abs(m1 - m2))))
    rows.append(("normal-order-equivalence", worst_no))
    asserts.append(Assertion("normal-order-equivalence", worst_no <= 1e-12,
                             f"{worst_no:.3g}"))

    return ExperimentReport(
        name="car-suite",
        columns=["check", "residual"],
        rows=rows,
        summary={},
        assertions=asserts)
