"""Driven box coupled to the resistive gate line: Bloch-type master equation
in the adiabatic basis, heat bookkeeping, and the two analytic limits
(weak-coupling work-heat ratio, fast-relaxation dissipated heat).

State convention: p = rho_gg, rho_ge = <g|rho|e>, all in the instantaneous
adiabatic basis with the real band convention of cpb.band_structure. Heat is
counted positive when released to the bath, so the ledger closes as
work = delta_e + heat.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cpb import DriveSample, ModelParams, RateBundle, bath_rates, drive, spectral_density
from .linalg import IntegrationError

POP_ABORT = 1e-4   # population excursion outside [0, 1] that aborts a run
STATE_TOL = 1e-6   # drift tolerance on a stored BlochState


class PositivityError(IntegrationError):
    """The master equation drove the population out of [0, 1]."""


@dataclass(frozen=True)
class BlochState:
    """Two-level density matrix in the adiabatic basis: (rho_gg, rho_ge)."""

    rho_gg: float
    rho_ge: complex = 0j

    def __post_init__(self) -> None:
        if not (np.isfinite(self.rho_gg) and np.isfinite(self.rho_ge)):
            raise ValueError("BlochState entries must be finite")
        if not -STATE_TOL <= self.rho_gg <= 1.0 + STATE_TOL:
            raise ValueError(f"rho_gg={self.rho_gg} outside [0, 1]")
        if abs(self.rho_ge) > 0.5 + STATE_TOL:
            raise ValueError(f"|rho_ge|={abs(self.rho_ge)} outside the Bloch ball")

    @staticmethod
    def ground() -> "BlochState":
        return BlochState(rho_gg=1.0)

    @staticmethod
    def thermal(params: ModelParams, t: float = 0.0) -> "BlochState":
        """Instantaneous Gibbs state of the bands at ramp time t."""
        b = bath_rates(drive(t, params), params)
        if math.isinf(params.beta):
            return BlochState(rho_gg=1.0)
        return BlochState(rho_gg=1.0 / (1.0 + math.exp(-params.beta * b.omega0)))


@dataclass(frozen=True)
class HeatLedger:
    """Energy bookkeeping of one run, all in E_C: work done on the box,
    its internal-energy change, and heat released to the bath."""

    work: float
    delta_e: float
    heat: float

    @property
    def residual(self) -> float:
        """First-law defect work - delta_e - heat (zero up to solver error)."""
        return self.work - self.delta_e - self.heat


def me_rhs_at(
    sample: DriveSample, state: BlochState, params: ModelParams
) -> tuple[float, complex]:
    """Right-hand side (dp/dt, drho_ge/dt) of the adiabatic-basis master
    equation at one drive instant.

    Keeps the non-secular population-coherence cross terms; the thermal state
    is exactly stationary for a static drive (qdot = 0) and the rates obey
    detailed balance.
    """
    b = bath_rates(sample, params)
    p = state.rho_gg
    x = state.rho_ge.real
    y = state.rho_ge.imag
    v = b.v_ge
    w0 = b.omega0
    g_sum = b.gamma_ge + b.gamma_eg
    dp = -2.0 * v * x - g_sum * p + b.gamma_eg + b.gamma_t0 * x
    dx = v * (2.0 * p - 1.0) - w0 * y - b.gamma_phi * x + (
        b.gamma_t_plus + b.gamma_t_minus
    ) * p - b.gamma_t_plus
    dy = w0 * x - g_sum * y - b.gamma_phi * y + (v / w0) * (
        (b.gamma_eg - b.gamma_ge)
        - 2.0 * (b.gamma_plus + b.gamma_minus) * p
        + 2.0 * b.gamma_plus
        + b.gamma_phi * (2.0 * p - 1.0)
        + 2.0 * (b.gamma_t0 - b.gamma_t_plus - b.gamma_t_minus) * x
    )
    return dp, complex(dx, dy)


def me_rhs(t: float, state: BlochState, params: ModelParams) -> tuple[float, complex]:
    return me_rhs_at(drive(t, params), state, params)


def energy_flows_at(
    sample: DriveSample, state: BlochState, params: ModelParams
) -> tuple[float, float]:
    """(work rate, heat rate) at one instant, in E_C^2/hbar.

    The work rate is Tr{rho dH/dt} written in the adiabatic basis; the heat
    rate is omega0 times the dissipative part of dp/dt, positive when energy
    leaves the box.
    """
    b = bath_rates(sample, params)
    p = state.rho_gg
    x = state.rho_ge.real
    w = math.hypot(sample.q, params.eps)
    eta = sample.q / w
    seta = params.eps / w
    work_rate = sample.qdot * (eta * (1.0 - 2.0 * p) + 2.0 * seta * x)
    lgg = -(b.gamma_ge + b.gamma_eg) * p + b.gamma_eg + b.gamma_t0 * x
    return work_rate, b.omega0 * lgg


@njit(cache=True, nogil=True)
def _rhs6(t, p, x, y, eps, t_ramp, kappa, r_env, beta):
    # master equation plus running work/heat integrals, all scalars
    q = -0.5 + t / t_ramp
    qdot = 1.0 / t_ramp
    w = math.hypot(q, eps)
    eta = q / w
    seta = eps / w
    w0 = 2.0 * w
    v = 0.5 * eps * qdot / (w * w)

    m1 = -eta * kappa
    m2 = seta * kappa
    s_plus = 2.0 * r_env * w0 / (-math.expm1(-beta * w0))
    s_minus = 2.0 * r_env * (-w0) / (-math.expm1(beta * w0))
    s_zero = 2.0 * r_env / beta

    g_ge = m2 * m2 * s_minus
    g_eg = m2 * m2 * s_plus
    g_phi = 2.0 * m1 * m1 * s_zero
    g_p = m1 * m1 * s_plus
    g_m = m1 * m1 * s_minus
    g_tp = m1 * m2 * s_plus
    g_tm = m1 * m2 * s_minus
    g_t0 = 2.0 * m1 * m2 * s_zero
    g_sum = g_ge + g_eg

    lgg = -g_sum * p + g_eg + g_t0 * x
    dp = -2.0 * v * x + lgg
    dx = v * (2.0 * p - 1.0) - w0 * y - g_phi * x + (g_tp + g_tm) * p - g_tp
    dy = w0 * x - g_sum * y - g_phi * y + (v / w0) * (
        (g_eg - g_ge)
        - 2.0 * (g_p + g_m) * p
        + 2.0 * g_p
        + g_phi * (2.0 * p - 1.0)
        + 2.0 * (g_t0 - g_tp - g_tm) * x
    )
    dwork = qdot * (eta * (1.0 - 2.0 * p) + 2.0 * seta * x)
    dheat = w0 * lgg
    dheat_alt = w0 * dp
    return dp, dx, dy, dwork, dheat, dheat_alt


@njit(cache=True, nogil=True)
def _sweep_bloch(eps, t_ramp, kappa, r_env, beta, p0, x0, y0, n_store, m_sub):
    h = t_ramp / (n_store * m_sub)
    traj = np.empty((n_store + 1, 3))
    p, x, y = p0, x0, y0
    acc_w = 0.0
    acc_q = 0.0
    acc_qa = 0.0
    traj[0, 0] = p
    traj[0, 1] = x
    traj[0, 2] = y
    status = 0
    t_fail = 0.0
    for j in range(n_store):
        for i in range(m_sub):
            t = (j * m_sub + i) * h
            h2 = 0.5 * h
            k1 = _rhs6(t, p, x, y, eps, t_ramp, kappa, r_env, beta)
            k2 = _rhs6(t + h2, p + h2 * k1[0], x + h2 * k1[1], y + h2 * k1[2],
                       eps, t_ramp, kappa, r_env, beta)
            k3 = _rhs6(t + h2, p + h2 * k2[0], x + h2 * k2[1], y + h2 * k2[2],
                       eps, t_ramp, kappa, r_env, beta)
            k4 = _rhs6(t + h, p + h * k3[0], x + h * k3[1], y + h * k3[2],
                       eps, t_ramp, kappa, r_env, beta)
            c = h / 6.0
            p += c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            x += c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            y += c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            acc_w += c * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
            acc_q += c * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])
            acc_qa += c * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5])
            if not (math.isfinite(p) and math.isfinite(x) and math.isfinite(y)):
                status = 2
                t_fail = t + h
                break
            if p < -POP_ABORT or p > 1.0 + POP_ABORT:
                status = 1
                t_fail = t + h
                break
        if status != 0:
            break
        traj[j + 1, 0] = p
        traj[j + 1, 1] = x
        traj[j + 1, 2] = y
    return traj, acc_w, acc_q, acc_qa, status, t_fail


@dataclass(frozen=True)
class OpenResult:
    """Trajectory and energy accounting of one open-system ramp."""

    params: ModelParams
    times: np.ndarray
    rho_gg: np.ndarray
    rho_ge: np.ndarray
    ledger: HeatLedger
    heat_alt: float   # heat from the full dp/dt instead of its dissipative part

    @property
    def final(self) -> BlochState:
        return BlochState(rho_gg=float(self.rho_gg[-1]), rho_ge=complex(self.rho_ge[-1]))


def integrate_open(
    params: ModelParams,
    state0: BlochState | None = None,
    n_steps: int = 4000,
    dt_max: float = 5e-4,
) -> OpenResult:
    """Integrate the master equation over the full ramp with fixed-step RK4.

    n_steps sets the stored grid (n_steps + 1 samples incl. both ends); the
    integrator substeps so the internal step never exceeds dt_max. Aborts if
    the population leaves [-POP_TOL, 1 + POP_TOL] or turns non-finite, and
    checks the first law work = delta_e + heat at 1e-3 before returning.
    """
    if state0 is None:
        state0 = BlochState.ground()
    if n_steps < 1000:
        raise ValueError(f"n_steps={n_steps} too coarse; need at least 1000")
    if not (np.isfinite(dt_max) and dt_max > 0.0):
        raise ValueError("dt_max must be finite and positive")
    m_sub = max(1, math.ceil(params.t_ramp / n_steps / dt_max))
    traj, acc_w, acc_q, acc_qa, status, t_fail = _sweep_bloch(
        params.eps, params.t_ramp, params.kappa, params.r_env, params.beta,
        float(state0.rho_gg), float(state0.rho_ge.real), float(state0.rho_ge.imag),
        int(n_steps), int(m_sub),
    )
    if status == 1:
        raise PositivityError(
            f"population left [{-POP_ABORT}, {1 + POP_ABORT}] near t={t_fail:.6g}"
        )
    if status == 2:
        raise IntegrationError(f"master equation turned non-finite near t={t_fail:.6g}")

    times = np.linspace(0.0, params.t_ramp, n_steps + 1)
    w0_start = bath_rates(drive(0.0, params), params).omega0
    w0_end = bath_rates(drive(params.t_ramp, params), params).omega0
    e_start = 0.5 * w0_start * (1.0 - 2.0 * traj[0, 0])
    e_end = 0.5 * w0_end * (1.0 - 2.0 * traj[-1, 0])
    ledger = HeatLedger(work=acc_w, delta_e=e_end - e_start, heat=acc_q)
    if abs(ledger.residual) > 1e-3:
        raise IntegrationError(
            f"first-law residual {ledger.residual:.3e} exceeds 1e-3; "
            "the step size is too coarse for these rates"
        )
    return OpenResult(
        params=params,
        times=times,
        rho_gg=traj[:, 0].copy(),
        rho_ge=traj[:, 1] + 1j * traj[:, 2],
        ledger=ledger,
        heat_alt=acc_qa,
    )


def weak_coupling_estimate(params: ModelParams) -> float:
    """Leading-order dissipated-heat fraction Q/W = r_env kappa^2 (2 eps)^2 t_ramp.

    Valid while relaxation stays weak over the whole ramp; warns when the
    accumulated relaxation probability at the crossing is no longer small.
    """
    if params.kappa == 0.0 or params.r_env == 0.0:
        return 0.0
    b = bath_rates(DriveSample(q=0.0, qdot=1.0 / params.t_ramp), params)
    action = b.gamma_eg * params.t_ramp   # relaxation peaks at the crossing
    if action > 0.5:
        warnings.warn(
            f"relaxation action Gamma_eg*t_ramp = {action:.3g} is not small; "
            "the weak-coupling heat estimate is unreliable here",
            stacklevel=2,
        )
    return params.r_env * params.kappa**2 * (2.0 * params.eps) ** 2 * params.t_ramp


def _simpson(y: np.ndarray, h: float) -> float:
    n = y.shape[0]
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson rule needs an odd number of samples >= 3")
    return (h / 3.0) * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum())


@dataclass(frozen=True)
class FastRelaxationHeat:
    """Dissipated heat per ramp in the fast-relaxation (quasi-static) limit.

    heat            closed form (beta/t_ramp) int dq eta^2 / (Gamma_sum cosh^2(beta omega0/2))
    heat_from_rates same quantity from the rate-derivative form with a
                    numerical d/dq, an independent transcription
    excess_q0       heat of the instantaneous-equilibrium trajectory itself;
                    vanishes by symmetry on the linear ramp (diagnostic)
    boundary_term   surface term dropped from the partial integration
                    connecting the two forms (diagnostic)
    """

    heat: float
    heat_from_rates: float
    excess_q0: float
    boundary_term: float


def fast_relaxation_heat(params: ModelParams, n_quad: int = 2001) -> FastRelaxationHeat:
    """Analytic dissipated heat when relaxation outruns the drive.

    Requires a finite bath temperature and a finite coupling; the result
    scales as 1/t_ramp exactly. n_quad is the number of Simpson samples over
    the gate-charge interval (odd).
    """
    if math.isinf(params.beta):
        raise ValueError("fast-relaxation heat needs a finite bath temperature")
    if params.kappa == 0.0 or params.r_env == 0.0:
        raise ValueError("fast-relaxation heat needs kappa > 0 and r_env > 0")
    if n_quad < 3 or n_quad % 2 == 0:
        raise ValueError(f"n_quad must be odd and >= 3, got {n_quad}")

    beta, eps, T = params.beta, params.eps, params.t_ramp
    qs = np.linspace(-0.5, 0.5, n_quad)
    hq = 1.0 / (n_quad - 1)
    w = np.hypot(qs, eps)
    w0 = 2.0 * w
    eta2 = (qs / w) ** 2
    s_plus = np.array([spectral_density(v, params.r_env, beta) for v in w0])
    s_minus = np.array([spectral_density(-v, params.r_env, beta) for v in w0])
    g_sum = params.kappa**2 * (1.0 - eta2) * (s_plus + s_minus)
    if not np.all(g_sum > 0.0):
        raise ValueError("relaxation rate vanishes somewhere on the ramp")
    action = float(g_sum.min()) * T
    if action < 20.0:
        warnings.warn(
            f"min Gamma_sum*t_ramp = {action:.3g} < 20; relaxation is not fast "
            "everywhere and the quasi-static heat formula degrades",
            stacklevel=2,
        )

    with np.errstate(over="ignore"):
        sech2 = 1.0 / np.cosh(0.5 * beta * w0) ** 2
    heat = (beta / T) * _simpson(eta2 / g_sum * sech2, hq)

    # independent route: (4/T) int dq q/(omega0 Gamma_sum) d/dq (Gamma_eg/Gamma_sum)
    pop = s_plus / (s_plus + s_minus)
    dpop = np.gradient(pop, qs)
    heat_from_rates = (4.0 / T) * _simpson(qs / (w0 * g_sum) * dpop, hq)

    # heat of the instantaneous-equilibrium state; odd integrand on the
    # symmetric ramp, kept as a cancellation diagnostic
    excess_q0 = _simpson(w0 * np.gradient(pop, qs), hq)

    dw0 = 2.0 * qs / w / T   # d omega0 / dt along the ramp
    surface = 0.25 * beta * w0 * dw0 * sech2 / g_sum
    boundary_term = float(surface[-1] - surface[0])

    return FastRelaxationHeat(
        heat=float(heat),
        heat_from_rates=float(heat_from_rates),
        excess_q0=float(excess_q0),
        boundary_term=boundary_term,
    )
