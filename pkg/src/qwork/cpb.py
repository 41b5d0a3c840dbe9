"""Cooper-pair box swept through its charge degeneracy: drive, Hamiltonian,
instantaneous bands and golden-rule bath rates.

Normalized units throughout: energies in E_C, times in hbar/E_C, rates in
E_C/hbar, gate charge q dimensionless. The drive is the linear ramp
q(t) = -1/2 + t/t_ramp, so the avoided crossing sits at t = t_ramp/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import Mat2, Vec2

EPS_MAX = 0.2   # two-level reduction of the full charge ladder holds for eps <= 0.2


@dataclass(frozen=True)
class ModelParams:
    """Box and environment parameters.

    eps   = E_J / (2 E_C), half the minimum gap in units of E_C
    t_ramp  ramp duration in hbar/E_C
    kappa = C_g / C_Sigma, gate-coupling fraction of the charge noise
    r_env = R / R_Q, gate-line resistance over hbar/e^2
    beta    inverse bath temperature in 1/E_C (math.inf = zero temperature)
    e_c_kelvin  physical E_C / k_B; only used to convert lab units at the CLI
    """

    eps: float
    t_ramp: float
    kappa: float = 0.0
    r_env: float = 0.0
    beta: float = math.inf
    e_c_kelvin: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.eps <= EPS_MAX):
            raise ValueError(f"eps must lie in (0, {EPS_MAX}], got {self.eps}")
        if not (np.isfinite(self.t_ramp) and self.t_ramp > 0.0):
            raise ValueError(f"t_ramp must be finite and positive, got {self.t_ramp}")
        if not (np.isfinite(self.kappa) and 0.0 <= self.kappa < 1.0):
            raise ValueError(f"kappa is a capacitance fraction in [0, 1), got {self.kappa}")
        if not (np.isfinite(self.r_env) and self.r_env >= 0.0):
            raise ValueError(f"r_env must be >= 0, got {self.r_env}")
        if not self.beta > 0.0:  # inf allowed
            raise ValueError(f"beta must be positive (inf for T=0), got {self.beta}")
        if self.e_c_kelvin is not None and not self.e_c_kelvin > 0.0:
            raise ValueError("e_c_kelvin must be positive when given")


@dataclass(frozen=True)
class DriveSample:
    """Gate charge and its rate at one instant."""

    q: float
    qdot: float


def drive(t: float, params: ModelParams) -> DriveSample:
    """Linear ramp q = -1/2 + t/t_ramp; only defined on 0 <= t <= t_ramp."""
    T = params.t_ramp
    if not -1e-9 * T <= t <= T * (1.0 + 1e-9):
        raise ValueError(f"t={t} outside the ramp [0, {T}]")
    return DriveSample(q=-0.5 + t / T, qdot=1.0 / T)


def hamiltonian_and_power(sample: DriveSample, params: ModelParams) -> tuple[Mat2, Mat2]:
    """H/E_C in the charge basis {|0>, |1>} and its explicit time derivative.

    H = q sigma_z - eps sigma_x with q the reduced gate charge; the power
    operator dH/dt = qdot sigma_z is what the work integrals sample.
    """
    h = np.array([[sample.q, -params.eps], [-params.eps, -sample.q]], dtype=complex)
    dh = np.array([[sample.qdot, 0.0], [0.0, -sample.qdot]], dtype=complex)
    return h, dh


@dataclass(frozen=True)
class BandStructure:
    """Instantaneous eigenproblem of the two-level box at one gate charge."""

    omega0: float    # level splitting E_e - E_g, in E_C
    eta: float       # q / sqrt(q^2 + eps^2), the band mixing parameter
    ground: Vec2
    excited: Vec2


def band_structure(sample: DriveSample, params: ModelParams) -> BandStructure:
    """Adiabatic bands with the real phase convention.

    |g> = (sqrt(1-eta)|0> + sqrt(1+eta)|1>)/sqrt(2)
    |e> = (sqrt(1+eta)|0> - sqrt(1-eta)|1>)/sqrt(2)
    Both components real; continuous through the crossing at q = 0.
    """
    q, eps = sample.q, params.eps
    w = math.hypot(q, eps)
    eta = q / w
    sp = math.sqrt(1.0 + eta)
    sm = math.sqrt(1.0 - eta)
    ground = np.array([sm, sp], dtype=complex) / math.sqrt(2.0)
    excited = np.array([sp, -sm], dtype=complex) / math.sqrt(2.0)
    return BandStructure(omega0=2.0 * w, eta=eta, ground=ground, excited=excited)


def spectral_density(omega: float, r_env: float, beta: float) -> float:
    """Normalized ohmic gate-noise spectrum S(omega) in units of E_C/hbar.

    S(omega) = 2 r_env omega / (1 - exp(-beta omega)); the omega -> 0 limit
    is 2 r_env / beta and negative frequencies carry the detailed-balance
    suppression. At beta = inf this reduces to 2 r_env omega theta(omega)
    without any branching (expm1 handles the limits).
    """
    if omega == 0.0:
        return 2.0 * r_env / beta  # = 0 at beta = inf
    x = beta * omega
    if -x > 700.0:  # e^{-x} overflows; the absorption side is numerically zero
        return 0.0
    return 2.0 * r_env * omega / (-math.expm1(-x))


@dataclass(frozen=True)
class RateBundle:
    """Golden-rule rates of the charge-noise master equation at one instant.

    All rates in E_C/hbar. gamma_eg / gamma_ge drive e->g / g->e transitions
    and obey detailed balance; gamma_phi is pure dephasing. The tilde rates
    (population-coherence cross terms) and gamma_plus/minus feed the
    non-secular pieces; they are sign-indefinite. gamma_0 is the S(0) sibling
    of gamma_eg, defined for completeness but not used by the evolution.
    m1, m2 are the adiabatic matrix elements of the coupling charge (units of
    e), v_ge the nonadiabatic coupling from the ramp.
    """

    omega0: float
    gamma_ge: float
    gamma_eg: float
    gamma_phi: float
    gamma_plus: float
    gamma_minus: float
    gamma_t_plus: float
    gamma_t_minus: float
    gamma_t0: float
    gamma_0: float
    v_ge: float
    m1: float
    m2: float


def bath_rates(sample: DriveSample, params: ModelParams) -> RateBundle:
    q, eps = sample.q, params.eps
    w = math.hypot(q, eps)
    eta = q / w
    seta = math.sqrt(1.0 - eta * eta)   # = eps / w
    kappa, r, beta = params.kappa, params.r_env, params.beta
    omega0 = 2.0 * w

    m1 = -eta * kappa
    m2 = seta * kappa
    s_plus = spectral_density(omega0, r, beta)
    s_minus = spectral_density(-omega0, r, beta)
    s_zero = spectral_density(0.0, r, beta)

    return RateBundle(
        omega0=omega0,
        gamma_ge=m2 * m2 * s_minus,       # g -> e, absorption; vanishes at T = 0
        gamma_eg=m2 * m2 * s_plus,        # e -> g, emission
        gamma_phi=2.0 * m1 * m1 * s_zero,
        gamma_plus=m1 * m1 * s_plus,
        gamma_minus=m1 * m1 * s_minus,
        gamma_t_plus=m1 * m2 * s_plus,
        gamma_t_minus=m1 * m2 * s_minus,
        gamma_t0=2.0 * m1 * m2 * s_zero,
        gamma_0=2.0 * m2 * m2 * s_zero,
        v_ge=0.5 * eps * sample.qdot / (w * w),
        m1=m1,
        m2=m2,
    )


def chi_adiabatic(params: ModelParams) -> float:
    """Dimensionless sweep-rate measure chi = 1/(4 eps t_ramp).

    Equals eps * v_ge / omega0 at the crossing; chi << 1 is the adiabatic,
    chi >> 1 the sudden regime.
    """
    return 1.0 / (4.0 * params.eps * params.t_ramp)
