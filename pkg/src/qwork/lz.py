"""Instantaneous-crossing description of the swept box.

The ramp is split into free adiabatic evolution on either side of q = 0 plus
a sudden Landau-Zener transfer matrix at the crossing. Everything here is
closed form; the simulator modules exist to check these expressions.

Units: work in E_C, the counting variable u in 1/E_C, times in hbar/E_C.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .cpb import ModelParams, drive
from .linalg import Mat2, Vec2

# Lanczos coefficients, g = 7, 9 terms; good to ~1e-13 over the right half plane.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def log_gamma(z: complex) -> complex:
    """Log Gamma via the Lanczos approximation.

    Matches the principal continuation for Re z >= 1/2 (the only region the
    package evaluates); reflection covers Re z < 1/2 with the imaginary part
    fixed only up to 2 pi. Poles at z = 0, -1, -2, ... raise.
    """
    z = complex(z)
    if z.real < 0.5:
        if z.imag == 0.0 and z.real == math.floor(z.real):
            raise ValueError(f"log_gamma pole at z={z}")
        return cmath.log(math.pi / cmath.sin(math.pi * z)) - log_gamma(1.0 - z)
    z -= 1.0
    x = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        x += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def stokes_phase(delta: float) -> float:
    """Phase picked up by the amplitude that stays adiabatic at the crossing.

    phi = delta (ln delta - 1) + arg Gamma(1 - i delta) + pi/4. The pi/4
    offset goes with the transfer-matrix convention used below; it was pinned
    by matching the interference term of the work against direct integration
    of the Schrodinger equation (see tests).
    """
    if not (delta > 0.0 and np.isfinite(delta)):
        raise ValueError(f"need finite delta > 0, got {delta}")
    return delta * (math.log(delta) - 1.0) + log_gamma(1.0 - 1j * delta).imag + 0.25 * math.pi


def _half_gap_antiderivative(q: float, eps: float) -> float:
    # antiderivative of sqrt(q^2 + eps^2) in q
    w = math.hypot(q, eps)
    return 0.5 * (q * w + eps * eps * math.asinh(q / eps))


def gap_phase_integral(params: ModelParams, q_from: float, q_to: float) -> float:
    """Dynamical half-gap phase int omega0/2 dt between two gate charges."""
    eps = params.eps
    return params.t_ramp * (
        _half_gap_antiderivative(q_to, eps) - _half_gap_antiderivative(q_from, eps)
    )


@dataclass(frozen=True)
class LZParams:
    """Derived crossing parameters for one (eps, t_ramp) point.

    delta is the adiabaticity parameter eps^2 t_ramp / 2, p_lz the diabatic
    transition probability exp(-2 pi delta), phi the Stokes phase, and
    xi1 / xi2 the dynamical half-gap phases accumulated before and after the
    crossing (equal for the symmetric ramp).
    """

    delta: float
    p_lz: float
    phi: float
    xi1: float
    xi2: float


def lz_parameters(params: ModelParams) -> LZParams:
    delta = 0.5 * params.eps**2 * params.t_ramp
    xi1 = gap_phase_integral(params, -0.5, 0.0)
    return LZParams(
        delta=delta,
        p_lz=math.exp(-2.0 * math.pi * delta),
        phi=stokes_phase(delta),
        xi1=xi1,
        xi2=xi1,
    )


@dataclass(frozen=True)
class InitialState:
    """Pure state alpha|g> + sqrt(1-alpha^2) e^{i gamma} |e> at t = 0."""

    alpha: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite")

    @property
    def beta_amp(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.alpha**2))


def transfer_matrix(lz: LZParams) -> Mat2:
    """Unitary connecting adiabatic amplitudes (a_g, a_e) across the crossing."""
    p = lz.p_lz
    stay = math.sqrt(1.0 - p)
    hop = math.sqrt(p)
    ph = cmath.exp(1j * lz.phi)
    return np.array([[stay * ph, -hop], [hop, stay * ph.conjugate()]], dtype=complex)


def evolve_instantaneous(
    lz: LZParams, init: InitialState, t: float, params: ModelParams
) -> Vec2:
    """Adiabatic-basis amplitudes (a_g, a_e) at time t under the crossing model.

    Free segments carry the physical phases exp(-+ i xi(t)) with
    xi(t) = int omega0/2 dt' from the segment start; the transfer matrix acts
    once, at t = t_ramp/2. Populations are piecewise constant by construction.
    """
    T = params.t_ramp
    if not -1e-9 * T <= t <= T * (1.0 + 1e-9):
        raise ValueError(f"t={t} outside the ramp [0, {T}]")
    a = np.array([init.alpha, init.beta_amp * cmath.exp(1j * init.gamma)], dtype=complex)
    q = drive(min(max(t, 0.0), T), params).q
    if t <= 0.5 * T:
        xi = gap_phase_integral(params, -0.5, q)
        return np.array([a[0] * cmath.exp(1j * xi), a[1] * cmath.exp(-1j * xi)])
    xi1 = lz.xi1
    a_half = np.array([a[0] * cmath.exp(1j * xi1), a[1] * cmath.exp(-1j * xi1)])
    a_cross = transfer_matrix(lz) @ a_half
    xi = gap_phase_integral(params, 0.0, q)
    return np.array([a_cross[0] * cmath.exp(1j * xi), a_cross[1] * cmath.exp(-1j * xi)])


@dataclass(frozen=True)
class WorkStats:
    """First two moments of the work, in units of E_C and E_C^2."""

    w1: float
    w2: float
    var: float


def work_stats_analytic(lz: LZParams, init: InitialState) -> WorkStats:
    """Closed-form work moments of the crossing model.

    w1/E_C = (2 alpha^2 - 1) P + 2 alpha beta sqrt((1-P) P) cos(2 xi1 + phi - gamma)
    w2/E_C^2 = P, independent of the initial superposition, so the variance
    carries all the interference. Valid for any pure initial state.
    """
    p = lz.p_lz
    a, b = init.alpha, init.beta_amp
    w1 = (2.0 * a * a - 1.0) * p + 2.0 * a * b * math.sqrt((1.0 - p) * p) * math.cos(
        2.0 * lz.xi1 + lz.phi - init.gamma
    )
    w2 = p
    return WorkStats(w1=w1, w2=w2, var=w2 - w1 * w1)


@dataclass(frozen=True)
class WorkDistribution:
    """Two-point work distribution and its characteristic function samples."""

    atoms: tuple[tuple[float, float], ...]   # (work value / E_C, probability)
    u: np.ndarray
    g: np.ndarray


def work_distribution_ground(
    lz: LZParams,
    init: InitialState | None = None,
    u: np.ndarray | None = None,
) -> WorkDistribution:
    """P(W) for a ground-state start: atoms at W = 0 and W = E_C.

    G(u) = <e^{i u W}> = 1 + P (e^{i u E_C} - 1). Only the ground start has a
    proper two-point distribution here (the projective first measurement
    kills initial coherences); anything else is rejected.
    """
    if init is None:
        init = InitialState(alpha=1.0)
    if abs(init.alpha - 1.0) > 1e-12:
        raise ValueError(
            "work distribution requires the ground initial state (alpha = 1); "
            f"got alpha={init.alpha}"
        )
    p = lz.p_lz
    atoms = ((0.0, 1.0 - p), (1.0, p))
    uu = np.atleast_1d(np.asarray(0.0 if u is None else u, dtype=float))
    g = 1.0 + p * (np.exp(1j * uu) - 1.0)
    return WorkDistribution(atoms=atoms, u=uu, g=g)


@dataclass(frozen=True)
class OracleMoments:
    """Work moments rebuilt from charge-basis pieces of the crossing model.

    n_before / n_after are the (constant) excess-charge expectations on the
    two halves of the ramp; d1, d2, d3 split the time-ordered double integral
    of the charge correlator over T^2 at the crossing. These rebuild w1 and
    w2 through the charge-only work integrals, an algebraically independent
    route from work_stats_analytic.
    """

    n_before: float
    n_after: float
    d1: float
    d2: float
    d3: float
    w1: float
    w2: float


def charge_basis_oracle(lz: LZParams, init: InitialState) -> OracleMoments:
    """Cross-check of the analytic work moments through the charge basis.

    Asserts agreement with work_stats_analytic at 1e-12 and returns the
    pieces. A mismatch means the two derivations fell out of sync and is
    raised, not returned.
    """
    p = lz.p_lz
    a, b = init.alpha, init.beta_amp
    cosx = math.cos(2.0 * lz.xi1 + lz.phi - init.gamma)
    root = math.sqrt((1.0 - p) * p)

    n_before = 1.0 - a * a
    n_after = (1.0 - p) * a * a + p * (1.0 - a * a) - 2.0 * a * b * root * cosx
    d1 = 0.125 * (1.0 - a * a)
    d2 = 0.25 * ((1.0 - a * a) * p - a * b * root * cosx)
    d3 = 0.125 * ((1.0 - 2.0 * a * a) * p + a * a - 2.0 * a * b * root * cosx)

    w1 = 1.0 - n_before - n_after
    w2 = 2.0 * w1 - 1.0 + 8.0 * (d1 + d2 + d3)

    ref = work_stats_analytic(lz, init)
    if abs(w1 - ref.w1) > 1e-12 or abs(w2 - ref.w2) > 1e-12:
        raise RuntimeError(
            "charge-basis reconstruction disagrees with the analytic moments: "
            f"w1 {w1} vs {ref.w1}, w2 {w2} vs {ref.w2}"
        )
    return OracleMoments(
        n_before=n_before, n_after=n_after, d1=d1, d2=d2, d3=d3, w1=w1, w2=w2
    )
