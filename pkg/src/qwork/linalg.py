"""Dense 2x2 complex helpers and a fixed-step RK4 integrator.

States are plain numpy arrays: a ket is shape (2,) complex128, an operator or
density matrix is shape (2, 2) complex128. Multiplication, addition and
scaling are numpy's native operators; only the ops numpy does not spell out
directly live here.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

Vec2 = np.ndarray   # shape (2,), complex
Mat2 = np.ndarray   # shape (2, 2), complex

IDENTITY2 = np.eye(2, dtype=complex)


class IntegrationError(RuntimeError):
    """A numerical evolution left its validity domain."""


def check_finite(a: np.ndarray, name: str = "array") -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def dagger(m: Mat2) -> Mat2:
    return np.conj(m).T


def commutator(a: Mat2, b: Mat2) -> Mat2:
    check_finite(a, "a")
    check_finite(b, "b")
    return a @ b - b @ a


def expectation(op: Mat2, psi: Vec2) -> complex:
    """<psi|op|psi> (not forced real; callers take .real for Hermitian op)."""
    check_finite(op, "op")
    check_finite(psi, "psi")
    return complex(np.vdot(psi, op @ psi))


def trace_with(rho: Mat2, op: Mat2) -> complex:
    """Tr{rho op}."""
    check_finite(rho, "rho")
    check_finite(op, "op")
    return complex(np.trace(rho @ op))


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def hermiticity_defect(m: Mat2) -> float:
    return frobenius(m - dagger(m))


def unitarity_defect(u: Mat2) -> float:
    return frobenius(dagger(u) @ u - IDENTITY2)


def validate_density(rho: Mat2, herm_tol: float = 1e-9, eig_floor: float = -1e-7) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return the eigenvalues."""
    check_finite(rho, "rho")
    if hermiticity_defect(rho) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > herm_tol:
        raise ValueError("density matrix trace differs from 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < eig_floor:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")
    return evals


def rk4_integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step RK4 of dy/dt = rhs(t, y) on [t0, t1].

    dt caps the step: the span is cut into n = ceil((t1-t0)/dt) equal steps,
    so the actual step is the largest h <= dt that lands exactly on t1. The
    returned grid includes both endpoints (n + 1 samples). Works on any array
    shape and dtype (complex states integrate as their real embedding).
    Aborts with IntegrationError if the state turns non-finite mid-run.
    """
    if not (np.isfinite(t0) and np.isfinite(t1) and t1 > t0):
        raise ValueError("need finite t1 > t0")
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError("need finite dt > 0")
    span = t1 - t0
    n = max(1, math.ceil(span / dt - 1e-9))
    h = span / n
    y = np.array(y0, copy=True)
    check_finite(y, "y0")
    out = np.empty((n + 1,) + y.shape, dtype=y.dtype)
    times = t0 + h * np.arange(n + 1)
    times[-1] = t1
    out[0] = y
    for k in range(n):
        t = t0 + k * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"state became non-finite at t={t + h:.6g}")
        out[k + 1] = y
    return times, out
