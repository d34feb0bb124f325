"""Closed-form evolution of a qubit for one frozen noise realization.

Everything is written in the bounded ratio R = P / (1 + sqrt(1 + P^2)), with
P = 2x / (eps + y). R is smooth on the whole real line and stays inside
(-1, 1), so the formulas need no special case near P = 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.special import binom

from qnoise.errors import DomainError
from qnoise.qubit import DensityMatrix

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class NoiseCoordinates:
    """A frozen realization: off-diagonal noise x, diagonal noise y, splitting eps."""

    x: float
    y: float
    eps: float


@dataclass(frozen=True)
class PhaseData:
    """Derived quantities of one realization.

    `phase` is the angular frequency of the oscillating terms, i.e. the gap
    between the two perturbed eigenvalues.
    """

    p: float
    r: float
    phase: float


def ratio(p: npt.ArrayLike) -> FloatArray:
    """Stable ratio R(P) = P / (1 + sqrt(1 + P^2)), vectorized."""
    p = np.asarray(p, dtype=np.float64)
    return p / (1.0 + np.hypot(1.0, p))


def phase_arrays(
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    eps: float,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Return (P, R, phase) broadcast over arrays of noise values."""
    x = np.asarray(x, dtype=np.float64)
    splitting = eps + np.asarray(y, dtype=np.float64)
    if eps <= 0 or np.any(splitting <= 0):
        msg = (
            f"Level splitting eps + y must stay positive (eps={eps}, "
            f"min eps + y={np.min(splitting)})"
        )
        raise DomainError(msg)

    p = 2.0 * x / splitting
    return p, ratio(p), np.hypot(splitting, 2.0 * x)


def phase_data(coords: NoiseCoordinates) -> PhaseData:
    p, r, phase = phase_arrays(coords.x, coords.y, coords.eps)
    return PhaseData(float(p), float(r), float(phase))


def _check_ratio(r: npt.ArrayLike) -> None:
    if np.any(np.abs(r) >= 1.0):
        msg = "The stable ratio R must satisfy |R| < 1"
        raise DomainError(msg)


def hg_functions(
    rho0: DensityMatrix,
    r: npt.ArrayLike,
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """Amplitudes (h, g1, g2) of the oscillating terms, as functions of R."""
    _check_ratio(r)
    r = np.asarray(r, dtype=np.float64)
    s = 2.0 * rho0.rho11 - 1.0
    r2 = r * r
    denom = (1.0 + r2) ** 2
    common = s * r + rho0.rho21 * r2 - rho0.rho12
    h = r * common / denom
    g1 = -common / denom
    g2 = r2 * (s * r - rho0.rho21 + rho0.rho12 * r2) / denom
    return h, g1, g2


def hg_functions_qform(
    rho0: DensityMatrix,
    p: float,
) -> tuple[complex, complex, complex]:
    """Evaluate (h, g1, g2) through Q = (1 + sqrt(1 + P^2)) / P directly.

    Independent of `hg_functions`; only meaningful away from P = 0 where Q
    has a pole.
    """
    if p == 0:
        msg = "Q has a pole at P = 0"
        raise DomainError(msg)

    q = (1.0 + np.hypot(1.0, p)) / p
    s = 2.0 * rho0.rho11 - 1.0
    denom = (1.0 + q * q) ** 2
    h = q * (s * q + rho0.rho21 - rho0.rho12 * q * q) / denom
    g1 = -q * q * (s * q + rho0.rho21 - rho0.rho12 * q * q) / denom
    g2 = (s * q - rho0.rho21 * q * q + rho0.rho12) / denom
    return complex(h), complex(g1), complex(g2)


def _series_mul(a: ComplexArray, b: ComplexArray, order: int) -> ComplexArray:
    return np.convolve(a, b)[: order + 1]


def _series_reciprocal(a: ComplexArray, order: int) -> ComplexArray:
    out = np.zeros(order + 1, dtype=np.complex128)
    out[0] = 1.0 / a[0]
    for k in range(1, order + 1):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][:k]) / a[0]
    return out


def hg_taylor_coefficients(rho0: DensityMatrix, order: int) -> ComplexArray:
    """Taylor coefficients in P of (h, g1, g2) at the origin, shape (3, order+1)."""
    n = order + 1
    sqrt_series = np.zeros(n, dtype=np.complex128)
    for k in range(0, order // 2 + 1):
        sqrt_series[2 * k] = binom(0.5, k)

    denom = sqrt_series.copy()
    denom[0] += 1.0
    p_series = np.zeros(n, dtype=np.complex128)
    if order >= 1:
        p_series[1] = 1.0
    r = _series_mul(p_series, _series_reciprocal(denom, order), order)
    r2 = _series_mul(r, r, order)
    r3 = _series_mul(r2, r, order)
    r4 = _series_mul(r2, r2, order)

    one = np.zeros(n, dtype=np.complex128)
    one[0] = 1.0
    inv_denom = _series_reciprocal(_series_mul(one + r2, one + r2, order), order)

    s = 2.0 * rho0.rho11 - 1.0
    common = s * r + rho0.rho21 * r2 - rho0.rho12 * one
    h = _series_mul(_series_mul(r, common, order), inv_denom, order)
    g1 = -_series_mul(common, inv_denom, order)
    g2 = _series_mul(s * r3 - rho0.rho21 * r2 + rho0.rho12 * r4, inv_denom, order)
    return np.vstack([h, g1, g2])


def hg_taylor(
    rho0: DensityMatrix,
    p: npt.ArrayLike,
    order: int,
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """Taylor polynomials of degree `order` of (h, g1, g2) evaluated at P."""
    coeffs = hg_taylor_coefficients(rho0, order)
    p = np.asarray(p, dtype=np.float64)
    h, g1, g2 = (np.polynomial.polynomial.polyval(p, c) for c in coeffs)
    return h, g1, g2


def stationary_coeffs(r: npt.ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Integrands (f_alpha, f_beta, f_gamma) of the final-state coefficients.

    Defined for |R| <= 1; at |R| = 1 the values are the limits (1/2, 0, 0).
    """
    r = np.asarray(r, dtype=np.float64)
    r2 = r * r
    denom = (1.0 + r2) ** 2
    f_alpha = 2.0 * r2 / denom
    f_beta = (1.0 - r2) ** 2 / denom
    f_gamma = r * (r2 - 1.0) / denom
    return f_alpha, f_beta, f_gamma


def stationary_arrays(
    rho0: DensityMatrix,
    r: npt.ArrayLike,
) -> tuple[FloatArray, FloatArray]:
    """Time-independent part (rho11, rho12) of the evolved state."""
    f_alpha, f_beta, f_gamma = stationary_coeffs(r)
    re12 = rho0.rho12.real
    rho11 = f_alpha + f_beta * rho0.rho11 - 2.0 * f_gamma * re12
    rho12 = f_gamma * (1.0 - 2.0 * rho0.rho11) + 2.0 * f_alpha * re12
    return rho11, rho12


def oscillatory_arrays(
    rho0: DensityMatrix,
    r: npt.ArrayLike,
    phase: npt.ArrayLike,
    t: float,
) -> tuple[FloatArray, ComplexArray]:
    """Oscillating part (rho11, rho12) of the evolved state at time t."""
    h, g1, g2 = hg_functions(rho0, r)
    rotation = np.exp(-1j * t * np.asarray(phase))
    rho11 = 2.0 * (rotation * h).real
    rho12 = rotation * g1 + rotation.conj() * g2
    return rho11, rho12


def rho_t_arrays(
    rho0: DensityMatrix,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    eps: float,
    t: float,
) -> tuple[FloatArray, ComplexArray]:
    """Evolved (rho11, rho12) broadcast over arrays of noise values."""
    if t < 0:
        msg = f"Evolution time must be nonnegative, got {t}"
        raise DomainError(msg)

    _, r, phase = phase_arrays(x, y, eps)
    s11, s12 = stationary_arrays(rho0, r)
    o11, o12 = oscillatory_arrays(rho0, r, phase, t)
    return s11 + o11, s12 + o12


def rho_t(rho0: DensityMatrix, coords: NoiseCoordinates, t: float) -> DensityMatrix:
    """State at time t for one frozen realization."""
    rho11, rho12 = rho_t_arrays(rho0, coords.x, coords.y, coords.eps, t)
    return DensityMatrix(float(rho11), complex(rho12))
