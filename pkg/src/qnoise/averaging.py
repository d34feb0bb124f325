"""Noise averages of the evolved state and the exact final state."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import numpy.typing as npt

from qnoise.closed_form import (
    FloatArray,
    oscillatory_arrays,
    phase_arrays,
    ratio,
    rho_t_arrays,
    stationary_coeffs,
)
from qnoise.errors import ConvergenceError, DomainError
from qnoise.noise import NoiseDensity
from qnoise.qubit import DensityMatrix, frobenius_distance
from qnoise.series import DecaySeries

_logger = logging.getLogger(__name__)

MIN_PANELS = 8
COEFF_PANELS = 32
REFINEMENT_ORDER_STEP = 6
COEFF_TOLERANCE = 1e-9
SERIES_TOLERANCE = 1e-8
CHUNK_POINTS = 1 << 21
ERROR_MARGIN = 10.0

Integrand = Callable[[FloatArray, FloatArray], Sequence[npt.NDArray[np.generic]]]


@dataclass(frozen=True)
class NoiseModel:
    """Bohr energy plus off-diagonal (mu_o) and diagonal (mu_d) noise densities."""

    eps: float
    mu_o: NoiseDensity
    mu_d: NoiseDensity

    def __post_init__(self) -> None:
        if not self.eps > 0:
            msg = f"Bohr energy must be positive, got {self.eps}"
            raise DomainError(msg)
        if self.mu_d.extent >= self.eps:
            msg = (
                f"Diagonal noise support reaches {self.mu_d.extent}, which is not "
                f"below the Bohr energy {self.eps}"
            )
            raise DomainError(msg)

    @property
    def eta_o(self) -> float:
        return self.mu_o.extent

    @property
    def eta_d(self) -> float:
        return self.mu_d.extent

    @property
    def q_max(self) -> float:
        return math.sqrt(1.0 + (2.0 * self.eta_o / (self.eps - self.eta_d)) ** 2)

    @property
    def is_deterministic(self) -> bool:
        return self.mu_o.is_point_mass and self.mu_d.is_point_mass


class Mode(str, Enum):
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class QuadratureSpec:
    """How expectations over the noise are computed."""

    base_order: int = 12
    panels_per_unit_phase: float = 0.5
    tolerance: float = SERIES_TOLERANCE
    mode: Mode = Mode.QUADRATURE
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.base_order < 4:
            msg = f"base_order must be at least 4, got {self.base_order}"
            raise DomainError(msg)
        if not self.tolerance > 0:
            msg = f"tolerance must be positive, got {self.tolerance}"
            raise DomainError(msg)
        if self.samples < 1:
            msg = f"samples must be at least 1, got {self.samples}"
            raise DomainError(msg)

    def panels(self, model: NoiseModel, t: float) -> int:
        """Panels per axis needed to resolve the phase at time t."""
        phase_span = t * (model.eps + model.eta_d) * model.q_max
        return max(MIN_PANELS, math.ceil(self.panels_per_unit_phase * phase_span))


@dataclass(frozen=True)
class AveragedState:
    """An averaged state with per-entry errors for (rho11, Re rho12, Im rho12).

    In quadrature mode the errors are refinement differences; in Monte Carlo
    mode they are standard errors.
    """

    rho: DensityMatrix
    error: tuple[float, float, float]
    nodes: int

    @property
    def max_error(self) -> float:
        return max(self.error)


@dataclass(frozen=True)
class FinalStateCoeffs:
    """Coefficients of the affine map from the initial to the final state."""

    alpha: float
    beta: float
    gamma: float
    error_estimate: float = 0.0

    @property
    def identity_residual(self) -> float:
        return abs(self.beta + 2.0 * self.alpha - 1.0)


def _integrate(
    model: NoiseModel,
    integrand: Integrand,
    panels: int,
    order: int,
) -> npt.NDArray[np.complex128]:
    """Tensor-product quadrature of each integrand output, summed in fixed order."""
    xs, wx = model.mu_o.quadrature(panels, order)
    ys, wy = model.mu_d.quadrature(panels, order)
    rows = max(1, CHUNK_POINTS // len(ys))
    partials = []
    for start in range(0, len(xs), rows):
        block = slice(start, start + rows)
        values = integrand(xs[block, None], ys[None, :])
        partials.append([wx[block] @ (np.asarray(v) @ wy) for v in values])
    return np.sum(np.array(partials, dtype=np.complex128), axis=0)


def _refined_integrate(
    model: NoiseModel,
    integrand: Integrand,
    panels: int,
    spec: QuadratureSpec,
) -> tuple[npt.NDArray[np.complex128], npt.NDArray[np.float64]]:
    """Integrate at base_order and base_order + 6; keep the finer result."""
    coarse = _integrate(model, integrand, panels, spec.base_order)
    fine = _integrate(
        model,
        integrand,
        panels,
        spec.base_order + REFINEMENT_ORDER_STEP,
    )
    diff = fine - coarse
    errors = np.concatenate([np.abs(diff.real), np.abs(diff.imag)])
    achieved = float(errors.max())
    _logger.debug("Quadrature: %d panels/axis, refinement diff %.3g", panels, achieved)
    if achieved >= spec.tolerance:
        msg = (
            f"Quadrature did not converge: refinement difference {achieved:.3g} "
            f"exceeds tolerance {spec.tolerance:.3g}; increase panels_per_unit_phase"
        )
        raise ConvergenceError(msg, achieved)
    return fine, errors


def _state_integrand(rho0: DensityMatrix, eps: float, t: float) -> Integrand:
    def integrand(x: FloatArray, y: FloatArray) -> tuple[FloatArray, FloatArray]:
        return rho_t_arrays(rho0, x, y, eps, t)

    return integrand


def _grid_size(model: NoiseModel, panels: int, order: int) -> int:
    nx = len(model.mu_o.quadrature(panels, order)[0])
    return nx * len(model.mu_d.quadrature(panels, order)[0])


def monte_carlo_samples(
    model: NoiseModel,
    spec: QuadratureSpec,
) -> tuple[FloatArray, FloatArray]:
    """Paired (x, y) samples, one independent stream per axis from spec.seed."""
    seed_x, seed_y = np.random.SeedSequence(spec.seed).generate_state(2)
    return (
        model.mu_o.sample(int(seed_x), spec.samples),
        model.mu_d.sample(int(seed_y), spec.samples),
    )


def _monte_carlo_average(
    model: NoiseModel,
    rho0: DensityMatrix,
    t: float,
    samples: tuple[FloatArray, FloatArray],
) -> AveragedState:
    xs, ys = samples
    rho11, rho12 = rho_t_arrays(rho0, xs, ys, model.eps, t)
    count = len(xs)

    def stderr(values: FloatArray) -> float:
        return float(np.std(values, ddof=1) / math.sqrt(count)) if count > 1 else 0.0

    return AveragedState(
        DensityMatrix(float(np.mean(rho11)), complex(np.mean(rho12))),
        (stderr(rho11), stderr(rho12.real), stderr(rho12.imag)),
        count,
    )


def expected_rho(
    model: NoiseModel,
    rho0: DensityMatrix,
    t: float,
    spec: QuadratureSpec,
    samples: tuple[FloatArray, FloatArray] | None = None,
) -> AveragedState:
    """Noise average of the evolved state at time t.

    In Monte Carlo mode, pass `samples` to reuse the same draws across times.
    """
    if t < 0:
        msg = f"Evolution time must be nonnegative, got {t}"
        raise DomainError(msg)

    if spec.mode is Mode.MONTE_CARLO:
        return _monte_carlo_average(
            model,
            rho0,
            t,
            samples or monte_carlo_samples(model, spec),
        )

    panels = spec.panels(model, t)
    values, errors = _refined_integrate(
        model,
        _state_integrand(rho0, model.eps, t),
        panels,
        spec,
    )
    rho11, rho12 = values
    return AveragedState(
        DensityMatrix(float(rho11.real), complex(rho12)),
        (float(errors[0]), float(errors[1]), float(errors[3])),
        _grid_size(model, panels, spec.base_order + REFINEMENT_ORDER_STEP),
    )


def oscillatory_average(
    model: NoiseModel,
    rho0: DensityMatrix,
    t: float,
    spec: QuadratureSpec,
) -> tuple[float, complex]:
    """Noise average of the oscillating terms alone, as (rho11, rho12) parts."""

    def integrand(x: FloatArray, y: FloatArray) -> tuple[FloatArray, FloatArray]:
        _, r, phase = phase_arrays(x, y, model.eps)
        return oscillatory_arrays(rho0, r, phase, t)

    values, _ = _refined_integrate(model, integrand, spec.panels(model, t), spec)
    return float(values[0].real), complex(values[1])


def final_state_coeffs(model: NoiseModel, spec: QuadratureSpec) -> FinalStateCoeffs:
    """E[f_alpha], E[f_beta], E[f_gamma] by quadrature.

    The integrand does not oscillate, so a fixed panel count suffices and the
    result is deterministic in every mode.
    """
    coeff_spec = replace(spec, tolerance=min(spec.tolerance, COEFF_TOLERANCE))

    def integrand(x: FloatArray, y: FloatArray) -> tuple[FloatArray, ...]:
        p = 2.0 * x / (model.eps + y)
        return stationary_coeffs(ratio(p))

    values, errors = _refined_integrate(model, integrand, COEFF_PANELS, coeff_spec)
    alpha, beta, gamma = (float(v.real) for v in values)
    return FinalStateCoeffs(alpha, beta, gamma, float(errors.max()))


def final_state(
    coeffs: FinalStateCoeffs,
    rho0: DensityMatrix,
    tolerance: float = COEFF_TOLERANCE,
) -> DensityMatrix:
    """Large-time limit of the averaged state for the given coefficients."""
    re12 = rho0.rho12.real
    rho_bar = DensityMatrix(
        coeffs.alpha + coeffs.beta * rho0.rho11 - 2.0 * coeffs.gamma * re12,
        complex(coeffs.gamma * (1.0 - 2.0 * rho0.rho11) + 2.0 * coeffs.alpha * re12),
    )
    if not rho_bar.is_positive(atol=tolerance):
        msg = f"Final state {rho_bar} is not positive; inconsistent {coeffs}"
        raise DomainError(msg)
    return rho_bar


def log_time_grid(t_min: float, t_max: float, points_per_decade: int) -> FloatArray:
    if not 0 < t_min < t_max:
        msg = f"Need 0 < t_min < t_max, got [{t_min}, {t_max}]"
        raise DomainError(msg)
    decades = math.log10(t_max / t_min)
    count = max(2, math.ceil(decades * points_per_decade) + 1)
    return np.logspace(math.log10(t_min), math.log10(t_max), count)


def _is_non_convergent(deviations: FloatArray) -> bool:
    if len(deviations) < 8 or deviations.max() <= 0.0:
        return False
    quarter = len(deviations) // 4
    return bool(deviations[-quarter:].max() >= deviations[:quarter].max() * (1 - 1e-6))


def deviation_series(
    model: NoiseModel,
    rho0: DensityMatrix,
    times: npt.ArrayLike,
    spec: QuadratureSpec,
    threads: int = 1,
) -> DecaySeries:
    """Distance of the averaged state from the final state along `times`."""
    times = np.asarray(times, dtype=np.float64)
    if len(times) == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        msg = "The time grid must be nonnegative and strictly increasing"
        raise DomainError(msg)

    coeffs = final_state_coeffs(model, spec)
    rho_bar = final_state(coeffs, rho0)
    samples = None
    if spec.mode is Mode.MONTE_CARLO:
        samples = monte_carlo_samples(model, spec)

    def point(t: float) -> AveragedState:
        return expected_rho(model, rho0, t, spec, samples)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        states = list(pool.map(point, times))

    dev11 = np.array([s.rho.rho11 - rho_bar.rho11 for s in states])
    dev12 = np.array([s.rho.rho12 - rho_bar.rho12 for s in states])
    deviations = np.array([frobenius_distance(s.rho, rho_bar) for s in states])
    errors = np.array([s.max_error for s in states]) + coeffs.error_estimate

    series = DecaySeries(
        times=times,
        deviations=deviations,
        error_estimates=errors,
        dev_rho11=dev11,
        dev_re_rho12=dev12.real,
        dev_im_rho12=dev12.imag,
    )
    if np.any(errors * ERROR_MARGIN > deviations):
        _logger.warning(
            "Error estimates are not %gx below the deviation at %d of %d times",
            ERROR_MARGIN,
            int(np.sum(errors * ERROR_MARGIN > deviations)),
            len(times),
        )
        series = series.with_flag("error-not-resolved")
    if _is_non_convergent(deviations):
        _logger.warning("Deviation does not decay: the series is non-convergent")
        series = series.with_flag("non-convergent")
    return series
