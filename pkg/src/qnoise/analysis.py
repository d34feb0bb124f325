"""Decay-rate fitting, regime expansions and dephasing-channel comparisons."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from qnoise.averaging import (
    FinalStateCoeffs,
    NoiseModel,
    QuadratureSpec,
    final_state,
    final_state_coeffs,
    log_time_grid,
)
from qnoise.closed_form import NoiseCoordinates
from qnoise.errors import DomainError, FloorReachedError, InsufficientOscillationError
from qnoise.noise import Family, NoiseDensity
from qnoise.qubit import (
    DensityMatrix,
    dephase,
    dephase_delocalized,
    frobenius_distance,
)
from qnoise.series import DecaySeries

_logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (1e2, 1e4)
MIN_ENVELOPE_INPUT = 20
MIN_ENVELOPE_POINTS = 5
FLOOR_MARGIN = 10.0
REGIME_THRESHOLD = 0.25
FOURIER_FLOOR = 1e-14


@dataclass(frozen=True)
class RateFit:
    """Least-squares power law d(t) ~ exp(intercept) * t^(-exponent)."""

    exponent: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_envelope_points: int
    stderr: float = 0.0
    flags: tuple[str, ...] = ()

    @property
    def is_valid(self) -> bool:
        return self.n_envelope_points >= MIN_ENVELOPE_POINTS and (
            "raw-series" not in self.flags
        )


def envelope(series: DecaySeries) -> DecaySeries:
    """Strict interior local maxima of the deviations, in order."""
    if len(series) < MIN_ENVELOPE_INPUT:
        msg = f"Need at least {MIN_ENVELOPE_INPUT} points, got {len(series)}"
        raise DomainError(msg)

    d = series.deviations
    mask = np.zeros(len(d), dtype=bool)
    mask[1:-1] = (d[1:-1] > d[:-2]) & (d[1:-1] > d[2:])
    count = int(mask.sum())
    if count < MIN_ENVELOPE_POINTS:
        msg = f"Insufficient oscillation: {count} local maxima"
        raise InsufficientOscillationError(msg)
    return series.select(mask)


def fit_power_law(
    series: DecaySeries,
    window: tuple[float, float] = DEFAULT_WINDOW,
) -> RateFit:
    """Fit the decay exponent of the envelope of `series` inside `window`.

    Falls back to the raw points (flagged) when the series does not oscillate.
    Points whose deviation is not clearly above its error estimate end the
    usable range.
    """
    in_window = series.window(*window)
    flags: list[str] = []
    try:
        candidates = envelope(in_window)
    except (InsufficientOscillationError, DomainError):
        _logger.debug("No usable envelope in %s; fitting raw points", window)
        candidates = in_window
        flags.append("raw-series")

    above = candidates.deviations > FLOOR_MARGIN * candidates.error_estimates
    above &= candidates.deviations > 0.0
    if not above.all():
        first_bad = int(np.argmin(above))
        usable = candidates.select(np.arange(len(candidates)) < first_bad)
        usable_window = (
            (float(usable.times[0]), float(usable.times[-1])) if len(usable) else None
        )
        if len(usable) < MIN_ENVELOPE_POINTS:
            msg = f"Deviations reach the error floor; usable window {usable_window}"
            raise FloorReachedError(msg, usable_window)
        candidates = usable
        flags.append("floor-truncated")

    if len(candidates) < 2:
        msg = f"Too few points in window {window} to fit a power law"
        raise DomainError(msg)

    result = stats.linregress(np.log(candidates.times), np.log(candidates.deviations))
    fit = RateFit(
        exponent=-float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue**2),
        window=(float(window[0]), float(window[1])),
        n_envelope_points=len(candidates),
        stderr=float(result.stderr),
        flags=tuple(flags),
    )
    _logger.debug("Power-law fit: %s", fit)
    return fit


def fourier_decay_series(
    density: NoiseDensity,
    window: tuple[float, float],
    points_per_decade: int,
    scale: float = 1.0,
) -> DecaySeries:
    """|fourier(scale * t)| on a log grid, with a roundoff floor as error."""
    times = log_time_grid(window[0], window[1], points_per_decade)
    values = np.array([abs(density.fourier(scale * t)) for t in times])
    return DecaySeries(times, values, np.full(len(times), FOURIER_FLOOR))


def fourier_decay_fit(
    density: NoiseDensity,
    window: tuple[float, float],
    points_per_decade: int,
    scale: float = 1.0,
) -> RateFit:
    """Envelope exponent of the density's Fourier transform."""
    return fit_power_law(
        fourier_decay_series(density, window, points_per_decade, scale),
        window,
    )


def nominal_fourier_exponent(density: NoiseDensity) -> float | None:
    """Power-law decay rate of |fourier| implied by the family's singularities.

    None when the transform does not decay polynomially (point mass, or a
    density smooth everywhere).
    """
    if density.family in (Family.ZERO, Family.SMOOTH_BUMP):
        return None
    rate = density.n + 1
    if density.family is Family.IR_POLY_BUMP and density.k % 2 == 1:
        rate = min(rate, density.k + 1)
    return float(rate)


class Regime(str, Enum):
    WEAK = "weak"
    STRONG = "strong"
    INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class RegimeReport:
    """Computed final-state coefficients next to their small-noise expansions."""

    regime: Regime
    nu1: float
    nu2: float
    computed: FinalStateCoeffs
    predicted: tuple[float, float, float] | None = None

    @property
    def nu(self) -> float | None:
        if self.regime is Regime.WEAK:
            return self.nu1
        if self.regime is Regime.STRONG:
            return self.nu2
        return None

    @property
    def residuals(self) -> tuple[float, float, float] | None:
        if self.predicted is None:
            return None
        c = self.computed
        pa, pb, pg = self.predicted
        return c.alpha - pa, c.beta - pb, c.gamma - pg


def weak_parameter(model: NoiseModel) -> float:
    return (model.eta_o / model.eps) / (1.0 - model.eta_d / model.eps)


def strong_parameter(model: NoiseModel) -> float:
    gap = model.mu_o.min_abs_support
    return model.eps / gap if gap > 0 else float("inf")


def classify(model: NoiseModel) -> Regime:
    if weak_parameter(model) < REGIME_THRESHOLD:
        return Regime.WEAK
    if strong_parameter(model) < REGIME_THRESHOLD:
        return Regime.STRONG
    return Regime.INTERMEDIATE


def weak_predictions(model: NoiseModel) -> tuple[float, float, float]:
    """Leading-order coefficients when the off-diagonal noise is small."""
    eps, mu_o, mu_d = model.eps, model.mu_o, model.mu_d
    alpha = 2.0 * mu_o.moment(2) / eps**2 * mu_d.scaled_inverse_moment(eps, 2)
    gamma = -mu_o.moment(1) / eps * mu_d.scaled_inverse_moment(eps, 1)
    gamma += 4.0 * mu_o.moment(3) / eps**3 * mu_d.scaled_inverse_moment(eps, 3)
    return alpha, 1.0, gamma


def strong_predictions(model: NoiseModel) -> tuple[float, float, float]:
    """Leading-order coefficients when the off-diagonal noise dominates eps."""
    eps, mu_o, mu_d = model.eps, model.mu_o, model.mu_d
    beta = 0.25 * mu_o.inverse_power_moment(eps, 2)
    beta *= mu_d.scaled_inverse_moment(eps, -2)
    gamma = -0.25 * mu_o.inverse_power_moment(eps, 1)
    gamma *= mu_d.scaled_inverse_moment(eps, -1)
    return 0.5, beta, gamma


def regime_report(model: NoiseModel, spec: QuadratureSpec) -> RegimeReport:
    regime = classify(model)
    predicted = None
    if regime is Regime.WEAK:
        predicted = weak_predictions(model)
    elif regime is Regime.STRONG:
        predicted = strong_predictions(model)
    report = RegimeReport(
        regime=regime,
        nu1=weak_parameter(model),
        nu2=strong_parameter(model),
        computed=final_state_coeffs(model, spec),
        predicted=predicted,
    )
    _logger.info(
        "Regime %s (nu1=%.4g, nu2=%.4g), residuals %s",
        regime.value,
        report.nu1,
        report.nu2,
        report.residuals,
    )
    return report


@dataclass(frozen=True)
class DephasingDistances:
    """Distances from the final state to the fully dephased initial state."""

    energy_basis: float
    delocalized_basis: float

    def as_tuple(self) -> tuple[float, float]:
        return self.energy_basis, self.delocalized_basis


def dephasing_distance(
    model: NoiseModel,
    rho0: DensityMatrix,
    spec: QuadratureSpec,
) -> DephasingDistances:
    rho_bar = final_state(final_state_coeffs(model, spec), rho0)
    return DephasingDistances(
        frobenius_distance(rho_bar, dephase(rho0)),
        frobenius_distance(rho_bar, dephase_delocalized(rho0)),
    )


def heuristic_phase(coords: NoiseCoordinates) -> float:
    """Small-noise expansion of the oscillation frequency, to third order."""
    eps = coords.eps
    return eps * (1.0 + coords.y / eps + 2.0 * (coords.x / eps) ** 2)


def _stationary_point_rate(mu_o: NoiseDensity, rho0: DensityMatrix) -> float:
    """Decay contributed by the stationary point of the phase at x = 0."""
    # Without initial coherence the surviving amplitude is of order x^2.
    order = mu_o.infrared_order + (0 if rho0.rho12 != 0 else 2)
    return (order + 1) / 2


def predicted_rate(model: NoiseModel, rho0: DensityMatrix) -> float | None:
    """Heuristic sharp decay rate of the deviation, or None if not polynomial.

    An off-diagonal density with a gap at zero sets the rate alone through its
    Fourier transform. Otherwise the rate is the Fourier exponent of mu_d plus
    (k + m + 1) / 2 from the stationary point at x = 0, where k is the infrared
    order of mu_o and m is 0 for a coherent rho0, 2 for an incoherent one.
    None when the deviation vanishes identically or decays faster than any power.
    """
    mu_o, mu_d = model.mu_o, model.mu_d
    if rho0.rho12 == 0 and rho0.rho11 == 0.5:
        return None
    if not mu_o.is_point_mass and mu_o.min_abs_support > 0:
        return nominal_fourier_exponent(mu_o)
    if mu_o.is_point_mass:
        if mu_d.is_point_mass or rho0.rho12 == 0:
            return None
        return nominal_fourier_exponent(mu_d)

    rate = _stationary_point_rate(mu_o, rho0)
    if mu_d.is_point_mass:
        return rate
    diagonal = nominal_fourier_exponent(mu_d)
    return None if diagonal is None else diagonal + rate
