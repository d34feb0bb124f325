"""Built-in invariant and convergence suite behind `qnoise validate`."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from qnoise.analysis import (
    DephasingDistances,
    dephasing_distance,
    fit_power_law,
    fourier_decay_fit,
    nominal_fourier_exponent,
    predicted_rate,
    strong_predictions,
    weak_predictions,
)
from qnoise.averaging import (
    Mode,
    NoiseModel,
    QuadratureSpec,
    deviation_series,
    expected_rho,
    final_state_coeffs,
    log_time_grid,
)
from qnoise.closed_form import NoiseCoordinates, rho_t
from qnoise.errors import LabError
from qnoise.noise import NoiseDensity
from qnoise.qubit import DensityMatrix, FrozenHamiltonian, evolve_oracle, purity
from qnoise.series import DecaySeries

_logger = logging.getLogger(__name__)

ORACLE_TUPLES = 10_000
ORACLE_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-9
EVEN_GAMMA_TOLERANCE = 1e-10

RATE_WINDOW = (1e2, 1e3)
RATE_POINTS_PER_DECADE = 3000
RATE_TOLERANCE = 0.3
OFF_DIAGONAL_TOLERANCE = 0.25
HEURISTIC_RANGE = (0.35, 0.75)
TWO_NOISE_WINDOW = (30.0, 150.0)
TWO_NOISE_SPACING = 0.5

WEAK_ALPHA_SHRINK = 8.0
WEAK_BETA_SHRINK = 3.0
STRONG_ALPHA_SHRINK = 3.0
STRONG_BETA_SHRINK = 1.7
DEPHASING_SAFETY = 2.0

MC_SAMPLES = 1_000_000
MC_SIGMAS = 3.0

EPS = 1.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail}"


def model_matrix() -> list[NoiseModel]:
    """Twelve models covering every density family and all three regimes."""
    pb, ir = NoiseDensity.poly_bump, NoiseDensity.ir_poly_bump
    smooth, zero = NoiseDensity.smooth_bump, NoiseDensity.zero
    pairs = [
        (zero(), pb(1, 0.5)),
        (pb(0, 0.5), pb(0, 0.5)),
        (pb(2, 0.3), pb(2, 0.4)),
        (pb(3, 1.0), pb(1, 0.5)),
        (smooth(0.5), smooth(0.5)),
        (ir(1, 2, 1.0), zero()),
        (ir(3, 2, 1.0), pb(2, 0.3)),
        (ir(2, 1, 0.5), smooth(0.2)),
        (NoiseDensity.shifted_bump(20.0, 1.0, 2), pb(2, 0.4)),
        (NoiseDensity.shifted_bump(5.0, 2.0, 1), zero()),
        (NoiseDensity.symmetric_shifted_bump(10.0, 1.0, 2), pb(1, 0.3)),
        (pb(2, 0.05), pb(2, 0.5)),
    ]
    return [NoiseModel(EPS, mu_o, mu_d) for mu_o, mu_d in pairs]


def random_state(rng: np.random.Generator) -> DensityMatrix:
    rho11 = rng.uniform()
    radius = math.sqrt(rho11 * (1.0 - rho11)) * rng.uniform()
    return DensityMatrix(rho11, radius * np.exp(1j * rng.uniform(0, 2 * math.pi)))


def random_realizations(
    count: int,
    seed: int = 0,
) -> list[tuple[NoiseCoordinates, DensityMatrix, float]]:
    """Random (frozen noise, initial state, time) triples with eps + y > 0."""
    rng = np.random.default_rng(seed)
    triples = []
    for _ in range(count):
        eps = rng.uniform(0.1, 3.0)
        coords = NoiseCoordinates(
            x=rng.uniform(-2.0, 2.0) * eps,
            y=rng.uniform(-0.9, 2.0) * eps,
            eps=eps,
        )
        triples.append((coords, random_state(rng), rng.uniform(0.0, 50.0)))
    return triples


def entry_distance(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    return max(abs(rho_a.rho11 - rho_b.rho11), abs(rho_a.rho12 - rho_b.rho12))


def check_oracle_equivalence(count: int = ORACLE_TUPLES) -> CheckResult:
    worst = 0.0
    for coords, rho0, t in random_realizations(count):
        hamiltonian = FrozenHamiltonian.from_noise(coords.x, coords.y, coords.eps)
        oracle = evolve_oracle(hamiltonian, rho0, t)
        worst = max(worst, entry_distance(rho_t(rho0, coords, t), oracle))
    return CheckResult(
        "oracle equivalence",
        worst < ORACLE_TOLERANCE,
        f"max entry error {worst:.2e} over {count} realizations",
    )


def check_realization_invariants(count: int = ORACLE_TUPLES) -> CheckResult:
    """Identity at t = 0, then Hermiticity, positivity and purity along t."""
    worst = 0.0
    for coords, rho0, t in random_realizations(count, seed=1):
        worst = max(worst, entry_distance(rho_t(rho0, coords, 0.0), rho0))
        rho = rho_t(rho0, coords, t)
        matrix = rho.as_array()
        worst = max(
            worst,
            abs(np.trace(matrix) - 1.0),
            float(np.abs(matrix - matrix.conj().T).max()),
            abs(purity(rho) - purity(rho0)),
        )
        if not rho.is_positive(atol=ORACLE_TOLERANCE):
            return CheckResult("realization invariants", False, f"{rho} not positive")
    return CheckResult(
        "realization invariants",
        worst < ORACLE_TOLERANCE,
        f"max violation {worst:.2e} over {count} realizations",
    )


def check_final_state_identity(spec: QuadratureSpec | None = None) -> CheckResult:
    spec = spec or QuadratureSpec()
    worst_identity, worst_gamma = 0.0, 0.0
    for model in model_matrix():
        coeffs = final_state_coeffs(model, spec)
        worst_identity = max(worst_identity, coeffs.identity_residual)
        if model.mu_o.is_even:
            worst_gamma = max(worst_gamma, abs(coeffs.gamma))
    return CheckResult(
        "final-state identity",
        worst_identity < IDENTITY_TOLERANCE and worst_gamma < EVEN_GAMMA_TOLERANCE,
        f"max |beta + 2 alpha - 1| {worst_identity:.2e}, "
        f"max |gamma| for even mu_o {worst_gamma:.2e}",
    )


def _rate_times(points_per_decade: int) -> np.ndarray:
    return log_time_grid(*RATE_WINDOW, points_per_decade)


def check_diagonal_rate(
    n: int,
    points_per_decade: int = RATE_POINTS_PER_DECADE,
    threads: int = 4,
) -> CheckResult:
    """Diagonal noise of class C^n must decay at least like t^-n.

    With no off-diagonal noise the coherence deviation is exactly
    sqrt(2)|rho12||fourier(mu_d)|, so the density's own transform is the oracle.
    """
    mu_d = NoiseDensity.poly_bump(n + 1, 0.4)
    model = NoiseModel(EPS, NoiseDensity.zero(), mu_d)
    rho0 = DensityMatrix.pure(math.pi / 2)
    series = deviation_series(
        model,
        rho0,
        _rate_times(points_per_decade),
        QuadratureSpec(),
        threads=threads,
    )
    fit = fit_power_law(series, RATE_WINDOW)
    oracle = fourier_decay_fit(mu_d, RATE_WINDOW, points_per_decade)
    passed = fit.exponent >= n - RATE_TOLERANCE
    passed &= abs(fit.exponent - oracle.exponent) <= RATE_TOLERANCE
    return CheckResult(
        f"diagonal decay rate (C^{n})",
        passed,
        f"exponent {fit.exponent:.3f}, Fourier oracle {oracle.exponent:.3f}, "
        f"bound {n}",
    )


def check_two_noise_rate(
    n: int,
    window: tuple[float, float] = TWO_NOISE_WINDOW,
    spacing: float = TWO_NOISE_SPACING,
    threads: int = 4,
) -> CheckResult:
    """Diagonal noise of class C^n next to off-diagonal noise: still at least t^-n.

    Each point is a full 2D average whose cost grows like t^2, so the series is
    a linear grid on a short window. The Fourier oracle of mu_d and the
    heuristic rate are reported alongside the measured exponent.
    """
    mu_d = NoiseDensity.poly_bump(n + 1, 0.4)
    model = NoiseModel(EPS, NoiseDensity.poly_bump(2, 0.3), mu_d)
    rho0 = DensityMatrix.pure(math.pi / 2)
    times = np.arange(window[0], window[1] + spacing / 2, spacing)
    series = deviation_series(model, rho0, times, QuadratureSpec(), threads=threads)
    fit = fit_power_law(series, window)
    oracle = fourier_decay_fit(mu_d, RATE_WINDOW, RATE_POINTS_PER_DECADE)
    predicted = predicted_rate(model, rho0)
    _logger.info(
        "Two-noise exponent %.3f (Fourier oracle %.3f, heuristic %s)",
        fit.exponent,
        oracle.exponent,
        predicted,
    )
    return CheckResult(
        f"two-noise decay rate (C^{n})",
        fit.exponent >= n - RATE_TOLERANCE,
        f"exponent {fit.exponent:.3f}, Fourier oracle {oracle.exponent:.3f}, "
        f"heuristic {predicted}, bound {n}",
    )


def check_off_diagonal_rate(
    mu_o: NoiseDensity,
    points_per_decade: int = RATE_POINTS_PER_DECADE,
    threads: int = 4,
) -> CheckResult:
    """Purely off-diagonal noise: decay at least like t^-(k+1)/2, or t^-1 at k = 0."""
    model = NoiseModel(EPS, mu_o, NoiseDensity.zero())
    k = mu_o.infrared_order
    bound = 1.0 if k == 0 else (k + 1) / 2
    series = deviation_series(
        model,
        DensityMatrix(1.0),
        _rate_times(points_per_decade),
        QuadratureSpec(),
        threads=threads,
    )
    fit = fit_power_law(series, RATE_WINDOW)
    return CheckResult(
        f"off-diagonal decay rate ({mu_o})",
        fit.exponent >= bound - OFF_DIAGONAL_TOLERANCE,
        f"exponent {fit.exponent:.3f}, bound {bound}",
    )


def coherence_series(series: DecaySeries) -> DecaySeries:
    """The same series with |rho12 - rho12_bar| as the deviation."""
    return DecaySeries(
        series.times,
        np.hypot(series.dev_re_rho12, series.dev_im_rho12),
        series.error_estimates,
    )


def check_heuristic_rate(
    points_per_decade: int = RATE_POINTS_PER_DECADE,
    threads: int = 4,
) -> CheckResult:
    """Coherences under slow off-diagonal noise decay like t^-1/2."""
    model = NoiseModel(EPS, NoiseDensity.poly_bump(2, 1.0), NoiseDensity.zero())
    series = deviation_series(
        model,
        DensityMatrix.pure(math.pi / 2),
        _rate_times(points_per_decade),
        QuadratureSpec(),
        threads=threads,
    )
    fit = fit_power_law(coherence_series(series), RATE_WINDOW)
    _logger.info("Coherence decay exponent %.3f (heuristic 0.5)", fit.exponent)
    lo, hi = HEURISTIC_RANGE
    return CheckResult(
        "heuristic coherence rate",
        lo <= fit.exponent <= hi,
        f"exponent {fit.exponent:.3f}, expected in [{lo}, {hi}]",
    )


def check_fourier_decay(
    density: NoiseDensity,
    points_per_decade: int = RATE_POINTS_PER_DECADE,
) -> CheckResult:
    nominal = nominal_fourier_exponent(density)
    fit = fourier_decay_fit(density, RATE_WINDOW, points_per_decade)
    passed = nominal is not None and abs(fit.exponent - nominal) <= RATE_TOLERANCE
    return CheckResult(
        f"Fourier decay ({density})",
        passed,
        f"exponent {fit.exponent:.3f}, nominal {nominal}",
    )


def weak_model(nu1: float) -> NoiseModel:
    """Weak off-diagonal noise with the given small parameter."""
    eta_d = 0.2
    mu_o = NoiseDensity.poly_bump(2, nu1 * (EPS - eta_d))
    return NoiseModel(EPS, mu_o, NoiseDensity.poly_bump(2, eta_d))


def strong_model(nu2: float) -> NoiseModel:
    """Off-diagonal noise of unit width centred at distance eps / nu2 + 1."""
    mu_o = NoiseDensity.shifted_bump(EPS / nu2 + 1.0, 1.0, 2)
    return NoiseModel(EPS, mu_o, NoiseDensity.poly_bump(2, 0.2))


def check_weak_expansion(spec: QuadratureSpec | None = None) -> CheckResult:
    spec = spec or QuadratureSpec()
    alpha_res, beta_res = [], []
    for nu1 in (0.1, 0.05):
        model = weak_model(nu1)
        coeffs = final_state_coeffs(model, spec)
        alpha_lead, _, _ = weak_predictions(model)
        alpha_res.append(abs(coeffs.alpha - alpha_lead))
        beta_res.append(abs(coeffs.beta - 1.0))
    alpha_ratio = alpha_res[0] / alpha_res[1]
    beta_ratio = beta_res[0] / beta_res[1]
    return CheckResult(
        "weak-noise expansion",
        alpha_ratio >= WEAK_ALPHA_SHRINK and beta_ratio >= WEAK_BETA_SHRINK,
        f"alpha residual shrinks {alpha_ratio:.2f}x, beta {beta_ratio:.2f}x",
    )


def check_strong_expansion(spec: QuadratureSpec | None = None) -> CheckResult:
    spec = spec or QuadratureSpec()
    alpha_res, beta_res = [], []
    for nu2 in (0.1, 0.05):
        model = strong_model(nu2)
        coeffs = final_state_coeffs(model, spec)
        _, beta_lead, _ = strong_predictions(model)
        alpha_res.append(abs(coeffs.alpha - 0.5))
        beta_res.append(abs(coeffs.beta - beta_lead))
    alpha_ratio = alpha_res[0] / alpha_res[1]
    beta_ratio = beta_res[0] / beta_res[1]
    return CheckResult(
        "strong-noise expansion",
        alpha_ratio >= STRONG_ALPHA_SHRINK and beta_ratio >= STRONG_BETA_SHRINK,
        f"|alpha - 1/2| shrinks {alpha_ratio:.2f}x, beta residual {beta_ratio:.2f}x",
    )


def dephasing_constant(distance_at_calibration: float, nu: float = 0.1) -> float:
    return DEPHASING_SAFETY * distance_at_calibration / nu


def check_dephasing_limits(spec: QuadratureSpec | None = None) -> CheckResult:
    """Distance to the dephased state is O(nu) in both regimes.

    C is calibrated at nu = 0.1 and verified at nu = 0.05.
    """
    spec = spec or QuadratureSpec()
    rho0 = DensityMatrix.pure(math.pi / 3)

    def distances(nu: float) -> tuple[DephasingDistances, DephasingDistances]:
        return (
            dephasing_distance(weak_model(nu), rho0, spec),
            dephasing_distance(strong_model(nu), rho0, spec),
        )

    weak_cal, strong_cal = distances(0.1)
    weak_half, strong_half = distances(0.05)
    c_weak = dephasing_constant(weak_cal.energy_basis)
    c_strong = dephasing_constant(strong_cal.delocalized_basis)
    passed = weak_half.energy_basis <= c_weak * 0.05
    passed &= strong_half.delocalized_basis <= c_strong * 0.05
    return CheckResult(
        "dephasing limits",
        passed,
        f"weak {weak_half.energy_basis:.3g} <= {c_weak * 0.05:.3g}, "
        f"strong {strong_half.delocalized_basis:.3g} <= {c_strong * 0.05:.3g}",
    )


def check_monte_carlo_agreement(
    samples: int = MC_SAMPLES,
    sigmas: float = MC_SIGMAS,
    seed: int = 0,
) -> CheckResult:
    """Quadrature and Monte Carlo agree within a few standard errors."""
    rng = np.random.default_rng(seed)
    models = model_matrix()
    worst = 0.0
    for index in (2, 3, 4, 7, 10):
        t = float(rng.uniform(0.5, 5.0))
        rho0 = random_state(rng)
        quad = expected_rho(models[index], rho0, t, QuadratureSpec())
        mc_spec = QuadratureSpec(mode=Mode.MONTE_CARLO, samples=samples, seed=seed)
        mc = expected_rho(models[index], rho0, t, mc_spec)
        diffs = (
            abs(quad.rho.rho11 - mc.rho.rho11),
            abs(quad.rho.rho12.real - mc.rho.rho12.real),
            abs(quad.rho.rho12.imag - mc.rho.rho12.imag),
        )
        for diff, stderr in zip(diffs, mc.error):
            worst = max(worst, diff / max(stderr, 1e-12))
    return CheckResult(
        "Monte Carlo agreement",
        worst <= sigmas,
        f"largest deviation {worst:.2f} standard errors",
    )


def default_checks() -> list[tuple[str, Callable[[], CheckResult]]]:
    pb, ir = NoiseDensity.poly_bump, NoiseDensity.ir_poly_bump
    return [
        ("oracle equivalence", check_oracle_equivalence),
        ("realization invariants", check_realization_invariants),
        ("final-state identity", check_final_state_identity),
        ("Fourier decay pb(2)", lambda: check_fourier_decay(pb(2, 0.4))),
        ("Fourier decay pb(3)", lambda: check_fourier_decay(pb(3, 0.4))),
        ("diagonal rate n=1", lambda: check_diagonal_rate(1)),
        ("diagonal rate n=2", lambda: check_diagonal_rate(2)),
        ("two-noise rate n=1", lambda: check_two_noise_rate(1)),
        ("two-noise rate n=2", lambda: check_two_noise_rate(2)),
        ("off-diagonal rate k=0", lambda: check_off_diagonal_rate(pb(2, 1.0))),
        ("off-diagonal rate k=1", lambda: check_off_diagonal_rate(ir(1, 2, 1.0))),
        ("off-diagonal rate k=3", lambda: check_off_diagonal_rate(ir(3, 2, 1.0))),
        ("heuristic rate", check_heuristic_rate),
        ("weak expansion", check_weak_expansion),
        ("strong expansion", check_strong_expansion),
        ("dephasing limits", check_dephasing_limits),
        ("Monte Carlo agreement", check_monte_carlo_agreement),
    ]


def run_suite(
    checks: list[tuple[str, Callable[[], CheckResult]]] | None = None,
) -> list[CheckResult]:
    """Run each check; a LabError fails that check without stopping the rest."""
    results = []
    for name, check in checks or default_checks():
        _logger.info("Checking %s", name)
        try:
            result = check()
        except LabError as ex:
            result = CheckResult(name, False, f"{type(ex).__name__}: {ex}")
        results.append(result)
    return results


def cmd_validate() -> int:
    results = run_suite()
    for result in results:
        print(result)  # noqa: T201
    failed = sum(not result.passed for result in results)
    _logger.info("%d of %d checks passed", len(results) - failed, len(results))
    return 0 if failed == 0 else 1
