"""Experiment commands: config in, CSV and JSON files out."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from qnoise import __version__
from qnoise.analysis import (
    DephasingDistances,
    RegimeReport,
    dephasing_distance,
    envelope,
    fit_power_law,
    predicted_rate,
    regime_report,
)
from qnoise.averaging import (
    AveragedState,
    Mode,
    deviation_series,
    expected_rho,
    final_state,
    final_state_coeffs,
    monte_carlo_samples,
)
from qnoise.closed_form import NoiseCoordinates, rho_t
from qnoise.config import ExperimentConfig
from qnoise.errors import ConfigError, ConvergenceError, FloorReachedError, LabError
from qnoise.qubit import purity
from qnoise.serialization import csv_text, write_json, write_text

_logger = logging.getLogger(__name__)

EVOLVE_COLUMNS = ("t", "rho11", "re_rho12", "im_rho12", "purity")
AVERAGE_COLUMNS = (
    "t",
    "rho11",
    "re_rho12",
    "im_rho12",
    "err_rho11",
    "err_re_rho12",
    "err_im_rho12",
)


def _metadata(config: ExperimentConfig, flagged: list[str]) -> dict:
    return {"config": config.resolved(), "version": __version__, "flagged": flagged}


def _write_result(
    config: ExperimentConfig,
    name: str,
    payload: dict,
    flagged: list[str],
) -> Path:
    path = config.out_dir / name
    write_json(path, {**_metadata(config, flagged), **payload})
    return path


def _error_payload(ex: LabError) -> dict:
    payload: dict = {"error": str(ex)}
    if isinstance(ex, ConvergenceError):
        payload["achieved"] = ex.achieved
    if isinstance(ex, FloorReachedError):
        payload["usable_window"] = ex.usable_window
    return payload


def _write_partial(
    config: ExperimentConfig,
    name: str,
    ex: LabError,
    known: dict | None = None,
) -> None:
    """Record what is known so far next to the error that stopped the command."""
    payload = {**(known or {}), **_error_payload(ex)}
    _write_result(config, name, payload, [type(ex).__name__])


def cmd_evolve(config: ExperimentConfig) -> list[Path]:
    """Trajectory of one frozen realization, starting at t = 0."""
    if config.frozen is None:
        msg = "frozen: the evolve command needs a frozen realization (x, y)"
        raise ConfigError(msg)

    coords = NoiseCoordinates(config.frozen.x, config.frozen.y, config.model.eps)
    rho0 = config.rho0
    times = config.time_grid.times()
    if times[0] > 0:
        times = np.concatenate([[0.0], times])

    rows = []
    for t in times:
        rho = rho0 if t == 0 else rho_t(rho0, coords, float(t))
        rows.append((t, rho.rho11, rho.rho12.real, rho.rho12.imag, purity(rho)))

    csv_path = config.out_dir / "evolve.csv"
    write_text(csv_path, csv_text(EVOLVE_COLUMNS, rows))
    json_path = _write_result(config, "evolve.json", {"rows": len(rows)}, [])
    return [csv_path, json_path]


def cmd_average(config: ExperimentConfig) -> list[Path]:
    """Noise-averaged state on the configured time grid."""
    model, rho0, spec = config.noise_model, config.rho0, config.spec
    times = config.time_grid.times()
    samples = None
    if spec.mode is Mode.MONTE_CARLO:
        try:
            samples = monte_carlo_samples(model, spec)
        except LabError as ex:
            _write_partial(config, "average.json", ex, {"rows": 0})
            raise

    def point(t: float) -> AveragedState:
        return expected_rho(model, rho0, t, spec, samples)

    def row(t: float, state: AveragedState) -> tuple[float, ...]:
        rho = state.rho
        return (t, rho.rho11, rho.rho12.real, rho.rho12.imag, *state.error)

    # Rows arrive in time order; on failure the finished prefix is still written.
    rows: list[tuple[float, ...]] = []
    csv_path = config.out_dir / "average.csv"
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        try:
            for t, state in zip(times, pool.map(point, times)):
                rows.append(row(t, state))
        except LabError as ex:
            pool.shutdown(cancel_futures=True)
            write_text(csv_path, csv_text(AVERAGE_COLUMNS, rows))
            _write_partial(config, "average.json", ex, {"rows": len(rows)})
            raise

    write_text(csv_path, csv_text(AVERAGE_COLUMNS, rows))
    json_path = _write_result(config, "average.json", {"rows": len(rows)}, [])
    return [csv_path, json_path]


def cmd_final_state(config: ExperimentConfig) -> list[Path]:
    """Final-state coefficients and the final state for the configured rho0."""
    try:
        coeffs = final_state_coeffs(config.noise_model, config.spec)
        rho_bar = final_state(coeffs, config.rho0)
    except LabError as ex:
        _write_partial(config, "final_state.json", ex)
        raise

    payload = {
        "alpha": coeffs.alpha,
        "beta": coeffs.beta,
        "gamma": coeffs.gamma,
        "error_estimate": coeffs.error_estimate,
        "identity_residual": coeffs.identity_residual,
        "rho_bar": rho_bar,
    }
    return [_write_result(config, "final_state.json", payload, [])]


def cmd_rate_fit(config: ExperimentConfig) -> list[Path]:
    """Deviation series, its envelope and the fitted decay exponent."""
    model, rho0 = config.noise_model, config.rho0
    try:
        series = deviation_series(
            model,
            rho0,
            config.time_grid.times(),
            config.spec,
            threads=config.threads,
        )
    except LabError as ex:
        _write_partial(config, "rate_fit.json", ex)
        raise

    paths = [config.out_dir / "decay.csv"]
    write_text(paths[0], series.to_csv())
    try:
        peaks = envelope(series.window(*config.fit.window))
        paths.append(config.out_dir / "envelope.csv")
        write_text(paths[-1], peaks.to_csv())
    except LabError as ex:
        _logger.warning("No envelope written: %s", ex)

    predicted = predicted_rate(model, rho0)
    try:
        fit = fit_power_law(series, config.fit.window)
    except LabError as ex:
        _write_result(
            config,
            "rate_fit.json",
            {**_error_payload(ex), "predicted_rate": predicted},
            [*series.flags, type(ex).__name__],
        )
        raise

    _logger.info("Measured decay exponent %.4g (heuristic %s)", fit.exponent, predicted)
    flagged = [*series.flags, *fit.flags]
    payload = {"fit": fit, "predicted_rate": predicted}
    paths.append(_write_result(config, "rate_fit.json", payload, flagged))
    return paths


def _regime_payload(report: RegimeReport, distances: DephasingDistances) -> dict:
    return {
        "regime": report.regime,
        "nu": report.nu,
        "nu1": report.nu1,
        "nu2": report.nu2 if math.isfinite(report.nu2) else None,
        "computed": report.computed,
        "predicted": report.predicted,
        "residuals": report.residuals,
        "dephasing_distance": {
            "energy_basis": distances.energy_basis,
            "delocalized_basis": distances.delocalized_basis,
        },
    }


def cmd_regime_check(config: ExperimentConfig) -> list[Path]:
    """Regime expansions and dephasing-channel distances."""
    model, spec = config.noise_model, config.spec
    try:
        report = regime_report(model, spec)
        distances = dephasing_distance(model, config.rho0, spec)
    except LabError as ex:
        _write_partial(config, "regime.json", ex)
        raise

    payload = _regime_payload(report, distances)
    return [_write_result(config, "regime.json", payload, [])]
