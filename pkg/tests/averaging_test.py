import numpy as np
import pytest
from qnoise.analysis import strong_parameter
from qnoise.averaging import (
    FinalStateCoeffs,
    Mode,
    NoiseModel,
    QuadratureSpec,
    deviation_series,
    expected_rho,
    final_state,
    final_state_coeffs,
    log_time_grid,
    oscillatory_average,
)
from qnoise.closed_form import NoiseCoordinates, rho_t
from qnoise.errors import ConvergenceError, DomainError
from qnoise.noise import NoiseDensity
from qnoise.qubit import DensityMatrix, dephase_delocalized


def test_model_rejects_diagonal_noise_past_bohr_energy():
    with pytest.raises(DomainError, match="Bohr energy"):
        NoiseModel(1.0, NoiseDensity.zero(), NoiseDensity.poly_bump(1, 1.0))
    with pytest.raises(DomainError):
        NoiseModel(0.0, NoiseDensity.zero(), NoiseDensity.zero())


def test_model_extents(small_model):
    assert small_model.eta_o == 0.3
    assert small_model.eta_d == 0.4
    assert small_model.q_max == pytest.approx(np.sqrt(2.0))
    assert not small_model.is_deterministic


@pytest.mark.parametrize(
    "spec",
    [
        {"base_order": 2},
        {"tolerance": 0.0},
        {"samples": 0},
    ],
)
def test_quadrature_spec_validation(spec):
    with pytest.raises(DomainError):
        QuadratureSpec(**spec)


def test_panels_grow_with_time(small_model, spec):
    assert spec.panels(small_model, 0.0) == 8
    assert spec.panels(small_model, 100.0) > spec.panels(small_model, 10.0)


def test_average_at_time_zero_is_the_initial_state(small_model, generic_state, spec):
    state = expected_rho(small_model, generic_state, 0.0, spec)

    assert state.rho.rho11 == pytest.approx(generic_state.rho11, abs=1e-13)
    assert state.rho.rho12 == pytest.approx(generic_state.rho12, abs=1e-13)
    assert state.max_error < 1e-12


def test_deterministic_model_reduces_to_one_realization(generic_state, spec):
    model = NoiseModel(1.0, NoiseDensity.zero(), NoiseDensity.zero())

    state = expected_rho(model, generic_state, 3.0, spec)
    single = rho_t(generic_state, NoiseCoordinates(0.0, 0.0, 1.0), 3.0)

    assert model.is_deterministic
    assert state.nodes == 1
    assert state.rho.rho12 == pytest.approx(single.rho12, abs=1e-15)


@pytest.mark.parametrize("t", [1.0, 20.0, 150.0])
def test_diagonal_noise_multiplies_coherence_by_fourier(diagonal_only, coherent, t):
    state = expected_rho(diagonal_only, coherent, t, QuadratureSpec())
    expected = coherent.rho12 * np.exp(-1j * t) * diagonal_only.mu_d.fourier(t)

    assert state.rho.rho11 == pytest.approx(coherent.rho11, abs=1e-13)
    assert state.rho.rho12 == pytest.approx(expected, abs=1e-12)


def test_average_is_a_density_matrix(small_model, generic_state, spec):
    for t in (0.5, 5.0, 25.0):
        rho = expected_rho(small_model, generic_state, t, spec).rho
        assert rho.is_positive(atol=1e-10)


def test_negative_time_is_rejected(small_model, generic_state, spec):
    with pytest.raises(DomainError):
        expected_rho(small_model, generic_state, -1.0, spec)


def test_underresolved_quadrature_raises(small_model, generic_state):
    spec = QuadratureSpec(panels_per_unit_phase=0.001)

    with pytest.raises(ConvergenceError, match="increase panels") as info:
        expected_rho(small_model, generic_state, 500.0, spec)

    assert info.value.achieved > spec.tolerance


def test_monte_carlo_agrees_with_quadrature(small_model, generic_state, spec):
    mc_spec = QuadratureSpec(mode=Mode.MONTE_CARLO, samples=200_000, seed=5)

    quad = expected_rho(small_model, generic_state, 2.0, spec)
    mc = expected_rho(small_model, generic_state, 2.0, mc_spec)

    assert abs(quad.rho.rho11 - mc.rho.rho11) < 5 * mc.error[0]
    assert abs(quad.rho.rho12.real - mc.rho.rho12.real) < 5 * mc.error[1]
    assert abs(quad.rho.rho12.imag - mc.rho.rho12.imag) < 5 * mc.error[2]
    assert mc.nodes == 200_000


def test_monte_carlo_is_reproducible(small_model, generic_state):
    mc_spec = QuadratureSpec(mode=Mode.MONTE_CARLO, samples=1000, seed=9)

    first = expected_rho(small_model, generic_state, 4.0, mc_spec)
    second = expected_rho(small_model, generic_state, 4.0, mc_spec)

    assert first == second


def test_oscillatory_part_vanishes_at_large_time(small_model, generic_state, spec):
    early = oscillatory_average(small_model, generic_state, 1.0, spec)
    late = oscillatory_average(small_model, generic_state, 200.0, spec)

    assert abs(late[0]) + abs(late[1]) < abs(early[0]) + abs(early[1])
    assert abs(late[1]) < 1e-3


def test_average_is_affine_in_the_initial_state(small_model, generic_state, spec):
    basis = [
        DensityMatrix(1.0),
        DensityMatrix(0.0),
        DensityMatrix(0.5, 0.5),
        DensityMatrix(0.5, 0.5j),
    ]
    c, d = 2 * generic_state.rho12.real, 2 * generic_state.rho12.imag
    a = generic_state.rho11 - (c + d) / 2
    weights = [a, 1 - a - c - d, c, d]

    parts = [expected_rho(small_model, rho, 3.0, spec).rho for rho in basis]
    whole = expected_rho(small_model, generic_state, 3.0, spec).rho

    combined11 = sum(w * part.rho11 for w, part in zip(weights, parts))
    combined12 = sum(w * part.rho12 for w, part in zip(weights, parts))
    assert combined11 == pytest.approx(whole.rho11, abs=1e-8)
    assert combined12 == pytest.approx(whole.rho12, abs=1e-8)


def test_average_is_final_state_plus_oscillation(small_model, generic_state, spec):
    rho_bar = final_state(final_state_coeffs(small_model, spec), generic_state)

    osc11, osc12 = oscillatory_average(small_model, generic_state, 5.0, spec)
    whole = expected_rho(small_model, generic_state, 5.0, spec).rho

    assert whole.rho11 == pytest.approx(rho_bar.rho11 + osc11, abs=1e-8)
    assert whole.rho12 == pytest.approx(rho_bar.rho12 + osc12, abs=1e-8)


def test_final_state_identity_and_even_gamma(small_model, spec):
    coeffs = final_state_coeffs(small_model, spec)

    assert coeffs.identity_residual < 1e-12
    assert abs(coeffs.gamma) < 1e-14
    assert 0 < coeffs.alpha < 0.5
    assert coeffs.error_estimate < 1e-9


def test_shifted_noise_gives_nonzero_gamma(spec):
    mu_o = NoiseDensity.shifted_bump(2.0, 1.0, 2)
    model = NoiseModel(1.0, mu_o, NoiseDensity.zero())

    coeffs = final_state_coeffs(model, spec)

    assert coeffs.gamma < -0.01
    assert coeffs.identity_residual < 1e-12


def test_no_off_diagonal_noise_keeps_populations(diagonal_only, spec):
    coeffs = final_state_coeffs(diagonal_only, spec)

    assert (coeffs.alpha, coeffs.beta, coeffs.gamma) == pytest.approx((0, 1, 0))


def test_final_state_of_maximally_mixed_state(small_model, spec):
    rho_bar = final_state(
        final_state_coeffs(small_model, spec),
        DensityMatrix.maximally_mixed(),
    )

    assert rho_bar.rho11 == pytest.approx(0.5)
    assert rho_bar.rho12 == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize(
    "rho0",
    [DensityMatrix(1.0), DensityMatrix(0.5, 0.5), DensityMatrix(0.7, 0.2 - 0.3j)],
)
def test_half_alpha_dephases_in_the_delocalized_basis(rho0):
    rho_bar = final_state(FinalStateCoeffs(0.5, 0.0, 0.0), rho0)
    expected = dephase_delocalized(rho0)

    assert rho_bar.rho11 == pytest.approx(expected.rho11, abs=1e-15)
    assert rho_bar.rho12 == pytest.approx(expected.rho12, abs=1e-15)


def test_strong_off_diagonal_noise_drives_alpha_to_one_half(spec):
    mu_o = NoiseDensity.shifted_bump(20.0, 1.0, 2)
    model = NoiseModel(1.0, mu_o, NoiseDensity.poly_bump(2, 0.4))

    coeffs = final_state_coeffs(model, spec)

    assert abs(coeffs.alpha - 0.5) <= 2 * strong_parameter(model) ** 2
    assert coeffs.identity_residual < 1e-12


def test_final_state_rejects_inconsistent_coefficients(excited):
    with pytest.raises(DomainError, match="not positive"):
        final_state(FinalStateCoeffs(1.0, 1.0, 0.0), excited)


def test_log_time_grid():
    times = log_time_grid(1e2, 1e4, 40)

    assert len(times) == 81
    assert times[0] == pytest.approx(1e2)
    assert times[-1] == pytest.approx(1e4)
    assert np.all(np.diff(np.log(times)) > 0)
    with pytest.raises(DomainError):
        log_time_grid(0.0, 1.0, 40)


def test_deviation_series_decays(diagonal_only, coherent, spec):
    times = log_time_grid(10.0, 100.0, 200)

    series = deviation_series(diagonal_only, coherent, times, spec)

    assert len(series) == len(times)
    assert series.has_components
    assert series.deviations[-20:].max() < series.deviations[:20].max()
    assert "non-convergent" not in series.flags
    components = np.vstack(
        [series.dev_rho11, series.dev_re_rho12, series.dev_im_rho12],
    )
    np.testing.assert_allclose(
        series.deviations,
        np.sqrt(2 * np.sum(components**2, axis=0)),
    )


def test_noiseless_deviation_is_flagged_non_convergent(coherent, spec):
    model = NoiseModel(1.0, NoiseDensity.zero(), NoiseDensity.zero())

    series = deviation_series(model, coherent, np.linspace(1.0, 50.0, 40), spec)

    assert "non-convergent" in series.flags
    np.testing.assert_allclose(series.deviations, np.sqrt(2) * abs(coherent.rho12))


def test_threads_do_not_change_results(small_model, generic_state, spec):
    times = np.linspace(0.5, 10.0, 12)

    serial = deviation_series(small_model, generic_state, times, spec)
    threaded = deviation_series(small_model, generic_state, times, spec, threads=4)

    np.testing.assert_array_equal(serial.deviations, threaded.deviations)


def test_time_grid_must_increase(small_model, generic_state, spec):
    with pytest.raises(DomainError, match="increasing"):
        deviation_series(small_model, generic_state, [1.0, 1.0, 2.0], spec)
