import pytest
from qnoise.analysis import Regime, classify
from qnoise.errors import ConvergenceError
from qnoise.noise import NoiseDensity
from qnoise.validate import (
    CheckResult,
    check_dephasing_limits,
    check_diagonal_rate,
    check_final_state_identity,
    check_heuristic_rate,
    check_monte_carlo_agreement,
    check_off_diagonal_rate,
    check_oracle_equivalence,
    check_realization_invariants,
    check_two_noise_rate,
    default_checks,
    model_matrix,
    random_realizations,
    run_suite,
)


def test_model_matrix_covers_all_regimes():
    models = model_matrix()

    assert len(models) == 12
    assert {classify(model) for model in models} == set(Regime)
    families = {model.mu_o.family for model in models}
    families |= {model.mu_d.family for model in models}
    assert len(families) == 6


def test_random_realizations_keep_the_splitting_positive():
    for coords, rho0, t in random_realizations(500, seed=3):
        assert coords.eps + coords.y > 0
        assert rho0.is_positive()
        assert 0 <= t <= 50


@pytest.mark.parametrize(
    "check",
    [check_oracle_equivalence, check_realization_invariants],
    ids=lambda check: check.__name__,
)
def test_realization_checks(check):
    result = check(500)

    assert result.passed, result.detail


def test_final_state_identity_over_the_model_matrix(spec):
    assert check_final_state_identity(spec).passed


def test_diagonal_rate_check():
    result = check_diagonal_rate(1)

    assert result.passed, result.detail


def test_two_noise_rate_check():
    result = check_two_noise_rate(1, window=(30.0, 90.0))

    assert result.passed, result.detail
    assert "heuristic 3.5" in result.detail


def test_off_diagonal_rate_check():
    result = check_off_diagonal_rate(NoiseDensity.ir_poly_bump(1, 2, 1.0))

    assert result.passed, result.detail


def test_heuristic_rate_check():
    result = check_heuristic_rate()

    assert result.passed, result.detail


def test_dephasing_limits_check(spec):
    result = check_dephasing_limits(spec)

    assert result.passed, result.detail


def test_monte_carlo_check():
    result = check_monte_carlo_agreement(samples=200_000, sigmas=4.0, seed=2)

    assert result.passed, result.detail


def test_suite_turns_errors_into_failures():
    def broken():
        msg = "not converged"
        raise ConvergenceError(msg, achieved=1.0)

    def fine():
        return CheckResult("fine", True, "ok")

    results = run_suite([("broken", broken), ("fine", fine)])

    assert [result.passed for result in results] == [False, True]
    assert str(results[0]) == "FAIL broken: ConvergenceError: not converged"
    assert str(results[1]) == "PASS fine: ok"


def test_default_suite_names_are_unique():
    names = [name for name, _ in default_checks()]

    assert len(names) == len(set(names))
