import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from qnoise.errors import DomainError
from qnoise.qubit import (
    DensityMatrix,
    FrozenHamiltonian,
    dephase,
    dephase_delocalized,
    eigendecompose,
    evolve_oracle,
    frobenius_distance,
    purity,
    to_delocalized,
)
from scipy.linalg import expm

entries = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
times = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)


@st.composite
def states(draw):
    rho11 = draw(st.floats(min_value=0.0, max_value=1.0))
    radius = math.sqrt(rho11 * (1.0 - rho11)) * draw(st.floats(0.0, 1.0))
    phase = draw(st.floats(0.0, 2 * math.pi))
    return DensityMatrix(rho11, radius * complex(math.cos(phase), math.sin(phase)))


@pytest.mark.parametrize(
    ("theta", "phi"),
    [(0.0, 0.0), (math.pi, 0.0), (math.pi / 2, 0.0), (1.0, 2.0), (2.5, -1.0)],
)
def test_pure_states_have_unit_purity(theta, phi):
    rho = DensityMatrix.pure(theta, phi)

    assert purity(rho) == pytest.approx(1.0)
    assert rho.is_positive()


def test_density_matrix_is_hermitian_with_unit_trace(generic_state):
    matrix = generic_state.as_array()

    assert np.trace(matrix) == pytest.approx(1.0)
    np.testing.assert_allclose(matrix, matrix.conj().T)
    assert DensityMatrix.from_array(matrix) == generic_state


def test_positivity_rejects_large_coherence():
    assert not DensityMatrix(0.5, 0.6).is_positive()
    assert not DensityMatrix(1.2, 0j).is_positive()
    assert DensityMatrix.maximally_mixed().is_positive()


@seed(1)
@settings(max_examples=200)
@given(a=entries, b=entries, z=entries)
def test_eigendecompose_reconstructs_hamiltonian(a, b, z):
    hamiltonian = FrozenHamiltonian(a, b, z)
    spectrum = eigendecompose(hamiltonian)
    vectors = np.array([spectrum.c1, spectrum.c2])

    assert spectrum.lambda1 >= spectrum.lambda2
    np.testing.assert_allclose(vectors @ vectors.T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(
        spectrum.reconstruct(),
        hamiltonian.as_array(),
        atol=1e-12 * max(1.0, abs(a), abs(b), abs(z)),
    )


def test_degenerate_hamiltonian_is_identity_multiple():
    spectrum = eigendecompose(FrozenHamiltonian(2.0, 2.0, 0.0))

    assert spectrum.identity_multiple
    assert spectrum.gap == 0.0
    assert spectrum.c1 == (1.0, 0.0)


def test_pure_coupling_gives_delocalized_eigenvectors():
    spectrum = eigendecompose(FrozenHamiltonian(0.0, 0.0, 1.0))
    half = 1 / math.sqrt(2)

    assert spectrum.lambda1 == pytest.approx(1.0)
    np.testing.assert_allclose(spectrum.c1, (half, half))
    np.testing.assert_allclose(spectrum.c2, (half, -half))


@pytest.mark.parametrize(("a", "b"), [(3.0, 1.0), (1.0, 3.0)])
def test_diagonal_hamiltonian_orders_eigenvalues(a, b):
    spectrum = eigendecompose(FrozenHamiltonian(a, b, 0.0))

    assert (spectrum.lambda1, spectrum.lambda2) == (3.0, 1.0)
    assert not spectrum.identity_multiple


@seed(2)
@settings(max_examples=200)
@given(a=entries, b=entries, z=entries, t=times, rho0=states())
def test_oracle_matches_matrix_exponential(a, b, z, t, rho0):
    hamiltonian = FrozenHamiltonian(a, b, z)
    unitary = expm(-1j * t * hamiltonian.as_array())
    expected = unitary @ rho0.as_array() @ unitary.conj().T

    result = evolve_oracle(hamiltonian, rho0, t)

    np.testing.assert_allclose(result.as_array(), expected, atol=1e-9)


@seed(3)
@settings(max_examples=100)
@given(a=entries, z=entries, t1=times, t2=times, rho0=states())
def test_oracle_group_law(a, z, t1, t2, rho0):
    hamiltonian = FrozenHamiltonian(a, 0.0, z)

    stepped = evolve_oracle(hamiltonian, evolve_oracle(hamiltonian, rho0, t1), t2)
    direct = evolve_oracle(hamiltonian, rho0, t1 + t2)

    np.testing.assert_allclose(stepped.as_array(), direct.as_array(), atol=1e-9)


@seed(8)
@settings(max_examples=100)
@given(a=entries, b=entries, z=entries, shift=entries, t=times, rho0=states())
def test_oracle_ignores_a_common_energy_shift(a, b, z, shift, t, rho0):
    plain = evolve_oracle(FrozenHamiltonian(a, b, z), rho0, t)
    shifted = evolve_oracle(FrozenHamiltonian(a + shift, b + shift, z), rho0, t)

    np.testing.assert_allclose(shifted.as_array(), plain.as_array(), atol=1e-9)


def test_oracle_rejects_negative_time(generic_state):
    with pytest.raises(DomainError, match="nonnegative"):
        evolve_oracle(FrozenHamiltonian(1.0, 0.0, 0.5), generic_state, -1.0)


def test_noiseless_evolution_rotates_coherence(generic_state):
    eps, t = 1.3, 2.0

    rho = evolve_oracle(FrozenHamiltonian.from_noise(0.0, 0.0, eps), generic_state, t)

    assert rho.rho11 == pytest.approx(generic_state.rho11)
    assert rho.rho12 == pytest.approx(generic_state.rho12 * np.exp(-1j * eps * t))


@pytest.mark.parametrize(
    ("rho", "expected"),
    [
        (DensityMatrix(0.5), DensityMatrix(0.5, 0j)),
        (DensityMatrix(0.5, 0.5), DensityMatrix(1.0, 0j)),
        (DensityMatrix(0.7, 0.1 + 0.2j), DensityMatrix(0.6, 0.2 - 0.2j)),
    ],
)
def test_delocalized_basis_examples(rho, expected):
    rotated = to_delocalized(rho)

    assert rotated.rho11 == pytest.approx(expected.rho11)
    assert rotated.rho12 == pytest.approx(expected.rho12)


@seed(4)
@given(rho=states())
def test_delocalized_change_of_basis_is_an_involution(rho):
    back = to_delocalized(to_delocalized(rho))

    assert back.rho11 == pytest.approx(rho.rho11, abs=1e-14)
    assert back.rho12 == pytest.approx(rho.rho12, abs=1e-14)
    assert purity(to_delocalized(rho)) == pytest.approx(purity(rho), abs=1e-14)


def test_dephasing_channels(coherent, generic_state):
    energy = dephase(generic_state)
    delocalized = dephase_delocalized(generic_state)

    assert energy == DensityMatrix(0.7, 0j)
    assert delocalized.rho11 == pytest.approx(0.5)
    assert delocalized.rho12 == pytest.approx(0.2)
    assert dephase_delocalized(DensityMatrix(1.0)) == DensityMatrix(0.5, 0j)
    assert frobenius_distance(dephase_delocalized(coherent), coherent) < 1e-15


def test_frobenius_distance_matches_matrix_norm(generic_state, coherent):
    expected = np.linalg.norm(generic_state.as_array() - coherent.as_array())

    assert frobenius_distance(generic_state, coherent) == pytest.approx(expected)
    assert frobenius_distance(coherent, coherent) == 0.0
