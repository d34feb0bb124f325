"""Exact two-level quantum mechanics: states, Hamiltonians and evolution."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from qnoise.errors import DomainError

DEGENERACY_RTOL = 1e-14


@dataclass(frozen=True)
class DensityMatrix:
    """A qubit state stored as (rho11, rho12).

    rho22 and rho21 follow from unit trace and Hermiticity, so every instance
    has trace one. Positivity is not enforced; see `is_positive`.
    """

    rho11: float
    rho12: complex = 0j

    @property
    def rho22(self) -> float:
        return 1.0 - self.rho11

    @property
    def rho21(self) -> complex:
        return self.rho12.conjugate()

    def as_array(self) -> npt.NDArray[np.complex128]:
        return np.array(
            [[self.rho11, self.rho12], [self.rho21, self.rho22]],
            dtype=np.complex128,
        )

    @classmethod
    def from_array(cls, matrix: npt.ArrayLike) -> DensityMatrix:
        """Build a state from a 2x2 matrix, reading only the upper triangle."""
        m = np.asarray(matrix, dtype=np.complex128)
        return cls(float(m[0, 0].real), complex(m[0, 1]))

    @classmethod
    def maximally_mixed(cls) -> DensityMatrix:
        return cls(0.5, 0j)

    @classmethod
    def pure(cls, theta: float, phi: float = 0.0) -> DensityMatrix:
        """Pure state cos(theta/2)|1> + exp(i phi) sin(theta/2)|2>."""
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return cls(c * c, c * s * complex(math.cos(phi), -math.sin(phi)))

    def is_positive(self, atol: float = 1e-12) -> bool:
        return abs(self.rho12) ** 2 <= self.rho11 * self.rho22 + atol and (
            -atol <= self.rho11 <= 1.0 + atol
        )


@dataclass(frozen=True)
class FrozenHamiltonian:
    """One noise realization [[a, z], [z, b]] of the random Hamiltonian."""

    a: float
    b: float
    z: float

    @property
    def tol_degenerate(self) -> float:
        return DEGENERACY_RTOL * max(abs(self.a), abs(self.b), abs(self.z), 1.0)

    @property
    def is_degenerate(self) -> bool:
        return math.hypot(self.a - self.b, 2 * self.z) < self.tol_degenerate

    def as_array(self) -> npt.NDArray[np.float64]:
        return np.array([[self.a, self.z], [self.z, self.b]], dtype=np.float64)

    @classmethod
    def from_noise(cls, x: float, y: float, eps: float) -> FrozenHamiltonian:
        """Hamiltonian with level splitting eps + y and coupling x.

        The lower level is pinned at zero; only a - b and z affect dynamics.
        """
        return cls(eps + y, 0.0, x)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (lambda1 >= lambda2) and real orthonormal eigenvectors."""

    lambda1: float
    lambda2: float
    c1: tuple[float, float]
    c2: tuple[float, float]
    identity_multiple: bool = False

    @property
    def gap(self) -> float:
        return self.lambda1 - self.lambda2

    def projectors(self) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        v1, v2 = np.array(self.c1), np.array(self.c2)
        return np.outer(v1, v1), np.outer(v2, v2)

    def reconstruct(self) -> npt.NDArray[np.float64]:
        p1, p2 = self.projectors()
        return self.lambda1 * p1 + self.lambda2 * p2


def eigendecompose(hamiltonian: FrozenHamiltonian) -> SpectralData:
    """Diagonalize a real symmetric 2x2 Hamiltonian in closed form.

    A degenerate Hamiltonian is a multiple of the identity; it is returned
    with `identity_multiple` set and the canonical basis as eigenvectors.
    """
    a, b, z = hamiltonian.a, hamiltonian.b, hamiltonian.z
    if hamiltonian.is_degenerate:
        mean = (a + b) / 2
        return SpectralData(mean, mean, (1.0, 0.0), (0.0, 1.0), identity_multiple=True)

    if z == 0:
        if a >= b:
            return SpectralData(a, b, (1.0, 0.0), (0.0, 1.0))
        return SpectralData(b, a, (0.0, 1.0), (1.0, 0.0))

    mean, half_gap = (a + b) / 2, (a - b) / 2
    radius = math.hypot(half_gap, z)
    # Pick the component form that avoids cancellation in half_gap +- radius.
    if half_gap >= 0:
        u, v = half_gap + radius, z
    else:
        u, v = z, radius - half_gap
    norm = math.hypot(u, v)
    u, v = u / norm, v / norm
    return SpectralData(mean + radius, mean - radius, (u, v), (v, -u))


def evolve_oracle(
    hamiltonian: FrozenHamiltonian,
    rho0: DensityMatrix,
    t: float,
) -> DensityMatrix:
    """Evolve rho0 for time t through the spectral projections of H."""
    if t < 0:
        msg = f"Evolution time must be nonnegative, got {t}"
        raise DomainError(msg)

    spectrum = eigendecompose(hamiltonian)
    if spectrum.identity_multiple:
        return rho0

    p1, p2 = spectrum.projectors()
    rho = rho0.as_array()
    rotation = np.exp(-1j * t * spectrum.gap)
    cross = rotation * (p1 @ rho @ p2)
    result = p1 @ rho @ p1 + p2 @ rho @ p2 + cross + cross.conj().T
    return DensityMatrix.from_array(result)


def to_delocalized(rho: DensityMatrix) -> DensityMatrix:
    """Rewrite rho in the basis (Phi1 +- Phi2)/sqrt(2).

    The returned state stores rho_{++} as `rho11` and rho_{+-} as `rho12`.
    The map is an involution, so it also converts back.
    """
    return DensityMatrix(
        0.5 + rho.rho12.real,
        complex((rho.rho11 - rho.rho22) / 2, -rho.rho12.imag),
    )


def dephase(rho: DensityMatrix) -> DensityMatrix:
    """Fully dephasing channel in the energy basis."""
    return DensityMatrix(rho.rho11, 0j)


def dephase_delocalized(rho: DensityMatrix) -> DensityMatrix:
    """Fully dephasing channel in the delocalized basis, in energy-basis form."""
    rotated = to_delocalized(rho)
    return to_delocalized(DensityMatrix(rotated.rho11, 0j))


def purity(rho: DensityMatrix) -> float:
    return rho.rho11**2 + rho.rho22**2 + 2 * abs(rho.rho12) ** 2


def frobenius_distance(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    d11 = rho_a.rho11 - rho_b.rho11
    d12 = rho_a.rho12 - rho_b.rho12
    return math.sqrt(2 * d11 * d11 + 2 * abs(d12) ** 2)
