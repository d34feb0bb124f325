import json
import math
from pathlib import Path

from pytest import fixture
from qnoise.analysis import dephasing_distance
from qnoise.averaging import NoiseModel, QuadratureSpec
from qnoise.noise import NoiseDensity
from qnoise.qubit import DensityMatrix
from qnoise.validate import strong_model, weak_model

# O(nu) bounds use C = DEPHASING_SAFETY * dist / nu measured at
# DEPHASING_CALIBRATION_NU on the weak_model / strong_model families
# (eps = 1, mu_d = poly_bump(2, 0.2), rho0 = pure(pi/3)). The factor covers
# nu2 being defined from the inner edge of mu_o while the distance follows
# the mean of 1/x.
DEPHASING_CALIBRATION_NU = 0.1
DEPHASING_SAFETY = 2.0


@fixture
def excited():
    return DensityMatrix(1.0)


@fixture
def coherent():
    """Equal superposition: rho11 = 1/2, rho12 = 1/2."""
    return DensityMatrix.pure(math.pi / 2)


@fixture
def generic_state():
    return DensityMatrix(0.7, complex(0.2, -0.3))


@fixture
def spec():
    return QuadratureSpec()


@fixture
def small_model():
    """Both noises present, intermediate regime, cheap at small t."""
    mu_o, mu_d = NoiseDensity.poly_bump(2, 0.3), NoiseDensity.poly_bump(2, 0.4)
    return NoiseModel(1.0, mu_o, mu_d)


@fixture
def diagonal_only():
    return NoiseModel(1.0, NoiseDensity.zero(), NoiseDensity.poly_bump(2, 0.4))


@fixture
def off_diagonal_only():
    return NoiseModel(1.0, NoiseDensity.poly_bump(2, 1.0), NoiseDensity.zero())


@fixture
def dephasing_calibration(spec):
    rho0 = DensityMatrix.pure(math.pi / 3)
    nu = DEPHASING_CALIBRATION_NU
    weak = dephasing_distance(weak_model(nu), rho0, spec).energy_basis
    strong = dephasing_distance(strong_model(nu), rho0, spec).delocalized_basis
    return {
        "rho0": rho0,
        "weak": DEPHASING_SAFETY * weak / nu,
        "strong": DEPHASING_SAFETY * strong / nu,
    }


@fixture
def write_config(tmp_path):
    """Write a config dict to a JSON file and return its path."""

    def write(data: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=4))
        return path

    return write
