"""Compactly supported noise densities: pdf, sampling, Fourier transform, moments."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import numpy.typing as npt
from scipy import integrate, stats
from scipy.interpolate import PchipInterpolator

from qnoise.errors import DomainError, SamplingError
from qnoise.quadrature import composite_rule, gauss_legendre

_logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

TABLE_POINTS = 4096
MAX_TABLE_POINTS = 65536
KS_SELF_TEST_SAMPLES = 20_000
KS_SELF_TEST_PVALUE = 0.01
MIN_CDF_STEP = 1e-13
FOURIER_ORDER = 12
FOURIER_PANELS_PER_UNIT_PHASE = 0.5


class Family(str, Enum):
    """Shapes a noise density can take."""

    POLY_BUMP = "poly_bump"
    SMOOTH_BUMP = "smooth_bump"
    IR_POLY_BUMP = "ir_poly_bump"
    SHIFTED_BUMP = "shifted_bump"
    SYMMETRIC_SHIFTED_BUMP = "symmetric_shifted_bump"
    ZERO = "zero"


@dataclass(frozen=True)
class NoiseDensity:
    """A probability density with compact support.

    Centered families live on (-half_width, half_width); the shifted ones on
    (center - half_width, center + half_width), mirrored for the symmetric
    variant. `zero` is a point mass at the origin. Instances are immutable;
    normalization and sampling tables are computed lazily and cached.
    """

    family: Family
    half_width: float = 1.0
    n: int = 0
    k: int = 0
    center: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.ZERO:
            return
        if not self.half_width > 0:
            msg = f"half_width must be positive, got {self.half_width}"
            raise DomainError(msg)
        if self.n < 0:
            msg = f"Polynomial order n must be nonnegative, got {self.n}"
            raise DomainError(msg)
        if self.family is Family.IR_POLY_BUMP and self.k < 1:
            msg = f"Infrared zero order k must be at least 1, got {self.k}"
            raise DomainError(msg)
        if self.family is Family.SYMMETRIC_SHIFTED_BUMP and (
            abs(self.center) < self.half_width
        ):
            msg = "The mirrored bumps overlap; need |center| >= half_width"
            raise DomainError(msg)

    @classmethod
    def poly_bump(cls, n: int, eta: float) -> NoiseDensity:
        return cls(Family.POLY_BUMP, half_width=eta, n=n)

    @classmethod
    def smooth_bump(cls, eta: float) -> NoiseDensity:
        return cls(Family.SMOOTH_BUMP, half_width=eta)

    @classmethod
    def ir_poly_bump(cls, k: int, n: int, eta: float) -> NoiseDensity:
        return cls(Family.IR_POLY_BUMP, half_width=eta, n=n, k=k)

    @classmethod
    def shifted_bump(cls, center: float, half_width: float, n: int) -> NoiseDensity:
        return cls(Family.SHIFTED_BUMP, half_width=half_width, n=n, center=center)

    @classmethod
    def symmetric_shifted_bump(
        cls,
        center: float,
        half_width: float,
        n: int,
    ) -> NoiseDensity:
        return cls(
            Family.SYMMETRIC_SHIFTED_BUMP,
            half_width=half_width,
            n=n,
            center=abs(center),
        )

    @classmethod
    def zero(cls) -> NoiseDensity:
        return cls(Family.ZERO, half_width=0.0)

    # Geometry

    @property
    def is_point_mass(self) -> bool:
        return self.family is Family.ZERO

    def segments(self) -> list[tuple[float, float]]:
        """Intervals covering the support, split where the shape has a kink."""
        eta, c = self.half_width, self.center
        if self.family is Family.ZERO:
            return [(0.0, 0.0)]
        if self.family is Family.SHIFTED_BUMP:
            return [(c - eta, c + eta)]
        if self.family is Family.SYMMETRIC_SHIFTED_BUMP:
            return [(-c - eta, -c + eta), (c - eta, c + eta)]
        return [(-eta, 0.0), (0.0, eta)]

    def support(self) -> tuple[float, float]:
        segments = self.segments()
        return segments[0][0], segments[-1][1]

    @property
    def extent(self) -> float:
        """Largest |u| in the support."""
        lo, hi = self.support()
        return max(abs(lo), abs(hi))

    @property
    def min_abs_support(self) -> float:
        """Distance from the origin to the support (zero if it contains 0)."""
        return min(
            0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
            for lo, hi in self.segments()
        )

    @property
    def is_even(self) -> bool:
        return self.family is not Family.SHIFTED_BUMP or self.center == 0

    @property
    def smoothness(self) -> int | None:
        """Number of continuous derivatives; None means infinitely smooth."""
        if self.family in (Family.ZERO, Family.SMOOTH_BUMP):
            return None
        if self.family is Family.IR_POLY_BUMP and self.k % 2 == 1:
            return min(self.n - 1, self.k - 1)
        return self.n - 1

    @property
    def infrared_order(self) -> int:
        """Order of the zero of the density at the origin."""
        return self.k if self.family is Family.IR_POLY_BUMP else 0

    # Density

    def _shape(self, u: FloatArray) -> FloatArray:
        if self.family is Family.SYMMETRIC_SHIFTED_BUMP:
            v1 = (u - self.center) / self.half_width
            v2 = (u + self.center) / self.half_width
            return 0.5 * (_bump(v1, self.n) + _bump(v2, self.n))
        if self.family is Family.SHIFTED_BUMP:
            return _bump((u - self.center) / self.half_width, self.n)

        v = u / self.half_width
        if self.family is Family.SMOOTH_BUMP:
            inside = np.abs(v) < 1.0
            base = np.where(inside, 1.0 - v * v, 1.0)
            return np.where(inside, np.exp(-1.0 / base), 0.0)
        if self.family is Family.IR_POLY_BUMP:
            return np.abs(v) ** self.k * _bump(v, self.n)
        return _bump(v, self.n)

    @cached_property
    def normalization(self) -> float:
        """Integral of the unnormalized shape, by adaptive quadrature."""
        if self.is_point_mass:
            return 1.0

        total = 0.0
        for lo, hi in self.segments():
            value, _ = integrate.quad(
                lambda u: float(self._shape(np.asarray(u))),
                lo,
                hi,
                epsabs=0.0,
                epsrel=1e-12,
                limit=200,
            )
            total += value
        _logger.debug("Normalized %s: constant %.17g", self, total)
        return total

    def pdf(self, u: npt.ArrayLike) -> FloatArray:
        """Density at u; a point mass has no density and reports 0."""
        u = np.asarray(u, dtype=np.float64)
        if self.is_point_mass:
            return np.zeros_like(u)
        return self._shape(u) / self.normalization

    def cdf(self, u: npt.ArrayLike) -> FloatArray:
        """Cumulative distribution, interpolated from a fine table."""
        u = np.asarray(u, dtype=np.float64)
        if self.is_point_mass:
            return np.where(u >= 0.0, 1.0, 0.0)
        grid, values = self._fine_cdf_table
        return np.interp(u, grid, values, left=0.0, right=1.0)

    @cached_property
    def _fine_cdf_table(self) -> tuple[FloatArray, FloatArray]:
        grids, values = [], []
        offset = 0.0
        for lo, hi in self.segments():
            grid, cdf = self._segment_cdf(lo, hi, 16 * TABLE_POINTS)
            grids.append(grid)
            values.append(offset + cdf)
            offset += cdf[-1]
        return np.concatenate(grids), np.concatenate(values) / offset

    def _segment_cdf(self, lo: float, hi: float, points: int) -> tuple[
        FloatArray,
        FloatArray,
    ]:
        """Unnormalized CDF on a uniform grid, exact per cell to high order."""
        grid = np.linspace(lo, hi, points)
        ref_nodes, ref_weights = gauss_legendre(8)
        mid = (grid[:-1] + grid[1:]) / 2
        half = (grid[1:] - grid[:-1]) / 2
        cells = self._shape(mid[:, None] + half[:, None] * ref_nodes[None, :])
        masses = half * (cells @ ref_weights)
        return grid, np.concatenate([[0.0], np.cumsum(masses)])

    # Sampling

    @cached_property
    def _inverse_cdf(self) -> _InverseCdf:
        points = TABLE_POINTS
        while True:
            table = _InverseCdf.build(self, points)
            rng = np.random.default_rng(points)
            samples = table.draw(rng, KS_SELF_TEST_SAMPLES)
            result = stats.kstest(samples, self.cdf)
            if result.pvalue >= KS_SELF_TEST_PVALUE:
                _logger.debug(
                    "Sampling table for %s: %d points, KS p-value %.3g",
                    self,
                    points,
                    result.pvalue,
                )
                return table
            if points >= MAX_TABLE_POINTS:
                msg = (
                    f"Inverse-CDF table for {self} failed its KS self-test "
                    f"(p={result.pvalue:.3g}) at {points} points"
                )
                raise SamplingError(msg)
            points *= 2

    def sample(self, seed: int, count: int) -> FloatArray:
        """Draw `count` reproducible samples from a stream derived from `seed`."""
        if count < 1:
            msg = f"Sample count must be at least 1, got {count}"
            raise DomainError(msg)
        if self.is_point_mass:
            return np.zeros(count)
        return self._inverse_cdf.draw(np.random.default_rng(seed), count)

    # Integrals

    def quadrature(self, panels: int, order: int) -> tuple[FloatArray, FloatArray]:
        """Nodes and probability weights (summing to one) over the support.

        `panels` is spread over the segments in proportion to their length.
        """
        if self.is_point_mass:
            return np.zeros(1), np.ones(1)

        segments = self.segments()
        total = sum(hi - lo for lo, hi in segments)
        nodes, weights = [], []
        for lo, hi in segments:
            count = max(1, math.ceil(panels * (hi - lo) / total))
            seg_nodes, seg_weights = composite_rule(lo, hi, count, order)
            nodes.append(seg_nodes)
            weights.append(seg_weights * self._shape(seg_nodes))
        weights_all = np.concatenate(weights)
        return np.concatenate(nodes), weights_all / weights_all.sum()

    def fourier(self, t: float) -> complex:
        """Characteristic function E[exp(-i t u)]."""
        if t == 0 or self.is_point_mass:
            return 1.0 + 0j

        length = sum(hi - lo for lo, hi in self.segments())
        panels = max(8, math.ceil(FOURIER_PANELS_PER_UNIT_PHASE * abs(t) * length))
        nodes, weights = self.quadrature(panels, FOURIER_ORDER)
        return complex(np.sum(weights * np.exp(-1j * t * nodes)))

    def expectation(self, func: Callable[[FloatArray], FloatArray]) -> float:
        """E[func(u)] by adaptive quadrature on each segment."""
        if self.is_point_mass:
            return float(func(np.zeros(1))[0])

        total = 0.0
        for lo, hi in self.segments():
            value, _ = integrate.quad(
                lambda u: float(func(np.asarray(u)) * self.pdf(u)),
                lo,
                hi,
                epsabs=1e-15,
                epsrel=1e-12,
                limit=200,
            )
            total += value
        return total

    def moment(self, m: int) -> float:
        return self.expectation(lambda u: u**m)

    def scaled_inverse_moment(self, eps: float, m: int) -> float:
        """E[(1 + y/eps)^(-m)]; negative m gives positive powers."""
        lo, _ = self.support()
        if lo <= -eps:
            msg = f"Support reaches -eps={-eps}; 1 + y/eps is not positive"
            raise DomainError(msg)
        return self.expectation(lambda u: (1.0 + u / eps) ** (-m))

    def inverse_power_moment(self, eps: float, m: int) -> float:
        """E[(eps/x)^m]; requires a support bounded away from 0."""
        if self.min_abs_support <= 0.0:
            msg = f"Support of {self} contains 0; E[(eps/x)^{m}] is undefined"
            raise DomainError(msg)
        return self.expectation(lambda u: (eps / u) ** m)

    def __str__(self) -> str:
        if self.is_point_mass:
            return "zero"
        params = {
            Family.POLY_BUMP: f"n={self.n}, eta={self.half_width}",
            Family.SMOOTH_BUMP: f"eta={self.half_width}",
            Family.IR_POLY_BUMP: f"k={self.k}, n={self.n}, eta={self.half_width}",
        }.get(self.family, f"c={self.center}, w={self.half_width}, n={self.n}")
        return f"{self.family.value}({params})"


def _bump(v: FloatArray, n: int) -> FloatArray:
    inside = np.abs(v) < 1.0
    return np.where(inside, np.clip(1.0 - v * v, 0.0, None) ** n, 0.0)


@dataclass(frozen=True)
class _InverseCdf:
    """Per-segment monotone inverse-CDF splines with the segment masses."""

    masses: FloatArray
    inverses: tuple[PchipInterpolator, ...]

    @classmethod
    def build(cls, density: NoiseDensity, points: int) -> _InverseCdf:
        masses, inverses = [], []
        for lo, hi in density.segments():
            grid, cdf = density._segment_cdf(lo, hi, points)  # noqa: SLF001
            masses.append(cdf[-1])
            u = cdf / cdf[-1]
            # The spline needs well separated abscissae; steps near the edges of a
            # flat-tailed density are roundoff.
            keep = np.concatenate([[True], np.diff(u) > MIN_CDF_STEP])
            u_kept, x_kept = u[keep], grid[keep]
            u_kept[-1] = 1.0
            try:
                inverses.append(PchipInterpolator(u_kept, x_kept))
            except ValueError as ex:
                msg = f"Cannot invert the CDF of {density} on [{lo}, {hi}]: {ex}"
                raise SamplingError(msg) from ex
        masses_arr = np.array(masses)
        return cls(masses_arr / masses_arr.sum(), tuple(inverses))

    def draw(self, rng: np.random.Generator, count: int) -> FloatArray:
        uniforms = rng.random(count)
        edges = np.concatenate([[0.0], np.cumsum(self.masses)])
        which = np.clip(np.searchsorted(edges, uniforms, side="right") - 1, 0, None)
        which = np.minimum(which, len(self.masses) - 1)
        out = np.empty(count)
        for index, inverse in enumerate(self.inverses):
            chosen = which == index
            local = (uniforms[chosen] - edges[index]) / self.masses[index]
            out[chosen] = inverse(np.clip(local, 0.0, 1.0))
        return out
