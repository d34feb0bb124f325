"""Deviation time series and their CSV form."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
import numpy.typing as npt

from qnoise.errors import DomainError
from qnoise.serialization import csv_text

FloatArray = npt.NDArray[np.float64]

CSV_COLUMNS = (
    "t",
    "dev_frobenius",
    "dev_rho11",
    "dev_re_rho12",
    "dev_im_rho12",
    "quad_error_estimate",
)


@dataclass(frozen=True, eq=False)
class DecaySeries:
    """Distance between the averaged state and the final state over time.

    `deviations` is the Frobenius distance; the three component columns hold
    the signed entrywise differences and may be empty for derived series such
    as envelopes.
    """

    times: FloatArray
    deviations: FloatArray
    error_estimates: FloatArray
    dev_rho11: FloatArray = field(default_factory=lambda: np.empty(0))
    dev_re_rho12: FloatArray = field(default_factory=lambda: np.empty(0))
    dev_im_rho12: FloatArray = field(default_factory=lambda: np.empty(0))
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("times", "deviations", "error_estimates"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))
        size = len(self.times)
        if len(self.deviations) != size or len(self.error_estimates) != size:
            msg = "times, deviations and error_estimates must have equal lengths"
            raise DomainError(msg)
        if size > 1 and np.any(np.diff(self.times) <= 0):
            msg = "times must be strictly increasing"
            raise DomainError(msg)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def has_components(self) -> bool:
        return len(self.dev_rho11) == len(self.times)

    def select(self, mask: npt.NDArray[np.bool_]) -> DecaySeries:
        """Sub-series at the positions where `mask` is true."""
        components = {}
        if self.has_components:
            components = {
                "dev_rho11": self.dev_rho11[mask],
                "dev_re_rho12": self.dev_re_rho12[mask],
                "dev_im_rho12": self.dev_im_rho12[mask],
            }
        return replace(
            self,
            times=self.times[mask],
            deviations=self.deviations[mask],
            error_estimates=self.error_estimates[mask],
            **components,
        )

    def window(self, t_min: float, t_max: float) -> DecaySeries:
        return self.select((self.times >= t_min) & (self.times <= t_max))

    def with_flag(self, flag: str) -> DecaySeries:
        if flag in self.flags:
            return self
        return replace(self, flags=(*self.flags, flag))

    def to_csv(self) -> str:
        empty = np.full(len(self), np.nan)
        columns = (
            self.times,
            self.deviations,
            self.dev_rho11 if self.has_components else empty,
            self.dev_re_rho12 if self.has_components else empty,
            self.dev_im_rho12 if self.has_components else empty,
            self.error_estimates,
        )
        return csv_text(CSV_COLUMNS, zip(*columns))

    @classmethod
    def from_csv(cls, text: str) -> DecaySeries:
        reader = csv.DictReader(io.StringIO(text))
        rows = list(reader)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            msg = f"Unexpected decay CSV header {reader.fieldnames}"
            raise DomainError(msg)

        def column(name: str) -> FloatArray:
            return np.array([float(row[name]) for row in rows])

        return cls(
            times=column("t"),
            deviations=column("dev_frobenius"),
            error_estimates=column("quad_error_estimate"),
            dev_rho11=column("dev_rho11"),
            dev_re_rho12=column("dev_re_rho12"),
            dev_im_rho12=column("dev_im_rho12"),
        )
