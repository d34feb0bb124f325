"""Composite Gauss-Legendre rules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import numpy.typing as npt
from scipy.special import roots_legendre

FloatArray = npt.NDArray[np.float64]


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights on [-1, 1]."""
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(
    lo: float,
    hi: float,
    panels: int,
    order: int,
) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights of `panels` equal Gauss-Legendre panels on [lo, hi].

    Nodes come out sorted, panel by panel.
    """
    ref_nodes, ref_weights = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
    weights = (half[:, None] * ref_weights[None, :]).ravel()
    return nodes, weights
