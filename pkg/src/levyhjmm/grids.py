"""Aligned space-time grids with dt = dx.

The fixed-point machinery reads r0(t+x), lambda(t-s+x) and every other
moving-frame quantity exactly at grid nodes; this only works because the
time and space steps are the same number.  A field on the grid is a matrix
over (t_i, x_j) whose row i is meaningful for x up to (n_w - i) cells: the
triangle t + x <= x_max + t_star is self-contained under the moving-frame
reads, everything beyond is NaN-poisoned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _cells(span: float, dt: float, what: str) -> int:
    n = int(round(span / dt))
    if n < 1 or abs(n * dt - span) > 1e-12 * max(1.0, span):
        raise ValueError(f"dt={dt} must divide {what}={span} (within 1e-12)")
    return n


@dataclass(frozen=True)
class SolveGrid:
    """Uniform grid with dt = dx over t in [0, t_star], x in [0, x_max].

    Internally curves extend over the wide x-range [0, x_max + t_star]
    (n_w cells) so that the frame shift t - s + x never leaves the grid.
    """

    t_star: float
    dt: float
    x_max: float

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        _cells(self.t_star, self.dt, "t_star")
        _cells(self.x_max, self.dt, "x_max")

    @property
    def n_t(self) -> int:
        return _cells(self.t_star, self.dt, "t_star")

    @property
    def n_x(self) -> int:
        return _cells(self.x_max, self.dt, "x_max")

    @property
    def n_w(self) -> int:
        return self.n_t + self.n_x

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_t + 1)

    @property
    def x_wide(self) -> np.ndarray:
        return self.dt * np.arange(self.n_w + 1)

    @property
    def x(self) -> np.ndarray:
        return self.dt * np.arange(self.n_x + 1)

    def row_width(self, i: int) -> int:
        """Last valid x-index of row i (inclusive)."""
        return self.n_w - i

    def empty_field(self) -> np.ndarray:
        """NaN-poisoned matrix; entries outside the triangle stay NaN."""
        return np.full((self.n_t + 1, self.n_w + 1), np.nan)

    def valid_mask(self) -> np.ndarray:
        i = np.arange(self.n_t + 1)[:, None]
        j = np.arange(self.n_w + 1)[None, :]
        return i + j <= self.n_w

    def nan_sup(self, field: np.ndarray) -> float:
        """Sup of |field| over the valid triangle."""
        return float(np.nanmax(np.abs(np.where(self.valid_mask(), field, np.nan))))
