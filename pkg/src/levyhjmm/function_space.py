"""Weighted-space machinery: curves on a uniform x-grid, the exponentially
weighted L2/H1 norms, the shift semigroup and the embedding bound checks.

A curve lives on x0 + k*dx, k = 0..n-1 together with the weight parameter
gamma; all integrals are trapezoidal on that grid and the tail beyond the
last node is treated as zero.  For norm accuracy of decaying curves pick the
truncation around horizon + 10/gamma, so the neglected weighted tail is
explicit and negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

_trapz = getattr(np, "trapezoid", np.trapz)


@dataclass(frozen=True)
class WeightedCurve:
    """A sampled curve with the weight e^{gamma x} attached."""

    dx: float
    values: np.ndarray
    gamma: float
    x0: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if self.dx <= 0.0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if values.ndim != 1 or values.size < 2:
            raise ValueError("curve needs a 1-D array of at least 2 values")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    @classmethod
    def from_function(
        cls, f: Callable, dx: float, x_max: float, gamma: float
    ) -> "WeightedCurve":
        n = int(round(x_max / dx))
        xs = dx * np.arange(n + 1)
        return cls(dx=dx, values=np.asarray(f(xs), dtype=float), gamma=gamma)

    def scaled(self, alpha: float) -> "WeightedCurve":
        return WeightedCurve(dx=self.dx, values=alpha * self.values, gamma=self.gamma, x0=self.x0)


def norm_l2gamma(c: WeightedCurve) -> float:
    """Trapezoidal (int |h|^2 e^{gamma x} dx)^(1/2) over the grid."""
    w = c.values**2 * np.exp(c.gamma * c.x)
    return math.sqrt(_trapz(w, dx=c.dx))


def _derivative(values: np.ndarray, dx: float) -> np.ndarray:
    # central differences inside, one-sided at the two boundary nodes
    return np.gradient(values, dx)


def norm_h1gamma(c: WeightedCurve) -> float:
    """(||h||^2 + ||h'||^2)^(1/2) in the weighted L2 norm, h' by differences."""
    if c.values.size < 3:
        raise ValueError("H1 norm needs at least 3 grid points")
    w = np.exp(c.gamma * c.x)
    d = _derivative(c.values, c.dx)
    total = _trapz(c.values**2 * w, dx=c.dx) + _trapz(d**2 * w, dx=c.dx)
    return math.sqrt(total)


def shift(c: WeightedCurve, t: float) -> WeightedCurve:
    """Shift semigroup S_t h = h(t + .) on the grid; t must be grid-aligned.

    The right boundary is padded with the last value (flat extrapolation).
    """
    if t < 0.0:
        raise ValueError(f"shift time must be nonnegative, got {t}")
    k = int(round(t / c.dx))
    if abs(t - k * c.dx) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"shift t={t} is not an integer multiple of dx={c.dx}")
    if k == 0:
        return c
    n = c.values.size
    if k >= n:
        values = np.full(n, c.values[-1])
    else:
        values = np.concatenate([c.values[k:], np.full(k, c.values[-1])])
    return WeightedCurve(dx=c.dx, values=values, gamma=c.gamma, x0=c.x0)


class BoundCheck(NamedTuple):
    value: float
    bound: float
    holds: bool


def sup_bound_check(c: WeightedCurve, tol: float = 1e-6) -> BoundCheck:
    """sup |h| against the H1 embedding bound 2 gamma^(-1/2) ||h||_{H1,gamma}."""
    sup = float(np.max(np.abs(c.values)))
    bound = 2.0 / math.sqrt(c.gamma) * norm_h1gamma(c)
    return BoundCheck(sup, bound, sup <= bound + tol)


def l1_bound_check(c: WeightedCurve, tol: float = 1e-6) -> BoundCheck:
    """int |h| dx against the Cauchy-Schwarz bound gamma^(-1/2) ||h||_{L2,gamma}."""
    l1 = float(_trapz(np.abs(c.values), dx=c.dx))
    bound = norm_l2gamma(c) / math.sqrt(c.gamma)
    return BoundCheck(l1, bound, l1 <= bound + tol)


# --- CSV curve format: header "x,value", one row per node ------------------


def write_curve_csv(path, c: WeightedCurve) -> None:
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for x, v in zip(c.x, c.values):
            fh.write(f"{float(x)!r},{float(v)!r}\n")


def read_curve_csv(path, gamma: float) -> WeightedCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    xs, vals = data[:, 0], data[:, 1]
    dxs = np.diff(xs)
    if dxs.size == 0 or np.max(np.abs(dxs - dxs[0])) > 1e-9 * dxs[0]:
        raise ValueError(f"curve file {path} is not on a uniform grid")
    return WeightedCurve(dx=float(dxs[0]), values=vals, gamma=gamma, x0=float(xs[0]))
