"""Interval grids, sampled functions, and trapezoid quadrature.

Everything downstream works on a :class:`Grid` (strictly increasing knots)
and :class:`SampledFunction` (one value per knot).  Quadrature is composite
trapezoid throughout; modules with known closed forms (power-law data and
weights) bypass quadrature at their own level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, GridMismatchError, ParameterError


def _as_readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing knots on a closed interval.

    Non-uniform spacing is first-class: images of uniform grids under the
    weight transform are non-uniform.
    """

    knots: np.ndarray

    def __post_init__(self):
        knots = _as_readonly(self.knots)
        if knots.ndim != 1 or knots.size < 2:
            raise ParameterError("grid needs at least two knots")
        if not np.all(np.isfinite(knots)):
            raise ParameterError("grid knots must be finite")
        if not np.all(np.diff(knots) > 0):
            raise ParameterError("grid knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)

    @property
    def a(self) -> float:
        return float(self.knots[0])

    @property
    def b(self) -> float:
        return float(self.knots[-1])

    @property
    def n_cells(self) -> int:
        return self.knots.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.knots)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.knots[1:] + self.knots[:-1])

    def bisect(self) -> "Grid":
        """Grid refined by inserting every cell midpoint."""
        k = np.empty(2 * self.knots.size - 1)
        k[0::2] = self.knots
        k[1::2] = self.midpoints
        return Grid(k)

    def same_as(self, other: "Grid") -> bool:
        return self.knots.size == other.knots.size and bool(
            np.array_equal(self.knots, other.knots)
        )


def make_grid(a: float, b: float, n: int, grading: str = "uniform", ratio: float = 1.0) -> Grid:
    """Grid with ``n`` cells on [a, b].

    ``grading="geometric"`` makes consecutive cell widths grow by ``ratio``,
    clustering knots toward ``a`` for ratio > 1 (used near integrable
    singularities at the left endpoint).
    """
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ParameterError(f"invalid interval [{a}, {b}]")
    if n < 2:
        raise ParameterError("need at least 2 cells")
    if grading == "uniform":
        return Grid(np.linspace(a, b, n + 1))
    if grading == "geometric":
        if not (np.isfinite(ratio) and ratio > 0):
            raise ParameterError(f"invalid geometric ratio {ratio}")
        if ratio == 1.0:
            return Grid(np.linspace(a, b, n + 1))
        # widths w0 * ratio**i, summing to b - a
        w0 = (b - a) * (1.0 - ratio) / (1.0 - ratio**n)
        knots = a + np.concatenate(([0.0], w0 * np.cumsum(ratio ** np.arange(n))))
        knots[-1] = b  # kill accumulated round-off at the far end
        return Grid(knots)
    raise ParameterError(f"unknown grading {grading!r}")


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Function known by its values at the knots of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _as_readonly(self.values)
        if vals.shape != self.grid.knots.shape:
            raise GridMismatchError(
                f"{vals.size} values for {self.grid.knots.size} knots"
            )
        if not np.all(np.isfinite(vals)):
            raise DataError("sampled values must be finite")
        object.__setattr__(self, "values", vals)

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def __call__(self, x) -> np.ndarray:
        """Piecewise-linear interpolation at ``x`` (no extrapolation)."""
        return np.interp(x, self.grid.knots, self.values)


def sample(grid: Grid, fn) -> SampledFunction:
    """Sample a vectorized callable on a grid."""
    return SampledFunction(grid, np.asarray(fn(grid.knots), dtype=float))


def integrate(g: SampledFunction) -> float:
    """Composite trapezoid; exact for piecewise-linear integrands on the grid."""
    dx = g.grid.widths
    v = g.values
    return float(np.sum(0.5 * (v[1:] + v[:-1]) * dx))


def cumulative_integral(g: SampledFunction) -> np.ndarray:
    """Running trapezoid integral, one value per knot (starts at 0)."""
    dx = g.grid.widths
    v = g.values
    out = np.empty_like(v)
    out[0] = 0.0
    np.cumsum(0.5 * (v[1:] + v[:-1]) * dx, out=out[1:])
    return out


def weighted_lp_norm(g: SampledFunction, w: SampledFunction, p: float) -> float:
    """(integral of |g|^p w)^(1/p) on the shared grid."""
    if not g.grid.same_as(w.grid):
        raise GridMismatchError("g and w must share a grid")
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if np.any(w.values < 0):
        raise DataError("weight must be nonnegative")
    integrand = np.abs(g.values) ** p * w.values
    return float(integrate(g.with_values(integrand)) ** (1.0 / p))


def total_variation(values) -> float:
    """Sum of absolute increments of a knot or cell sequence."""
    v = np.asarray(values, dtype=float)
    return float(np.sum(np.abs(np.diff(v))))


def to_csv(g: SampledFunction, path, header: str = "t,value") -> None:
    """Write ``header`` then one ``knot,value`` row per knot.

    Floats are written with shortest round-trip decimals, so reading the file
    back reproduces the same IEEE-754 doubles.
    """
    lines = [header]
    lines += [f"{t!r},{v!r}" for t, v in zip(g.grid.knots, g.values)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def from_csv(path) -> SampledFunction:
    """Read a two-column CSV written by :func:`to_csv`."""
    knots, values = [], []
    with open(path) as fh:
        next(fh)  # header
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t, v = line.split(",")
            knots.append(float(t))
            values.append(float(v))
    return SampledFunction(Grid(np.array(knots)), np.array(values))
