"""Builtin test signals with exact antiderivatives.

Each generator returns ``(f, F_values, power_beta)``: the samples, exact
values of the running integral of f (times phi = 1; weighted problems combine
power data with power weights through ``power_beta`` instead), and the
power-law exponent when the data is a pure power.  Exact antiderivatives
matter because trapezoid accumulation of discontinuous or singular samples
would perturb the tube by O(h) near the feature under study.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError, ParameterError
from .grids import Grid, SampledFunction


def step_data(grid: Grid):
    """Unit step down at 1/2 on (0, 1): f = 1 then 0, F = min(x, 1/2)."""
    x = grid.knots
    f = np.where(x < 0.5, 1.0, 0.0)
    f[np.isclose(x, 0.5, rtol=0.0, atol=1e-15)] = 0.5
    F = np.minimum(x, 0.5)
    return SampledFunction(grid, f), F, None


def hat_data(grid: Grid):
    """Tent 1 - |2x - 1| on (0, 1) with its exact antiderivative."""
    x = grid.knots
    f = np.maximum(1.0 - np.abs(2.0 * x - 1.0), 0.0)
    F = np.where(x <= 0.5, x * x, 2.0 * x - x * x - 0.5)
    return SampledFunction(grid, f), F, None


def power_data(grid: Grid, beta: float, d: int = 3):
    """Singular power f = r**(-beta); requires 2*beta < d for finite energy."""
    if grid.a <= 0:
        raise ParameterError("power data needs a grid starting above 0")
    if 2.0 * beta >= d:
        raise DataError(f"r**(-{beta}) is not square integrable in dimension {d}")
    f = grid.knots ** (-beta)
    return SampledFunction(grid, f), None, beta


def spike_data(grid: Grid, center: float = 0.5, width: float = 0.05):
    """Narrow tent of unit height, for locality experiments."""
    x = grid.knots
    f = np.maximum(1.0 - np.abs(x - center) / width, 0.0)
    return SampledFunction(grid, f), None, None


def ramp_hat_data(grid: Grid, slope: float = 1.0):
    """Linear trend plus a tent bump."""
    x = grid.knots
    hat = np.maximum(1.0 - np.abs(2.0 * x - 1.0), 0.0)
    return SampledFunction(grid, slope * x + hat), None, None


def builtin(spec: str, grid: Grid):
    """Resolve a ``builtin:<name>[:key=value...]`` data specifier."""
    parts = spec.split(":")
    if parts[0] != "builtin" or len(parts) < 2:
        raise ParameterError(f"not a builtin data spec: {spec!r}")
    name = parts[1]
    kwargs = {}
    for item in parts[2:]:
        key, _, value = item.partition("=")
        kwargs[key] = float(value)
    if name == "step":
        return step_data(grid)
    if name == "hat":
        return hat_data(grid)
    if name == "power":
        if "beta" not in kwargs:
            raise ParameterError("builtin:power needs beta=<value>")
        return power_data(grid, kwargs["beta"], int(kwargs.get("d", 3)))
    if name == "spike":
        return spike_data(grid, kwargs.get("center", 0.5), kwargs.get("width", 0.05))
    if name == "ramp-hat":
        return ramp_hat_data(grid, kwargs.get("slope", 1.0))
    raise ParameterError(f"unknown builtin data {name!r}")
