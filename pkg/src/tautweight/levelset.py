"""Level sets, perimeters, and isoperimetric diagnostics for radial profiles.

All geometry is exact for radial sets: a level set of a radial function is a
union of annuli, its measure is a difference of ball volumes and its perimeter
a sum of sphere areas, so the checks here carry no mesh error.  The level-set
identity Per(E^s) = sign(s) * integral of v over E^s, with v = (f - u)/alpha,
holds for every level of an exact minimizer and is the working criterion for
certifying one; the isoperimetric report quantifies when a small L^d mass of v
forbids small level sets (the boundedness mechanism).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, GridMismatchError, ParameterError
from .grids import SampledFunction

_BOUNDARY_TOL = 1e-12


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def theta_d(d: int) -> float:
    """Sharp isoperimetric constant: Per(E) >= theta_d |E|^((d-1)/d)."""
    return d * ball_volume(d) ** (1.0 / d)


def sphere_area(r: float, d: int) -> float:
    return d * ball_volume(d) * r ** (d - 1)


@dataclass(frozen=True)
class RadialLevelSet:
    """Union of disjoint radius intervals representing {sign(s) u > |s|}."""

    s: float
    intervals: tuple
    d: int

    @property
    def empty(self) -> bool:
        return len(self.intervals) == 0


def level_set(u: SampledFunction, s: float, d: int = 3) -> RadialLevelSet:
    """Interval decomposition of the level set by sign-change scan.

    Crossing radii are linearly interpolated.  If the set is active at the
    first knot it is extended down to r = 0 (the grid excises (0, a) only to
    avoid sampling the singularity), and similarly out to the last knot.
    """
    if s == 0:
        raise ParameterError("level s must be nonzero")
    r = u.grid.knots
    g = np.sign(s) * u.values - abs(s)
    active = g > 0
    intervals = []
    start = None
    if active[0]:
        start = 0.0
    for i in range(len(r) - 1):
        if active[i + 1] and not active[i]:
            # crossing from below between r[i] and r[i+1]
            t = g[i] / (g[i] - g[i + 1])
            start = float(r[i] + t * (r[i + 1] - r[i]))
        elif active[i] and not active[i + 1]:
            t = g[i] / (g[i] - g[i + 1])
            end = float(r[i] + t * (r[i + 1] - r[i]))
            intervals.append((start, end))
            start = None
    if start is not None:
        intervals.append((start, float(r[-1])))
    return RadialLevelSet(s=float(s), intervals=tuple(intervals), d=d)


def measure(ls: RadialLevelSet) -> float:
    """Lebesgue measure of the union of annuli."""
    w = ball_volume(ls.d)
    return float(sum(w * (hi**ls.d - lo**ls.d) for lo, hi in ls.intervals))


def perimeter(ls: RadialLevelSet, mode: str = "whole_space", domain_radius: float = 1.0) -> float:
    """Sum of sphere areas over interval endpoints.

    ``relative`` mode measures the perimeter inside the open ball of
    ``domain_radius``: endpoints on the domain boundary contribute nothing
    (Neumann convention).  Endpoints at r = 0 contribute nothing in either
    mode since the sphere area vanishes there for d >= 2.
    """
    if mode not in ("whole_space", "relative"):
        raise ParameterError(f"unknown perimeter mode {mode!r}")
    total = 0.0
    for lo, hi in ls.intervals:
        for endpoint in (lo, hi):
            if mode == "relative" and abs(endpoint - domain_radius) <= _BOUNDARY_TOL:
                continue
            total += sphere_area(endpoint, ls.d)
    return float(total)


def _integral_over(ls: RadialLevelSet, g: SampledFunction) -> float:
    """Integral of g against the radial volume element over the level set."""
    r = g.grid.knots
    d = ls.d
    coeff = d * ball_volume(d)
    total = 0.0
    for lo, hi in ls.intervals:
        lo_c = max(lo, float(r[0]))
        hi_c = min(hi, float(r[-1]))
        if hi_c <= lo_c:
            continue
        inside = r[(r > lo_c) & (r < hi_c)]
        pts = np.concatenate(([lo_c], inside, [hi_c]))
        vals = np.interp(pts, r, g.values) * coeff * pts ** (d - 1)
        total += float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)))
    return total


def perimeter_identity_residual(
    u: SampledFunction,
    f: SampledFunction,
    alpha: float,
    s: float,
    d: int = 3,
    mode: str = "relative",
) -> float:
    """|Per(E^s) - sign(s) * integral of (f-u)/alpha over E^s|.

    Defaults to the relative perimeter: the identity for the ball problem uses
    test fields supported inside the domain, so the outer boundary does not
    count.  The mass of v on the excised core (0, a) is below any tolerance of
    interest for the certified cases and is not extrapolated.
    """
    if not u.grid.same_as(f.grid):
        raise GridMismatchError("u and f must share a grid")
    ls = level_set(u, s, d)
    v = f.with_values((f.values - u.values) / alpha)
    lhs = perimeter(ls, mode=mode)
    rhs = math.copysign(1.0, s) * _integral_over(ls, v)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class IsoperimetricReport:
    theta_d: float
    per: float
    measure: float
    ratio: float
    ld_norm_v_on_set: float
    mass_below_threshold: bool

    def as_dict(self) -> dict:
        return {
            "theta_d": self.theta_d,
            "per": self.per,
            "measure": self.measure,
            "ratio": self.ratio,
            "ld_norm_v_on_set": self.ld_norm_v_on_set,
            "mass_below_threshold": self.mass_below_threshold,
        }


def isoperimetric_report(v: SampledFunction, ls: RadialLevelSet, d: int) -> IsoperimetricReport:
    """Isoperimetric ratio of the set and the L^d mass of v on it.

    ``mass_below_threshold`` flags (integral of |v|^d over E)^(1/d) < theta_d:
    combined with the level-set identity and the isoperimetric inequality this
    contradicts the set being a nonempty minimizer level set, which is exactly
    the smallness criterion forcing bounded minimizers.  When v fails to be
    L^d-integrable near 0 the mass stays above the threshold on every small
    set and unboundedness cannot be excluded.
    """
    if ls.empty:
        raise ParameterError("isoperimetric report needs a nonempty level set")
    th = theta_d(d)
    per = perimeter(ls, mode="whole_space")
    vol = measure(ls)
    ratio = per / (th * vol ** ((d - 1.0) / d))
    mass = _integral_over(ls, v.with_values(np.abs(v.values) ** d)) ** (1.0 / d)
    return IsoperimetricReport(
        theta_d=th,
        per=per,
        measure=vol,
        ratio=float(ratio),
        ld_norm_v_on_set=float(mass),
        mass_below_threshold=bool(mass < th),
    )


def lp_norm_radial(u: SampledFunction, p: float, d: int) -> float:
    """L^p norm of a radial profile over the unit ball (trapezoid)."""
    r = u.grid.knots
    coeff = d * ball_volume(d)
    vals = np.abs(u.values) ** p * coeff * r ** (d - 1)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(r)) ** (1.0 / p))


def markov_sup_bound(
    u: SampledFunction, p: float, c_density: float, r0: float, d: int = 3
) -> tuple:
    """Sup bound (C |B(0,r0)|)^(-1/p) ||u||_p implied by density estimates.

    Returns (bound, respected): if every nonempty level set must fill a
    C-fraction of a ball of radius r0, levels above the bound are impossible.
    ``respected`` compares the sampled sup against the bound; a violation
    witnesses that no such density estimate holds for this profile at this
    scale.
    """
    if p < 1:
        raise ParameterError("p must be >= 1")
    if not (0.0 < c_density <= 1.0):
        raise ParameterError("density constant must lie in (0, 1]")
    if r0 <= 0:
        raise ParameterError("r0 must be positive")
    bound = (c_density * ball_volume(d) * r0**d) ** (-1.0 / p) * lp_norm_radial(u, p, d)
    sampled_sup = float(np.max(np.abs(u.values)))
    return float(bound), bool(sampled_sup <= bound)


def layer_cake_residual(u: SampledFunction, d: int, n_levels: int = 4000) -> float:
    """Relative mismatch of the layer-cake identity for (u+)^(d/(d-1)).

    Left side by radial trapezoid; right side by a log-spaced sweep of levels
    with the exact head below the smallest level (where the level set is
    constant in s).  Used as a consistency diagnostic, accurate to the
    quadrature of both sides.
    """
    q = d / (d - 1.0)
    lhs = lp_norm_radial(u.with_values(np.maximum(u.values, 0.0)), q, d) ** q
    u_max = float(np.max(u.values))
    if u_max <= 0:
        return 0.0
    u_min_pos = float(np.min(u.values[u.values > 0], initial=u_max))
    s_lo = max(u_min_pos * 1e-3, u_max * 1e-12)
    levels = np.geomspace(s_lo, u_max, n_levels)
    sizes = np.array([measure(level_set(u, s, d)) for s in levels])
    integrand = q * levels ** (1.0 / (d - 1.0)) * sizes
    rhs = float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(levels)))
    # head: |E^s| is constant below the smallest positive sample
    rhs += sizes[0] * s_lo ** q
    return abs(lhs - rhs) / lhs
