"""Oscillatory dyadic-block profile whose variation has an empty subgradient.

The profile stacks scaled copies of a base bump S on the disjoint dyadic
blocks [2 - 2^(1-n), 2 - 2^(-n)] of (0, 2), with amplitude 4^(-n).  All
quantities of the separable 2D construction on (0,2)x(0,1) reduce to 1D
integrals over the first coordinate (the second coordinate contributes a
factor 1), and the module computes everything through that reduction.

Because block supports are disjoint, perturbing along the normalized negative
n-th block cancels that block's variation exactly, so the difference quotient
of the total variation equals minus the variation of the direction; the
quotients scale like -2^(n/2) and diverge, witnessing the empty subgradient.
For the mollified-step base profile, the explicit piecewise-linear field g
with |g| <= 1 and g = sign(S') pairs the full variation of the head block,
certifying a subgradient for the tail-shifted functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import CertificateReport, ResidualCheck
from .errors import ParameterError, ResolutionError, UnsupportedProfileError
from .grids import Grid, SampledFunction, total_variation

HAT = "hat"
MOLLIFIED_STEP = "mollified-step"

_MOLLIFIER_GRID_N = 32768
_bump_table = None


def _bump_cdf_table():
    """Normalized antiderivative of the standard bump exp(-1/(1-x^2)) on [-1, 1]."""
    global _bump_table
    if _bump_table is None:
        x = np.linspace(-1.0, 1.0, _MOLLIFIER_GRID_N + 1)
        with np.errstate(divide="ignore", over="ignore"):
            interior = np.exp(-1.0 / np.maximum(1.0 - x * x, 1e-300))
        interior[0] = interior[-1] = 0.0
        mass = np.concatenate(([0.0], np.cumsum(0.5 * (interior[1:] + interior[:-1]) * np.diff(x))))
        _bump_table = (x, interior / mass[-1], mass / mass[-1])
    return _bump_table


def _bump_cdf(t) -> np.ndarray:
    x, _, cdf = _bump_cdf_table()
    return np.interp(t, x, cdf, left=0.0, right=1.0)


def _bump_pdf(t) -> np.ndarray:
    x, pdf, _ = _bump_cdf_table()
    return np.interp(t, x, pdf, left=0.0, right=0.0)


def hat_profile(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0.0) & (x <= 1.0), 1.0 - np.abs(2.0 * x - 1.0), 0.0)


def mollified_step_profile(x) -> np.ndarray:
    """Step 1 on [1/4, 3/4] mollified at scale 1/8: smooth, plateau exactly 1."""
    x = np.asarray(x, dtype=float)
    return _bump_cdf(8.0 * x - 2.0) - _bump_cdf(8.0 * x - 6.0)


def mollified_step_derivative(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 8.0 * (_bump_pdf(8.0 * x - 2.0) - _bump_pdf(8.0 * x - 6.0))


def mollified_step_derivative2(x) -> np.ndarray:
    """Second derivative, for the smooth-profile summability variant."""
    x = np.asarray(x, dtype=float)

    def dpdf(t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) < 1.0
        tt = np.where(inside, t, 0.0)
        val = _bump_pdf(tt) * (-2.0 * tt) / np.maximum((1.0 - tt * tt) ** 2, 1e-300)
        return np.where(inside, val, 0.0)

    return 64.0 * (dpdf(8.0 * x - 2.0) - dpdf(8.0 * x - 6.0))


_PROFILES = {HAT: hat_profile, MOLLIFIED_STEP: mollified_step_profile}


@dataclass(frozen=True)
class OscillatoryProfile:
    """Base profile choice plus dyadic resolution parameters.

    The grid on (0, 2) is built from one uniform sub-grid per block, so every
    block-support endpoint 2 - 2^(-n) is a knot exactly and the discrete
    supports overlap only at shared endpoints where the profile vanishes.
    """

    kind: str = HAT
    n_max: int = 8
    cells_per_block: int = 1024

    def __post_init__(self):
        if self.kind not in _PROFILES:
            raise ParameterError(f"unknown profile kind {self.kind!r}")
        if self.n_max < 0:
            raise ParameterError("n_max must be nonnegative")
        if self.cells_per_block < 8:
            raise ResolutionError("need at least 8 cells in the finest block support")

    def base(self, x) -> np.ndarray:
        return _PROFILES[self.kind](x)

    def block_support(self, n: int) -> tuple:
        return (2.0 - 2.0 ** (1 - n), 2.0 - 2.0 ** (-n))

    def make_grid(self) -> Grid:
        parts = []
        for n in range(self.n_max + 1):
            lo, hi = self.block_support(n)
            sub = np.linspace(lo, hi, self.cells_per_block + 1)
            parts.append(sub if n == 0 else sub[1:])
        lo = self.block_support(self.n_max)[1]
        tail = np.linspace(lo, 2.0, self.cells_per_block + 1)
        parts.append(tail[1:])
        return Grid(np.concatenate(parts))

    def block_samples(self, n: int, grid: Grid) -> np.ndarray:
        """Samples of the n-th block copy S(2^n x - (2^(n+1) - 2)) on the grid."""
        if n > self.n_max:
            raise ParameterError(f"block {n} exceeds n_max={self.n_max}")
        arg = (2.0**n) * grid.knots - (2.0 ** (n + 1) - 2.0)
        return self.base(np.clip(arg, -1.0, 2.0))


def build_u(profile: OscillatoryProfile):
    """Samples of the full profile sum on the dyadic grid.

    Returns (u, tv) with tv the sampled total variation; for the builtin
    profiles the sampled variation of each block is exact (blocks are
    piecewise monotone with extrema on knots), so tv equals the geometric sum
    of block variations at sample resolution.
    """
    grid = profile.make_grid()
    vals = np.zeros_like(grid.knots)
    for n in range(profile.n_max + 1):
        vals += 4.0 ** (-n) * profile.block_samples(n, grid)
    u = SampledFunction(grid, vals)
    return u, total_variation(vals)


@dataclass(frozen=True, eq=False)
class DirectionStep:
    """Normalized negative block direction and its difference quotient."""

    n: int
    t_n: float
    v_n: SampledFunction
    quotient: float
    direction_variation: float
    cancellation_residual: float
    v_l2: float


def direction_step(profile: OscillatoryProfile, n: int) -> DirectionStep:
    """Difference quotient of the sampled variation along block direction n.

    The quotient equals minus the variation of the direction up to round-off:
    supports are exactly disjoint at sample resolution, so the n-th block is
    cancelled exactly and no other block changes.
    """
    grid = profile.make_grid()
    u, tv_u = build_u(profile)
    block = profile.block_samples(n, grid)
    l2 = math.sqrt(
        float(np.sum(0.5 * (block[1:] ** 2 + block[:-1] ** 2) * grid.widths))
    )
    v = -block / l2
    t_n = 4.0 ** (-n) * l2
    perturbed = u.values + t_n * v
    tv_pert = total_variation(perturbed)
    quotient = (tv_pert - tv_u) / t_n
    dv = total_variation(v)
    cancel = abs(tv_pert - (tv_u - t_n * dv)) / max(tv_u, 1.0)
    v_l2 = math.sqrt(float(np.sum(0.5 * (v[1:] ** 2 + v[:-1] ** 2) * grid.widths)))
    return DirectionStep(
        n=n,
        t_n=t_n,
        v_n=SampledFunction(grid, v),
        quotient=quotient,
        direction_variation=dv,
        cancellation_residual=cancel,
        v_l2=v_l2,
    )


def certificate_field(t) -> np.ndarray:
    """Piecewise-linear field with |g| <= 1 and g = sign(S') off the plateaus
    of the mollified step."""
    t = np.asarray(t, dtype=float)
    return np.select(
        [t < 0.125, t < 0.375, t < 0.625, t < 0.875, t <= 1.0],
        [8.0 * t, 1.0, -8.0 * t + 4.0, -1.0, 8.0 * t - 8.0],
        default=0.0,
    )


def pairing_residual(g_vals: np.ndarray, sprime: np.ndarray, x: np.ndarray) -> float:
    """|integral of g S' - integral of |S'||, same trapezoid on both sides."""
    dx = np.diff(x)
    lhs = np.sum(0.5 * ((g_vals * sprime)[1:] + (g_vals * sprime)[:-1]) * dx)
    rhs = np.sum(0.5 * (np.abs(sprime)[1:] + np.abs(sprime)[:-1]) * dx)
    return abs(float(lhs - rhs))


def dual_certificate_g(
    profile: OscillatoryProfile, n_cut: int = 1, n_samples: int = 8193
) -> CertificateReport:
    """Verify the explicit subgradient certificate for the tail-shifted
    functional at the oscillatory profile.

    Requires the mollified-step base (the field below is built for it) and the
    head cut after the first block.  Checks |g| <= 1, sign agreement with S'
    wherever S' is nonzero, the pairing identity (g pairs the full variation),
    and that the sampled head variation matches the integral of |S'|.
    """
    if profile.kind != MOLLIFIED_STEP:
        raise UnsupportedProfileError("certificate is built for the mollified step")
    if n_cut != 1:
        raise ParameterError("the explicit certificate covers n_cut = 1")
    x = np.linspace(0.0, 1.0, n_samples)
    g = certificate_field(x)
    sp = mollified_step_derivative(x)

    sup_excess = max(float(np.max(np.abs(g))) - 1.0, 0.0)
    active = np.abs(sp) > 1e-10 * float(np.max(np.abs(sp)))
    sign_mismatch = (
        float(np.max(np.abs(g[active] - np.sign(sp[active])))) if np.any(active) else 0.0
    )
    pairing = pairing_residual(g, sp, x)

    dx = np.diff(x)
    total_rise = float(np.sum(0.5 * (np.abs(sp)[1:] + np.abs(sp)[:-1]) * dx))
    head_tv = total_variation(profile.base(x))
    head_match = abs(head_tv - total_rise)

    checks = (
        ResidualCheck("sup_bound", sup_excess, 1e-12),
        ResidualCheck("sign_agreement", sign_mismatch, 1e-12),
        ResidualCheck("pairing_identity", pairing, 1e-8),
        ResidualCheck("head_variation_match", head_match, 1e-5),
    )
    return CertificateReport("tail-shifted subgradient certificate", checks)


def hessian_block_series(profile: OscillatoryProfile, n_terms: int, n_samples: int = 8193):
    """Partial sums of 4^(-n) * ||S_n''||_1 = 2^(-n) ||S''||_1 for the smooth
    profile; their convergence (ratio 1/2) is the summability behind the
    smoother variant of the construction."""
    if profile.kind != MOLLIFIED_STEP:
        raise UnsupportedProfileError("second derivatives need the smooth profile")
    x = np.linspace(0.0, 1.0, n_samples)
    s2 = np.abs(mollified_step_derivative2(x))
    norm1 = float(np.sum(0.5 * (s2[1:] + s2[:-1]) * np.diff(x)))
    terms = [4.0 ** (-n) * (2.0**n) * norm1 for n in range(n_terms)]
    return np.cumsum(terms)
