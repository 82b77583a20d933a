"""Radial denoising on the unit ball via the weighted 1D reduction.

For dimension d the radial problem reduces to the weighted 1D problem with
phi = rho = r**(d-1).  For d = 3 and data f(r) = 1/r the minimizer is known in
closed form on the validity window alpha in [1/4, 1/2):

    u(r) = (1-2*alpha)/r on (0, c),  (1-2*alpha)/c on (c, 1),

with the breakpoint c the root in (0, 1) of  c^3 + 3c/(2*alpha - 1) + 2 = 0.
That root is exactly the condition that the primitive field U vanishes at
r = 1.  The module evaluates u, U, xi and the certifying radial vector field z
in closed form, solves the cubic, classifies boundedness for power-law data,
and evaluates the wall-versus-flat cost comparison integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .certificates import CertificateReport, ResidualCheck
from .errors import DataError, ParameterError, UnsupportedRegimeError
from .grids import Grid, SampledFunction
from .rof import RofSolution, discrete_energy
from .weights import WeightPair, build_transform


def cubic_residual(c: float, alpha: float) -> float:
    return c**3 + 3.0 * c / (2.0 * alpha - 1.0) + 2.0


def solve_cubic_c(alpha: float) -> float:
    """Root in (0, 1) of the breakpoint cubic, to |residual| <= 1e-12.

    The cubic changes sign on (0, 1) for every alpha in (0, 1/2): it equals 2
    at 0 and 6*alpha/(2*alpha - 1) < 0 at 1.
    """
    if not (0.0 < alpha < 0.5):
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    c = brentq(cubic_residual, 1e-300, 1.0, args=(alpha,), xtol=1e-15, rtol=8.9e-16)
    # one Newton polish; the derivative 3c^2 + 3/(2a-1) is bounded away from 0
    # at the root
    deriv = 3.0 * c * c + 3.0 / (2.0 * alpha - 1.0)
    c -= cubic_residual(c, alpha) / deriv
    if not (0.0 < c < 1.0 and abs(cubic_residual(c, alpha)) <= 1e-12):
        raise ParameterError(f"cubic root refinement failed for alpha={alpha}")
    return float(c)


@dataclass(frozen=True)
class RadialProblem:
    """Parameters of a radial denoising instance with builtin power data."""

    d: int
    alpha: float
    beta: Optional[float] = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ParameterError("dimension d must be an integer >= 2")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterError("alpha must be positive")
        if self.beta is not None and 2.0 * self.beta >= self.d:
            raise DataError(
                f"r**(-{self.beta}) is not square integrable with weight r**{self.d - 1}"
            )


@dataclass(frozen=True)
class ExplicitSolution:
    """Closed-form minimizer for d = 3, f = 1/r (validity alpha in [1/4, 1/2)).

    Direct construction does not re-validate c against the cubic, so
    perturbed instances can be built to exercise failing certificates; use
    :func:`explicit_minimizer` for the certified root.
    """

    alpha: float
    c: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5):
            raise ParameterError("alpha must lie in (0, 1/2)")
        if not (0.0 < self.c < 1.0):
            raise ParameterError("c must lie in (0, 1)")

    @property
    def flat_value(self) -> float:
        return (1.0 - 2.0 * self.alpha) / self.c

    def u(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        coeff = 1.0 - 2.0 * self.alpha
        return np.where(r < self.c, coeff / np.maximum(r, 1e-300), coeff / self.c)

    def U(self, r) -> np.ndarray:
        """Primitive integral of (u - f) r^2 from 0, in closed form."""
        r = np.asarray(r, dtype=float)
        a, c = self.alpha, self.c
        coeff = 1.0 - 2.0 * a
        inner = -a * r * r
        outer = -a * c * c + coeff * (r**3 - c**3) / (3.0 * c) - (r * r - c * c) / 2.0
        return np.where(r <= c, inner, outer)

    def xi(self, r) -> np.ndarray:
        """U / (alpha r^2); equals -1 on (0, c], the certifying field there."""
        r = np.asarray(r, dtype=float)
        return self.U(r) / (self.alpha * np.maximum(r, 1e-300) ** 2)

    def z(self, r) -> np.ndarray:
        """Radial dual field: -1 inside, U/(alpha r^2) in the middle, 0 outside."""
        r = np.asarray(r, dtype=float)
        return np.where(r < self.c, -1.0, np.where(r < 1.0, self.xi(r), 0.0))

    def residual_v(self, r) -> np.ndarray:
        """(u - f)/alpha, the target for div z."""
        r = np.asarray(r, dtype=float)
        a, c = self.alpha, self.c
        rr = np.maximum(r, 1e-300)
        return np.where(
            r < c, -2.0 / rr, ((1.0 - 2.0 * a) / c - 1.0 / rr) / a
        )


def explicit_minimizer(alpha: float) -> ExplicitSolution:
    """Certified closed-form minimizer; alpha below 1/4 is rejected because
    the sufficient verification window does not cover it."""
    if not (0.0 < alpha < 0.5):
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    if alpha < 0.25:
        raise UnsupportedRegimeError(
            "closed form is only certified for alpha in [1/4, 1/2)"
        )
    return ExplicitSolution(alpha=alpha, c=solve_cubic_c(alpha))


def sample_solution(sol: ExplicitSolution, grid: Grid) -> RofSolution:
    """Sample the closed-form minimizer as a RofSolution (knots and cells)."""
    w = WeightPair.power(3, sol.alpha)
    tm = build_transform(w, grid)
    r = grid.knots
    u = SampledFunction(grid, sol.u(r))
    U = SampledFunction(grid, sol.U(r))
    xi = SampledFunction(grid, np.clip(sol.xi(r), -1.0, 1.0))
    cells = SampledFunction(Grid(grid.midpoints), sol.u(grid.midpoints))
    F = antiderivative_power(grid, beta=1.0, d=3)
    energy = discrete_energy(
        cells.values, tm.t_values, F, w.rho(r)[1:-1], sol.alpha
    )
    return RofSolution(u=u, U=U, xi=xi, energy=energy, u_cells=cells, transform=tm)


def antiderivative_power(grid: Grid, beta: float, d: int) -> np.ndarray:
    """Exact values of integral of r**(-beta) r**(d-1) from 0 on the knots."""
    if beta >= d:
        raise DataError("non-integrable head")
    return grid.knots ** (d - beta) / (d - beta)


def dual_field_z(sol: ExplicitSolution, grid: Grid) -> CertificateReport:
    """Certify the explicit radial field z for d = 3.

    Checks the sup bound |z| <= 1, continuity at the breakpoint and at the
    boundary, and the pointwise divergence identity
    z'(r) + 2 z(r)/r = (u - f)/alpha on both pieces.  Continuity at the
    breakpoint is evaluated through the reduced quadratic-coefficient formula
    and continuity at the boundary through the primitive, so each check fails
    independently when c does not solve the cubic.
    """
    a, c = sol.alpha, sol.c
    r = grid.knots
    r = r[(r > 0) & (r <= 1.0)]

    z_vals = sol.z(r)
    sup_excess = max(float(np.max(np.abs(z_vals))) - 1.0, 0.0)

    # middle branch written with the cubic eliminated: equals z only when c
    # is the true root
    coeff = 1.0 - 2.0 * a
    reduced_at_c = (1.0 / (2.0 * a)) * (1.0 / c**2 - 1.0) + (
        coeff / (3.0 * c * a)
    ) * (c - 1.0 / c**2)
    cont_c = abs(reduced_at_c - (-1.0))
    cont_1 = abs(float(sol.U(1.0)) / a)  # z(1-) = U(1)/alpha, must meet z = 0

    # divergence identity on both open pieces
    inner = r[r < c]
    v_in = sol.residual_v(inner)
    div_in = -2.0 / inner if inner.size else np.zeros(0)
    outer = r[(r > c) & (r < 1.0)]
    # z = a2 r + a0 + am2 / r^2 on (c, 1)  =>  div z = 3 a2 + 2 a0 / r
    a2 = coeff / (3.0 * c * a)
    a0 = -1.0 / (2.0 * a)
    div_out = 3.0 * a2 + 2.0 * a0 / outer if outer.size else np.zeros(0)
    v_out = sol.residual_v(outer)
    div_resid = 0.0
    if inner.size:
        div_resid = float(np.max(np.abs(div_in - v_in)))
    if outer.size:
        div_resid = max(div_resid, float(np.max(np.abs(div_out - v_out))))

    checks = (
        ResidualCheck("sup_bound", sup_excess, 1e-10),
        ResidualCheck("continuity_breakpoint", cont_c, 1e-10),
        ResidualCheck("continuity_boundary", cont_1, 1e-10),
        ResidualCheck("divergence_identity", div_resid, 1e-8),
    )
    notes = (f"alpha={a!r}", f"c={c!r}")
    return CertificateReport("radial dual field", checks, notes)


@dataclass(frozen=True)
class BoundednessVerdict:
    verdict: str  # bounded | unbounded | indeterminate
    reason: str

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason}


def classify_power(beta: float, d: int) -> BoundednessVerdict:
    """Boundedness of the minimizer for data r**(-beta) near r = 0."""
    if int(d) != d or d < 2:
        raise ParameterError("dimension d must be an integer >= 2")
    if 2.0 * beta >= d:
        raise DataError(f"r**(-{beta}) is not square integrable in dimension {d}")
    if d == 2:
        return BoundednessVerdict("bounded", "square-integrable radial data in the plane")
    if beta < 1.0:
        return BoundednessVerdict("bounded", "growth slower than 1/r")
    if beta > 1.0:
        return BoundednessVerdict("unbounded", "growth faster than 1/r")
    return BoundednessVerdict(
        "indeterminate",
        "critical growth 1/r: decided only case by case (explicit family for d=3)",
    )


def classify_general(
    f: SampledFunction, d: int, margin: float = 0.05
) -> BoundednessVerdict:
    """Estimate the growth exponent of f near 0 and classify.

    Least-squares slope of log f against log(1/r) over the leading grid
    decade; slopes separated from 1 by ``margin`` give a verdict, anything
    inside the band is indeterminate.
    """
    if np.any(f.values < 0):
        raise DataError("classification requires nonnegative data")
    r = f.grid.knots
    mask = r <= 10.0 * r[0]
    rr = r[mask]
    vv = f.values[mask]
    good = vv > 0
    if np.count_nonzero(good) < 2:
        return BoundednessVerdict("bounded", "data vanishes near 0")
    x = np.log(1.0 / rr[good])
    y = np.log(vv[good])
    slope = float(np.polyfit(x, y, 1)[0])
    if slope > 1.0 + margin:
        return BoundednessVerdict("unbounded", f"log-log growth slope {slope:.4f} > 1")
    if slope < 1.0 - margin:
        return BoundednessVerdict("bounded", f"log-log growth slope {slope:.4f} < 1")
    return BoundednessVerdict(
        "indeterminate", f"log-log growth slope {slope:.4f} within {margin} of 1"
    )


@dataclass(frozen=True)
class SwitchingIntegrals:
    i_value: float
    j_value: float
    ratio: float
    i_divergent: bool
    j_divergent: bool


def _power_primitive(p: float, lo: float, hi: float) -> float:
    """Integral of r**p over (lo, hi) with lo >= 0; inf when divergent at 0."""
    if lo == 0.0 and p <= -1.0:
        return math.inf
    if p == -1.0:
        return math.log(hi / lo)
    return (hi ** (p + 1.0) - lo ** (p + 1.0)) / (p + 1.0)


def switching_inequality(beta: float, d: int, alpha: float, nu: float) -> SwitchingIntegrals:
    """Closed-form wall-following vs. flat-continuation cost integrals.

    ``I`` is the cost of staying on the lower wall on (0, nu); ``J`` the cost
    of switching to a constant there.  I/J -> 0 as nu -> 0 witnesses that the
    wall (hence unboundedness) wins for beta > 1.  Divergent pieces are
    flagged: a divergent J means the flat continuation is infinitely bad, so
    the ratio is reported as 0.
    """
    if not beta > 1.0:
        raise ParameterError("comparison is formulated for beta > 1")
    if int(d) != d or d < 3:
        raise ParameterError("comparison requires integer d >= 3")
    if not (0.0 < nu < 1.0):
        raise ParameterError("nu must lie in (0, 1)")
    if alpha <= 0:
        raise ParameterError("alpha must be positive")

    D = float(d - 1)
    # I: integral of (|alpha*D*r^{d-3} - beta*r^{d-beta-2}| + alpha^2 D^2 r^{d-3})
    p_beta = d - beta - 2.0
    p_two = d - 3.0
    r_star = (beta / (alpha * D)) ** (1.0 / (beta - 1.0))  # sign change of the modulus
    i_divergent = p_beta <= -1.0 or p_two <= -1.0
    if i_divergent:
        i_val = math.inf
    else:
        def signed_piece(lo, hi):
            return beta * _power_primitive(p_beta, lo, hi) - alpha * D * _power_primitive(
                p_two, lo, hi
            )

        if nu <= r_star:
            modulus = signed_piece(0.0, nu)
        else:
            modulus = signed_piece(0.0, r_star) - signed_piece(r_star, nu)
        i_val = modulus + alpha**2 * D**2 * _power_primitive(p_two, 0.0, nu)

    # J: integral of (A - r^{-beta})^2 r^{d-1} with A = nu^{-beta} - alpha*D/nu
    A = nu ** (-beta) - alpha * D / nu
    sq = _power_primitive(d - 1.0 - 2.0 * beta, 0.0, nu)
    j_divergent = math.isinf(sq)
    if j_divergent:
        j_val = math.inf
    else:
        j_val = (
            A * A * _power_primitive(d - 1.0, 0.0, nu)
            - 2.0 * A * _power_primitive(d - 1.0 - beta, 0.0, nu)
            + sq
        )

    if i_divergent:
        ratio = math.inf
    elif j_divergent:
        ratio = 0.0
    else:
        ratio = i_val / j_val
    return SwitchingIntegrals(i_val, j_val, ratio, i_divergent, j_divergent)
