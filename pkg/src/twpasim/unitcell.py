"""Flux-dependent SNAIL unit-cell quantities.

A cell is a loop of three large Josephson junctions (critical current
``I0``) in one arm and a single small junction (``r * I0``) in the other.
The loop current as a function of the superconducting phase ``phi`` across
the cell, with an external flux ``phi_ext`` (radians) threading the loop,
is

    I(phi) / I0 = r sin(phi) + sin((phi - phi_ext) / 3).

Expanding around the equilibrium phase ``phi*`` (the zero of the loop
current on the branch continuously connected to phi* = 0 at zero flux)
gives the cubic current-phase relation

    I(phi* + phi) / I0 = alpha * phi - beta_t * phi^2 - gamma_t * phi^3,

whose coefficients set the cell inductance and the three- and four-wave
mixing strengths of the transmission line built from these cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import E_CHARGE, HBAR, PHI0, R_Q
from .errors import NonConvergence, NonPositiveInductance, NotFound

_TWO_PI = 2.0 * math.pi

# equilibrium root polish targets; the residual invariant is 1e-12
_RESIDUAL_TOL = 1e-14
_NEWTON_MAX_ITER = 80
_CONTINUATION_STEP = 0.05  # rad of external flux per continuation step


@dataclass(frozen=True)
class SnailSpec:
    """Physical parameters of one unit cell and the cell count.

    Attributes
    ----------
    I0 : float
        Critical current of the large junctions [A].
    r : float
        Small-to-large junction critical-current ratio, 0 < r < 1.
    Cg : float
        Ground capacitance per cell [F].
    CJ : float
        Junction (plasma) capacitance per cell [F].
    N : int
        Number of cells in the line.
    tan_delta : float
        Dielectric loss tangent (>= 0).
    """

    I0: float
    r: float
    Cg: float
    CJ: float
    N: int
    tan_delta: float = 0.0

    def __post_init__(self):
        if not (self.I0 > 0):
            raise ValueError("I0 must be positive")
        if not (0.0 < self.r < 1.0):
            raise ValueError("r must be in (0, 1)")
        if not (self.Cg > 0 and self.CJ > 0):
            raise ValueError("capacitances must be positive")
        if not (int(self.N) == self.N and self.N >= 1):
            raise ValueError("N must be an integer >= 1")
        if self.tan_delta < 0:
            raise ValueError("tan_delta must be >= 0")


@dataclass(frozen=True)
class FluxPoint:
    """Equilibrium phase at one external flux.

    ``phi_ext`` is in flux-quantum units; ``phi_ext_rad`` and ``phi_star``
    are radians.  ``phi_star`` lies on the branch through (0, 0).
    """

    phi_ext: float
    phi_ext_rad: float
    phi_star: float


@dataclass(frozen=True)
class CellCoefficients:
    """Expansion coefficients and derived line parameters at one flux.

    ``alpha``, ``beta_t``, ``gamma_t`` are the dimensionless linear,
    quadratic and cubic current-phase coefficients.  ``L`` is the cell
    inductance [H]; ``omega0 = 1/sqrt(L Cg)`` and ``omegaJ = 1/sqrt(L CJ)``
    are the characteristic and plasma angular frequencies [rad/s];
    ``Z = sqrt(L/Cg)`` [Ohm].  ``g3`` and ``g4`` are the three- and
    four-wave rates [rad/s]; ``beta`` and ``gamma`` are the dimensionless
    couplings that enter the wave equation:

        beta  = 6 g3 sqrt(R_Q / (pi omega0^2 Z))
        gamma = 8 g4 R_Q / (pi omega0 Z)
    """

    flux: FluxPoint
    alpha: float
    beta_t: float
    gamma_t: float
    L: float
    omega0: float
    omegaJ: float
    Z: float
    g3: float
    g4: float
    beta: float
    gamma: float


def _current_residual(phi: float, r: float, phi_ext_rad: float) -> float:
    return r * math.sin(phi) + math.sin((phi - phi_ext_rad) / 3.0)


def _residual_derivative(phi: float, r: float, phi_ext_rad: float) -> float:
    return r * math.cos(phi) + math.cos((phi - phi_ext_rad) / 3.0) / 3.0


def _newton_polish(phi: float, r: float, phi_ext_rad: float) -> float:
    for _ in range(_NEWTON_MAX_ITER):
        f = _current_residual(phi, r, phi_ext_rad)
        if abs(f) < _RESIDUAL_TOL:
            return phi
        fp = _residual_derivative(phi, r, phi_ext_rad)
        if fp <= 0.0:
            # branch fold: the stable branch has a positive derivative
            raise NonConvergence(
                f"equilibrium branch folds near phi*={phi:.6f} rad "
                f"(r={r}, phi_ext={phi_ext_rad:.6f} rad)")
        step = f / fp
        if abs(step) > 1.0:
            step = math.copysign(1.0, step)
        phi -= step
    raise NonConvergence(
        f"equilibrium phase did not converge for r={r}, "
        f"phi_ext={phi_ext_rad:.6f} rad")


def _continue_equilibrium(r: float, start_rad: float, start_phi: float,
                          target_rad: float) -> float:
    """Track the equilibrium root from one flux to another in small steps."""
    span = target_rad - start_rad
    nstep = max(1, int(math.ceil(abs(span) / _CONTINUATION_STEP)))
    phi = start_phi
    for j in range(1, nstep + 1):
        phi = _newton_polish(phi, r, start_rad + span * j / nstep)
    return phi


def equilibrium_phase(spec: SnailSpec, phi_ext: float) -> FluxPoint:
    """Equilibrium phase of the cell at external flux ``phi_ext`` [Phi0].

    The root of the loop current is tracked by continuation from
    (phi_ext, phi*) = (0, 0), which selects the branch the device follows
    when the flux is swept up from zero.

    Raises
    ------
    NonConvergence
        If the Newton iteration fails or the branch folds (large ``r``
        close to the hysteretic regime).
    """
    if not math.isfinite(phi_ext):
        raise ValueError("phi_ext must be finite")
    phi_ext_rad = _TWO_PI * phi_ext
    if phi_ext_rad == 0.0:
        return FluxPoint(phi_ext, 0.0, 0.0)
    phi = _continue_equilibrium(spec.r, 0.0, 0.0, phi_ext_rad)
    return FluxPoint(phi_ext, phi_ext_rad, phi)


def cell_coefficients(spec: SnailSpec, fp: FluxPoint,
                      consistent_derivatives: bool = False) -> CellCoefficients:
    """Expansion coefficients and line parameters at a flux point.

    With ``consistent_derivatives=False`` (default) the linear coefficient
    is ``alpha = r cos(phi*) + cos((phi* - phi_ext)/3)``; with the flag set
    the second cosine carries the 1/3 factor of the true first derivative
    of the loop current, matching the 1/9 and 1/27 factors of ``beta_t``
    and ``gamma_t``.

    Raises
    ------
    NonPositiveInductance
        If ``alpha <= 0`` at this flux.
    """
    r = spec.r
    ps = fp.phi_star
    arg = (ps - fp.phi_ext_rad) / 3.0

    inner = math.cos(arg) / 3.0 if consistent_derivatives else math.cos(arg)
    alpha = r * math.cos(ps) + inner
    beta_t = 0.5 * (r * math.sin(ps) + math.sin(arg) / 9.0)
    gamma_t = (r * math.cos(ps) + math.cos(arg) / 27.0) / 6.0

    if alpha <= 0.0:
        raise NonPositiveInductance(
            f"alpha={alpha:.6g} <= 0 at phi_ext={fp.phi_ext} Phi0")

    L = PHI0 / (_TWO_PI * spec.I0 * alpha)
    omega0 = 1.0 / math.sqrt(L * spec.Cg)
    omegaJ = 1.0 / math.sqrt(L * spec.CJ)
    Z = math.sqrt(L / spec.Cg)

    Ec = E_CHARGE**2 / (2.0 * spec.Cg)
    g3 = (beta_t / (3.0 * alpha)) * math.sqrt(Ec * HBAR * omega0) / HBAR
    g4 = (gamma_t / (2.0 * alpha)) * Ec / HBAR

    beta = 6.0 * g3 * math.sqrt(R_Q / (math.pi * omega0**2 * Z))
    gamma = 8.0 * g4 * R_Q / (math.pi * omega0 * Z)

    return CellCoefficients(flux=fp, alpha=alpha, beta_t=beta_t,
                            gamma_t=gamma_t, L=L, omega0=omega0,
                            omegaJ=omegaJ, Z=Z, g3=g3, g4=g4,
                            beta=beta, gamma=gamma)


def flux_sweep(spec: SnailSpec, flux_grid,
               consistent_derivatives: bool = False) -> list[CellCoefficients]:
    """Cell coefficients at each flux of ``flux_grid`` [Phi0], in order.

    The equilibrium root is tracked incrementally between consecutive grid
    points, so sweeps are much cheaper than independent point solves.
    Errors carry the index of the offending grid point.
    """
    grid = [float(f) for f in np.atleast_1d(flux_grid)]
    if len(grid) == 0:
        raise ValueError("flux grid is empty")
    if not all(math.isfinite(f) for f in grid):
        raise ValueError("flux grid contains non-finite values")

    out = []
    prev_rad, prev_phi = 0.0, 0.0
    for i, f in enumerate(grid):
        rad = _TWO_PI * f
        try:
            phi = _continue_equilibrium(spec.r, prev_rad, prev_phi, rad)
            fp = FluxPoint(f, rad, phi)
            out.append(cell_coefficients(spec, fp, consistent_derivatives))
        except (NonConvergence, NonPositiveInductance) as exc:
            raise type(exc)(f"flux grid index {i} ({f} Phi0): {exc}") from exc
        prev_rad, prev_phi = rad, phi
    return out


def kerr_free_flux(spec: SnailSpec, scan_points: int = 2001) -> float:
    """Smallest flux in (0, 0.5] Phi0 where ``gamma_t`` changes sign.

    A sign-change scan over ``scan_points`` fluxes brackets the root and a
    bisection refines it until |gamma_t| < 1e-12.

    Raises
    ------
    NotFound
        If ``gamma_t`` does not change sign on (0, 0.5] Phi0 (asymmetry
        ratio too small or too large for a Kerr-free point).
    """
    grid = np.linspace(0.0, 0.5, scan_points)

    def gamma_t_at(flux_rad: float, phi_guess: float, prev_rad: float):
        phi = _continue_equilibrium(spec.r, prev_rad, phi_guess, flux_rad)
        arg = (phi - flux_rad) / 3.0
        return (spec.r * math.cos(phi) + math.cos(arg) / 27.0) / 6.0, phi

    prev_rad, prev_phi = 0.0, 0.0
    prev_g = (spec.r + 1.0 / 27.0) / 6.0  # gamma_t at zero flux
    bracket = None
    for f in grid[1:]:
        rad = _TWO_PI * f
        try:
            g, phi = gamma_t_at(rad, prev_phi, prev_rad)
        except NonConvergence as exc:
            raise NotFound(
                f"equilibrium tracking failed before any sign change: {exc}"
            ) from exc
        if g == 0.0 or (g < 0.0) != (prev_g < 0.0):
            bracket = (prev_rad, rad, prev_phi)
            break
        prev_rad, prev_phi, prev_g = rad, phi, g
    if bracket is None:
        raise NotFound(
            f"gamma_t has no sign change on (0, 0.5] Phi0 for r={spec.r}")

    lo, hi, phi_lo = bracket
    g_lo, _ = gamma_t_at(lo, phi_lo, lo) if lo > 0 else (prev_g, 0.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid, phi_mid = gamma_t_at(mid, phi_lo, lo)
        if abs(g_mid) < 1e-12:
            return mid / _TWO_PI
        if (g_mid < 0.0) == (g_lo < 0.0):
            lo, phi_lo, g_lo = mid, phi_mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / _TWO_PI
