"""Reference objects: the cubic soliton W, Aubin-Talenti bubbles, sharp
constants and the single-soliton minimizer of the cubic limit problem."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels
from .errors import InputError, ResolutionError, ShootingBracketError
from .functionals import threshold_D, threshold_D0
from .radial_core import RadialGrid, integrate_radial

__all__ = [
    "SolitonW",
    "Bubble",
    "solve_W",
    "reference_soliton",
    "sobolev_constant",
    "SOBOLEV_EXACT",
    "gn_constant",
    "single_soliton",
    "m0_single",
    "bubble_profile",
    "cutoff_bubble",
    "reference_constants",
]

# 3 (pi/2)^{4/3}, the closed-form value the quadrature must reproduce
SOBOLEV_EXACT = 3.0 * (np.pi / 2.0) ** (4.0 / 3.0)


@dataclass(frozen=True, eq=False)
class SolitonW:
    """Positive radial solution of ``-W'' - (2/r) W' + W = W^2``.

    ``profile`` holds ``W`` at the grid nodes; ``evaluate`` resamples it
    anywhere (spline on the shooting data, exact exponential tail beyond).
    """

    grid: RadialGrid
    profile: np.ndarray
    derivative: np.ndarray
    normW2_sq: float
    grad_sq: float
    cubic: float
    w_at_zero: float
    tail_amplitude: float
    splice_radius: float
    _spline: CubicSpline = field(repr=False)

    @property
    def norm(self) -> float:
        """``||W||_2``."""
        return float(np.sqrt(self.normW2_sq))

    @property
    def nehari_residual(self) -> float:
        return abs(self.grad_sq + self.normW2_sq - self.cubic) / self.cubic

    @property
    def pohozaev_residual(self) -> float:
        return abs(0.5 * self.grad_sq + 1.5 * self.normW2_sq - self.cubic) / self.cubic

    def evaluate(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        near = r <= self.splice_radius
        out[near] = self._spline(r[near])
        far = r[~near]
        out[~near] = self.tail_amplitude * np.exp(-far) / far
        return out


def _shoot(w0: float, dr: float, nsteps: int, w_buf, dw_buf) -> tuple[int, int]:
    return kernels.shoot_soliton(float(w0), float(dr), int(nsteps), w_buf, dw_buf)


def solve_W(grid: RadialGrid | None = None, shoot_tol: float = 1e-15,
            bracket: tuple[float, float] = (1.0, 20.0)) -> SolitonW:
    """Shoot ``W(0)`` by bisection and sample ``W`` on ``grid``.

    A trajectory whose height is too large crosses zero; one that is too
    small turns back up before crossing and oscillates about the constant
    state 1.  Bisection on this dichotomy converges to the decaying
    solution.  Both bracketing trajectories follow ``W`` until their
    separation grows to the size of ``W`` itself; past that radius the
    profile is continued by the exact linear tail ``A e^{-r}/r``.

    Parameters
    ----------
    grid : RadialGrid
        Nodes at which the profile is returned; RK4 steps with the grid
        spacing starting from ``r = 0``.  Default ``n = 4096``, ``R = 30``.
    shoot_tol : float
        Relative bracket width at which bisection stops.
    bracket : (float, float)
        Search interval for ``W(0)``.
    """
    grid = grid or RadialGrid(30.0, 4096)
    n, dr = grid.n, grid.dr
    lo, hi = bracket
    wlo, dlo = np.zeros(n + 1), np.zeros(n + 1)
    whi, dhi = np.zeros(n + 1), np.zeros(n + 1)
    s_lo, _ = _shoot(lo, dr, n, wlo, dlo)
    s_hi, _ = _shoot(hi, dr, n, whi, dhi)
    # the constant state W = 1 never crosses zero; count it as too small
    if s_lo == 1 or s_hi != 1:
        raise ShootingBracketError(
            f"W(0) not bracketed in [{lo}, {hi}]: statuses {s_lo} at low end, {s_hi} at high end"
        )
    for _ in range(200):
        if hi - lo <= shoot_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        status, _ = _shoot(mid, dr, n, wlo, dlo)
        if status == 1:
            hi = mid
        else:
            lo = mid
    _, stop_lo = _shoot(lo, dr, n, wlo, dlo)
    _, stop_hi = _shoot(hi, dr, n, whi, dhi)
    stop = min(stop_lo, stop_hi)
    w = 0.5 * (wlo[: stop + 1] + whi[: stop + 1])
    dw = 0.5 * (dlo[: stop + 1] + dhi[: stop + 1])
    gap = np.abs(whi[: stop + 1] - wlo[: stop + 1])
    # trust the shot while the two trajectories agree to 1e-3 of W
    bad = np.nonzero(gap > 1e-3 * np.abs(w))[0]
    cut = (bad[0] if bad.size else stop) - 1
    cut = int(min(cut, n))
    r_cut = cut * dr
    if r_cut < 5.0:
        raise ResolutionError(f"shooting trajectory separates at r={r_cut:.3g}; grid too coarse")
    # match A e^{-r}/r to the value at the splice point
    amp = w[cut] * r_cut * np.exp(r_cut)
    r_all = dr * np.arange(n + 1)
    prof = np.empty(n + 1)
    dprof = np.empty(n + 1)
    prof[: cut + 1] = w[: cut + 1]
    dprof[: cut + 1] = dw[: cut + 1]
    rt = r_all[cut + 1:]
    prof[cut + 1:] = amp * np.exp(-rt) / rt
    dprof[cut + 1:] = -amp * np.exp(-rt) * (1.0 / rt + 1.0 / rt**2)
    spline = CubicSpline(np.concatenate((-r_all[cut:0:-1], r_all[: cut + 1])),
                         np.concatenate((prof[cut:0:-1], prof[: cut + 1])))
    nodes = prof[1:]
    dnodes = dprof[1:]
    mass = integrate_radial(nodes**2, grid)
    grad = integrate_radial(dnodes**2, grid)
    cubic = integrate_radial(nodes**3, grid)
    return SolitonW(
        grid=grid, profile=nodes, derivative=dnodes, normW2_sq=mass, grad_sq=grad, cubic=cubic,
        w_at_zero=float(0.5 * (lo + hi)), tail_amplitude=float(amp), splice_radius=float(r_cut),
        _spline=spline,
    )


@lru_cache(maxsize=4)
def reference_soliton(R: float = 30.0, n: int = 4096) -> SolitonW:
    """Cached ``solve_W`` at the reference resolution."""
    return solve_W(RadialGrid(R, n))


def gn_constant(soliton: SolitonW) -> float:
    """``C_GN(3) = (2/||W||_2)^{1/3}``."""
    return (2.0 / soliton.norm) ** (1.0 / 3.0)


def bubble_profile(r, epsilon: float) -> np.ndarray:
    """Aubin-Talenti bubble ``3^{1/4} eps^{1/2} (eps^2 + r^2)^{-1/2}``."""
    r = np.asarray(r, dtype=float)
    return 3.0**0.25 * np.sqrt(epsilon) / np.sqrt(epsilon**2 + r**2)


def _bubble_gradient(r, epsilon):
    return -(3.0**0.25) * np.sqrt(epsilon) * r / (epsilon**2 + r**2) ** 1.5


def _bubble_integrals(grid: RadialGrid, epsilon: float) -> tuple[float, float]:
    """Tail-corrected ``(||grad U||^2, ||U||_6^6)``."""
    r, R, e = grid.r, grid.R, epsilon
    grad = integrate_radial(_bubble_gradient(r, e) ** 2, grid)
    sext = integrate_radial(bubble_profile(r, e) ** 6, grid)
    # beyond R: |U'|^2 r^2 = sqrt3 e (r^-2 - 3e^2 r^-4 + 6e^4 r^-6 - ...)
    grad += 4.0 * np.pi * np.sqrt(3.0) * e * (1.0 / R - e**2 / R**3 + 1.2 * e**4 / R**5)
    # U^6 r^2 = 3^{3/2} e^3 (r^-4 - 3e^2 r^-6 + 6e^4 r^-8 - ...)
    sext += 4.0 * np.pi * 3.0**1.5 * e**3 * (1.0 / (3 * R**3) - 0.6 * e**2 / R**5 + 6.0 / 7.0 * e**4 / R**7)
    return grad, sext


def sobolev_constant(grid: RadialGrid | None = None, epsilon: float = 1.0) -> float:
    """Sobolev quotient ``||grad U||^2 / ||U||_6^2`` of the bubble.

    Simpson quadrature on the grid plus closed-form integrals of the
    power-law tails beyond ``R``.  Default grid ``R = 200``, ``n = 2**16``.
    """
    grid = grid or RadialGrid(200.0, 2**16)
    if grid.dr > 0.1 * epsilon:
        raise ResolutionError(f"grid spacing {grid.dr:.3g} does not resolve a bubble of scale {epsilon}")
    grad, sext = _bubble_integrals(grid, epsilon)
    return float(grad / sext ** (1.0 / 3.0))


@dataclass(frozen=True, eq=False)
class Bubble:
    """Bubble ``U_eps`` and its cut-off version sampled on a grid."""

    epsilon: float
    grid: RadialGrid
    profile: np.ndarray
    cutoff_profile: np.ndarray
    cutoff_grad_sq: float
    cutoff_sextic: float
    cutoff_mass: float


def _cutoff(r):
    # 1 on r <= 1, cosine ramp on (1, 2), 0 beyond; C^1
    x = np.clip(r - 1.0, 0.0, 1.0)
    chi = 0.5 * (1.0 + np.cos(np.pi * x))
    dchi = np.where((r > 1.0) & (r < 2.0), -0.5 * np.pi * np.sin(np.pi * x), 0.0)
    return chi, dchi


def cutoff_bubble(epsilon: float, grid: RadialGrid | None = None) -> Bubble:
    """``U_eps`` and ``chi U_eps`` with the integrals of the cut-off profile.

    Requires ``epsilon <= 0.5`` so the bubble core sits on the plateau of
    the cut-off.
    """
    if not (0 < epsilon <= 0.5):
        raise InputError(f"cutoff_bubble needs 0 < epsilon <= 0.5, got {epsilon}")
    grid = grid or RadialGrid(2.5, 2**14)
    if grid.R < 2.0:
        raise InputError("grid must contain the cut-off support [0, 2]")
    r = grid.r
    u = bubble_profile(r, epsilon)
    chi, dchi = _cutoff(r)
    cut = chi * u
    dcut = dchi * u + chi * _bubble_gradient(r, epsilon)
    return Bubble(
        epsilon=epsilon, grid=grid, profile=u, cutoff_profile=cut,
        cutoff_grad_sq=integrate_radial(dcut**2, grid),
        cutoff_sextic=integrate_radial(cut**6, grid),
        cutoff_mass=integrate_radial(cut**2, grid),
    )


def single_soliton(alpha: float, a: float, grid: RadialGrid, soliton: SolitonW | None = None,
                   tail_tol: float = 1e-8) -> tuple[float, np.ndarray]:
    """Minimizer of ``1/2 ||grad u||^2 - alpha int u^3`` at mass ``a^2``.

    Returns ``lambda = alpha^4 a^4 / ||W||^4`` and
    ``u(r) = (lambda/alpha) W(lambda^{1/2} r)`` on ``grid``.
    """
    if not (alpha > 0 and a > 0):
        raise InputError("single_soliton needs alpha > 0 and a > 0")
    soliton = soliton or reference_soliton()
    lam = alpha**4 * a**4 / soliton.normW2_sq**2
    prof = lam / alpha * soliton.evaluate(np.sqrt(lam) * grid.r)
    if abs(prof[-1]) > tail_tol * prof.max():
        raise ResolutionError(
            f"soliton of length scale {lam**-0.5:.3g} does not fit in R={grid.R:.3g}"
        )
    if np.sqrt(lam) * grid.dr > 0.5:
        raise ResolutionError(f"soliton core of scale {lam**-0.5:.3g} not resolved by dr={grid.dr:.3g}")
    return float(lam), prof


def m0_single(alpha: float, a: float, norm_w_sq: float | None = None) -> float:
    """Closed-form level ``-alpha^4 a^6 / (6 ||W||_2^4)``."""
    if norm_w_sq is None:
        norm_w_sq = reference_soliton().normW2_sq
    return -(alpha**4) * a**6 / (6.0 * norm_w_sq**2)


@lru_cache(maxsize=16)
def reference_constants(alpha: float = 1.0) -> dict:
    """Key-value report of the reference constants at coupling ``alpha``."""
    w = reference_soliton()
    c_sob = sobolev_constant()
    return {
        "normW2_sq": w.normW2_sq,
        "normW2": w.norm,
        "W0": w.w_at_zero,
        "c_sob": c_sob,
        "c_sob_pow_1_5": c_sob**1.5,
        "c_gn3": gn_constant(w),
        "alpha": alpha,
        "D": threshold_D(alpha, w.norm, c_sob),
        "D0": threshold_D0(alpha, w.norm, c_sob),
    }
