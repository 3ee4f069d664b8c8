"""Energies, masses, the Pohozaev functional, dilations, fiber maps and the
h-function geometry of the three-wave system.

All functionals share one discretization: kinetic energies by Parseval on
the sine coefficients of ``r*u`` and every other integral by the trapezoid
weights of ``RadialGrid``.  The fiber map of ``u`` only needs three numbers
(``||grad u||^2``, ``||u||_6^6`` and the coupling integral), cached in
``FiberIntegrals``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import GeometryError, InputError, ResolutionError, SubcriticalityError
from .radial_core import FieldTriple, RadialGrid

__all__ = [
    "PhysParams",
    "Constants",
    "FiberIntegrals",
    "FiberAnalysis",
    "Classification",
    "threshold_D",
    "threshold_D0",
    "fiber_integrals",
    "energy",
    "energy_limit",
    "masses",
    "pohozaev",
    "coupling",
    "in_M",
    "dilate",
    "fiber",
    "classify_pohozaev",
    "h_function",
    "geometry_constants",
    "fiber_critical_points",
]


def threshold_D(alpha: float, norm_w: float, c_sob: float) -> float:
    """Subcriticality threshold ``D(alpha)``."""
    return float(2.0 ** (2 / 3) * c_sob**0.25 * norm_w ** (2 / 3) / (3.0 ** (11 / 12) * alpha ** (2 / 3)))


def threshold_D0(alpha: float, norm_w: float, c_sob: float) -> float:
    """Mass level above which h has no two critical points."""
    return float(4.0 * c_sob**0.25 * norm_w ** (2 / 3) / (3.0 ** (5 / 3) * alpha ** (2 / 3)))


@dataclass(frozen=True)
class PhysParams:
    """Coupling ``alpha`` and mass roots ``(a1, a2)``: targets ``Q1 = a1**2``, ``Q2 = a2**2``."""

    alpha: float
    a1: float
    a2: float

    def __post_init__(self):
        for name in ("alpha", "a1", "a2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InputError(f"{name} must be a positive finite number, got {v}")

    @property
    def a_max(self) -> float:
        return max(self.a1, self.a2)

    def is_subcritical(self, D: float) -> bool:
        return self.a_max < D

    def require_subcritical(self, D: float) -> None:
        if not self.is_subcritical(D):
            raise SubcriticalityError(
                f"subcriticality violated: max(a1, a2) = {self.a_max:.6g} >= D(alpha) = {D:.6g}"
            )


@dataclass(frozen=True)
class Constants:
    """Sharp constants and the h-function geometry for one ``PhysParams``."""

    normW2: float
    c_sob: float
    c_gn3: float
    A1: float
    A2: float
    D: float
    D0: float
    rho0: float
    rho_bar: float
    R0: float | None
    R1: float | None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class FiberIntegrals:
    """``grad_sq = ||grad u||^2``, ``sextic = ||u||_6^6``, ``cubic = Re int u1 u2 conj(u3)``."""

    grad_sq: float
    sextic: float
    cubic: float


@dataclass(frozen=True)
class FiberAnalysis:
    s_u: float
    sigma_u: float
    c_u: float
    d_u: float
    psi_at_s: float
    psi_at_sigma: float


class Classification(str, Enum):
    PLUS = "Plus"
    MINUS = "Minus"
    ZERO = "Zero"
    NOT_ON_P = "NotOnP"


def _data(u) -> tuple[RadialGrid, np.ndarray]:
    if not isinstance(u, FieldTriple):
        raise InputError("expected a FieldTriple")
    return u.grid, u.data


def fiber_integrals(u: FieldTriple) -> FiberIntegrals:
    """The three integrals every functional and fiber map is built from."""
    g, d = _data(u)
    b = g.to_modes(d)
    grad_sq = float(2.0 * np.pi * g.R * np.sum(g.k2 * np.abs(b) ** 2))
    sextic = float(np.sum(g.weights * np.abs(d) ** 6))
    cubic = float(np.real(np.sum(g.weights * d[0] * d[1] * np.conj(d[2]))))
    return FiberIntegrals(grad_sq, sextic, cubic)


def energy(u: FieldTriple, alpha: float) -> float:
    """``E(u) = 1/2 ||grad u||^2 - 1/6 ||u||_6^6 - alpha Re int u1 u2 conj(u3)``."""
    f = fiber_integrals(u)
    return 0.5 * f.grad_sq - f.sextic / 6.0 - alpha * f.cubic


def energy_limit(u: FieldTriple, alpha: float) -> float:
    """Energy without the sextic term."""
    f = fiber_integrals(u)
    return 0.5 * f.grad_sq - alpha * f.cubic


def energy_single(f: np.ndarray, grid: RadialGrid, alpha: float) -> float:
    """``J0(f) = 1/2 ||grad f||^2 - alpha/3 int f^3`` for one real profile."""
    b = grid.to_modes(np.real(f))
    kin = 2.0 * np.pi * grid.R * float(np.sum(grid.k2 * b * b))
    return 0.5 * kin - alpha / 3.0 * float(np.sum(grid.weights * np.real(f) ** 3))


def masses(u: FieldTriple) -> tuple[float, float]:
    """``(Q1, Q2) = (|u1|^2 + |u3|^2, |u2|^2 + |u3|^2)`` in L2."""
    g, d = _data(u)
    m = np.sum(g.weights * np.abs(d) ** 2, axis=1)
    return float(m[0] + m[2]), float(m[1] + m[2])


def pohozaev(u: FieldTriple, alpha: float) -> float:
    """``P(u) = ||grad u||^2 - ||u||_6^6 - 3/2 alpha Re int u1 u2 conj(u3)``."""
    f = fiber_integrals(u)
    return f.grad_sq - f.sextic - 1.5 * alpha * f.cubic


def coupling(u: FieldTriple) -> float:
    """``Re int u1 u2 conj(u3)``."""
    g, d = _data(u)
    return float(np.real(np.sum(g.weights * d[0] * d[1] * np.conj(d[2]))))


def in_M(u: FieldTriple) -> bool:
    """Strictly positive coupling; zero coupling is outside the open set."""
    return coupling(u) > 0.0


def dilate(u: FieldTriple, s: float, tail_tol: float = 1e-6) -> FieldTriple:
    """Mass-preserving dilation ``s^{3/2} u(s r)`` by cubic resampling.

    Each component is interpolated with a cubic spline through its even
    extension and the Dirichlet zeros at ``r = +-R``; samples requested
    beyond ``R`` are zero.

    Raises
    ------
    ResolutionError
        When the relative change of any component mass exceeds ``tail_tol``
        (the profile is pushed through the wall or its core falls below the
        grid spacing).
    """
    if not (np.isfinite(s) and s > 0):
        raise InputError(f"dilation factor must be positive, got {s}")
    g, d = _data(u)
    if s == 1.0:
        return FieldTriple(g, d.copy())
    x = np.concatenate(([-g.R], -g.r[::-1], g.r, [g.R]))
    q = s * g.r
    inside = q < g.R
    out = np.zeros_like(d)
    for j in range(3):
        y = np.concatenate(([0.0], d[j][::-1], d[j], [0.0]))
        cs = CubicSpline(x, y)
        out[j, inside] = s**1.5 * cs(q[inside])
    before = np.sum(g.weights * np.abs(d) ** 2, axis=1)
    after = np.sum(g.weights * np.abs(out) ** 2, axis=1)
    scale = max(before.max(), np.finfo(float).tiny)
    defect = np.abs(after - before) / scale
    if defect.max() > tail_tol:
        raise ResolutionError(
            f"dilation by s={s:.6g} changes a component mass by {defect.max():.3e} "
            f"(tolerance {tail_tol:.1e}); profile not resolved after rescaling"
        )
    return FieldTriple(g, out)


def fiber(f: FiberIntegrals | FieldTriple, alpha: float, s: float) -> tuple[float, float, float]:
    """``Psi_u(s) = E(s * u)`` and its first two derivatives in ``s``.

    Evaluated from the cached integrals, so no quadrature per call.
    """
    if isinstance(f, FieldTriple):
        f = fiber_integrals(f)
    G, S6, C = f.grad_sq, f.sextic, alpha * f.cubic
    psi = 0.5 * s * s * G - s**6 / 6.0 * S6 - s**1.5 * C
    dpsi = s * G - s**5 * S6 - 1.5 * np.sqrt(s) * C
    d2psi = G - 5.0 * s**4 * S6 - 0.75 / np.sqrt(s) * C
    return float(psi), float(dpsi), float(d2psi)


def classify_pohozaev(u: FieldTriple, alpha: float, tol: float = 1e-6) -> Classification:
    """Place ``u`` in P+, P-, P0 or off the Pohozaev set.

    ``u`` is on the set when ``|P(u)| <= tol * max(1, ||grad u||^2)``; the
    sign of ``Psi_u''(1)`` then decides, with ``|Psi''| <= tol * ||grad u||^2``
    reported as Zero.
    """
    f = fiber_integrals(u)
    P = f.grad_sq - f.sextic - 1.5 * alpha * f.cubic
    if abs(P) > tol * max(1.0, f.grad_sq):
        return Classification.NOT_ON_P
    d2 = f.grad_sq - 5.0 * f.sextic - 0.75 * alpha * f.cubic
    if abs(d2) <= tol * f.grad_sq:
        return Classification.ZERO
    return Classification.PLUS if d2 > 0 else Classification.MINUS


def h_function(rho, A1: float, A2: float):
    """Lower bound ``h(rho) = rho^2/2 - A1 rho^6 - A2 rho^{3/2}`` of the energy."""
    rho = np.asarray(rho, dtype=float)
    return 0.5 * rho**2 - A1 * rho**6 - A2 * rho**1.5


def geometry_constants(params: PhysParams, norm_w: float, c_sob: float,
                       degenerate_tol: float = 1e-9) -> Constants:
    """All constants of the h-function geometry.

    Parameters
    ----------
    params : PhysParams
    norm_w : float
        ``||W||_2`` from the soliton solver.
    c_sob : float
        Sharp Sobolev constant.
    degenerate_tol : float
        Relative band around ``max(a1, a2) = D`` treated as the double-root
        case ``R0 = rho0 = R1``.

    Notes
    -----
    For ``D < max(a1, a2) < D0`` h has two critical points but no positive
    hump, so ``R0`` and ``R1`` are None.
    """
    alpha = params.alpha
    A1 = c_sob**-3 / 6.0
    A2 = 2.0 * alpha * params.a_max**1.5 / (3.0**0.75 * norm_w)
    D = threshold_D(alpha, norm_w, c_sob)
    D0 = threshold_D0(alpha, norm_w, c_sob)
    rho0 = (1.0 / (18.0 * A1)) ** 0.25
    rho_bar = (1.0 / (54.0 * A1)) ** 0.25
    c_gn3 = (2.0 / norm_w) ** (1.0 / 3.0)
    if params.a_max >= D0:
        raise GeometryError(
            f"geometry collapse: max(a1, a2) = {params.a_max:.6g} >= D0 = {D0:.6g}, "
            "h has no positive hump"
        )
    R0 = R1 = None
    ratio = params.a_max / D
    if abs(ratio - 1.0) <= degenerate_tol:
        R0 = R1 = rho0
    elif ratio < 1.0:
        h = lambda x: float(h_function(x, A1, A2))
        # h > 0 on (R0, R1) and rho0 * a/D lies inside
        inner = ratio * rho0
        if h(inner) <= 0:
            raise GeometryError(f"h({inner:.6g}) = {h(inner):.3e} is not positive")
        R0 = brentq(h, inner * 1e-12, inner, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        hi = 2.0 * rho0
        while h(hi) > 0:
            hi *= 2.0
        R1 = brentq(h, rho0 if h(rho0) > 0 else inner, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    return Constants(
        normW2=norm_w, c_sob=c_sob, c_gn3=c_gn3, A1=A1, A2=A2, D=D, D0=D0,
        rho0=rho0, rho_bar=rho_bar, R0=R0, R1=R1,
    )


def _bisect_newton(fun, dfun, lo, hi, rtol=1e-12, maxiter=200):
    """Bisection to a coarse bracket, then Newton safeguarded by the bracket."""
    flo = fun(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-6 * mid:
            break
        fm = fun(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(50):
        fx = fun(x)
        step = fx / dfun(x)
        xn = x - step
        if not (lo <= xn <= hi):
            xn = 0.5 * (lo + hi)
        if (fun(xn) > 0) == (flo > 0):
            lo = xn
        else:
            hi = xn
        if abs(xn - x) <= rtol * abs(xn):
            return xn
        x = xn
    return x


def fiber_critical_points(u: FieldTriple | FiberIntegrals, alpha: float) -> FiberAnalysis:
    """Locate the two critical points and the two zeros of ``Psi_u``.

    With ``G, S6, C`` the cached integrals, ``Psi'(s) = s^{1/2} phi(s)`` where
    ``phi(s) = s^{1/2} G - s^{9/2} S6 - 3/2 alpha C`` rises from
    ``-3/2 alpha C < 0`` to its maximum at ``(G/(9 S6))^{1/4}`` and then
    falls to ``-inf``.  ``Psi(s) = s^{3/2} chi(s)`` with ``chi`` of the same
    shape, peaking at ``(G/(3 S6))^{1/4}``.

    Raises
    ------
    GeometryError
        When ``u`` is outside M or the fiber does not have two critical points.
    """
    f = u if isinstance(u, FiberIntegrals) else fiber_integrals(u)
    G, S6, C = f.grad_sq, f.sextic, alpha * f.cubic
    if not f.cubic > 0:
        raise GeometryError("u is not in M (coupling <= 0): the fiber has no two critical points")
    if not (G > 0 and S6 > 0):
        raise GeometryError("degenerate fiber: vanishing gradient or sextic integral")
    phi = lambda s: np.sqrt(s) * G - s**4.5 * S6 - 1.5 * C
    dphi = lambda s: 0.5 * G / np.sqrt(s) - 4.5 * s**3.5 * S6
    chi = lambda s: 0.5 * np.sqrt(s) * G - s**4.5 * S6 / 6.0 - C
    dchi = lambda s: 0.25 * G / np.sqrt(s) - 0.75 * s**3.5 * S6
    s_star = (G / (9.0 * S6)) ** 0.25
    t_star = (G / (3.0 * S6)) ** 0.25
    if phi(s_star) <= 0 or chi(t_star) <= 0:
        samples = {float(s): fiber(f, alpha, float(s))[0] for s in s_star * np.array([0.25, 0.5, 1, 2, 4])}
        raise GeometryError(f"fiber has no two critical points; Psi samples {samples}")

    def upper(fun, start):
        hi = 2.0 * start
        while fun(hi) > 0:
            hi *= 2.0
        return hi

    def lower(fun, start):
        lo = 0.5 * start
        while fun(lo) > 0:
            lo *= 0.5
        return lo

    s_u = _bisect_newton(phi, dphi, lower(phi, s_star), s_star)
    sigma_u = _bisect_newton(phi, dphi, s_star, upper(phi, s_star))
    c_u = _bisect_newton(chi, dchi, lower(chi, t_star), t_star)
    d_u = _bisect_newton(chi, dchi, t_star, upper(chi, t_star))
    out = FiberAnalysis(
        s_u=s_u, sigma_u=sigma_u, c_u=c_u, d_u=d_u,
        psi_at_s=fiber(f, alpha, s_u)[0], psi_at_sigma=fiber(f, alpha, sigma_u)[0],
    )
    if not (out.s_u < out.c_u < out.sigma_u < out.d_u):
        raise GeometryError(f"fiber ordering violated: {out}")
    if not (out.psi_at_s < 0 < out.psi_at_sigma):
        raise GeometryError(f"fiber levels violated: {out}")
    return out
