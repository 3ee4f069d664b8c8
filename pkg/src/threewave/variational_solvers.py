"""Constrained critical points of the energy at prescribed mixed masses.

Ground states minimize the energy on ``S(a1, a2)`` near the origin; excited
states minimize it on the Pohozaev-minus set.  Both use the same discrete
machinery on real nonnegative profiles:

* gradient of ``E`` from the spectral Laplacian;
* preconditioner ``(-Laplace + c_j)^{-1}`` per component, with the shifts
  ``c_j`` taken from the current multipliers ``(l1, l2, l1 + l2)``;
* Lagrange multipliers from the tangency conditions of the (preconditioned)
  step to ``Q1 = a1^2`` and ``Q2 = a2^2``;
* Armijo backtracking on the energy, clamping of negative parts and an
  exact closed-form mass projection after every step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConstraintError, GeometryError, InputError, ResolutionError
from .functionals import (
    Classification,
    energy_single,
    PhysParams,
    classify_pohozaev,
    fiber_critical_points,
    fiber_integrals,
    geometry_constants,
    threshold_D,
)
from .radial_core import FieldTriple, RadialGrid
from .reference_solutions import (
    SolitonW,
    bubble_profile,
    reference_soliton,
    single_soliton,
    sobolev_constant,
)

log = logging.getLogger(__name__)

__all__ = [
    "StationaryState",
    "CollapseRecord",
    "energy_gradient",
    "multiplier_solve",
    "project_masses",
    "default_grid",
    "symmetric_soliton_init",
    "ground_state",
    "excited_state",
    "excited_init",
    "limit_ground_state",
    "single_ground_state",
    "mass_collapse_sweep",
    "h1_distance",
    "transfer",
]


@dataclass
class StationaryState:
    """Output of the variational solvers."""

    u: FieldTriple
    lambda1: float
    lambda2: float
    energy: float
    pohozaev_residual: float
    classification: Classification
    iterations: int
    converged: bool
    residual: float
    grad_sq: float
    alpha: float
    a1: float
    a2: float
    sextic_weight: float = 1.0
    symmetry_defect: float = 0.0
    certificate: dict = field(default_factory=dict)
    history: list = field(default_factory=list, repr=False)

    @property
    def lambda3(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def multipliers(self) -> tuple[float, float, float]:
        return self.lambda1, self.lambda2, self.lambda1 + self.lambda2

    def summary(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambda3": self.lambda3,
            "energy": self.energy,
            "grad_sq": self.grad_sq,
            "pohozaev_residual": self.pohozaev_residual,
            "classification": self.classification.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "symmetry_defect": self.symmetry_defect,
            "alpha": self.alpha,
            "a1": self.a1,
            "a2": self.a2,
            "certificate": self.certificate,
        }


@dataclass(frozen=True)
class CollapseRecord:
    epsilon: float
    energy: float
    grad_sq: float
    lambda_sum: float
    rescaled_distance: float
    iterations: int


# ---------------------------------------------------------------------------
# discrete building blocks on (3, n) arrays


def _nonlinearity(d: np.ndarray, alpha: float, sextic: float) -> np.ndarray:
    u1, u2, u3 = d
    return np.stack([
        sextic * u1**5 + alpha * u2 * u3,
        sextic * u2**5 + alpha * u1 * u3,
        sextic * u3**5 + alpha * u1 * u2,
    ])


def _energy(grid: RadialGrid, d: np.ndarray, alpha: float, sextic: float) -> float:
    f = fiber_integrals(FieldTriple(grid, d))
    return 0.5 * f.grad_sq - sextic * f.sextic / 6.0 - alpha * f.cubic


def _pohozaev_parts(grid, d, alpha, sextic):
    f = fiber_integrals(FieldTriple(grid, d))
    P = f.grad_sq - sextic * f.sextic - 1.5 * alpha * f.cubic
    d2 = f.grad_sq - 5.0 * sextic * f.sextic - 0.75 * alpha * f.cubic
    return P, d2, f


def _free_gradient(grid: RadialGrid, d: np.ndarray, alpha: float, sextic: float) -> np.ndarray:
    """Gradient of E without multiplier terms: ``-Lap u_j - u_j^5 - alpha u_k u_l``."""
    return grid.neg_laplacian(d) - _nonlinearity(d, alpha, sextic)


def _pohozaev_gradient(grid, d, alpha, sextic):
    u1, u2, u3 = d
    cub = np.stack([u2 * u3, u1 * u3, u1 * u2])
    return 2.0 * grid.neg_laplacian(d) - 6.0 * sextic * d**5 - 1.5 * alpha * cub


def _ip(grid: RadialGrid, x: np.ndarray, y: np.ndarray) -> float:
    # broadcasts over leading component axes
    return float(np.sum(grid.weights * x * y))


def _precondition(grid: RadialGrid, x: np.ndarray, shifts) -> np.ndarray:
    b = grid.to_modes(x)
    return grid.from_modes(b / (grid.k2[None, :] + np.asarray(shifts, dtype=float)[:, None]))


def _mass_normals(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = np.zeros_like(d[0])
    return np.stack([d[0], z, d[2]]), np.stack([z, d[1], d[2]])


def project_masses(grid: RadialGrid, d: np.ndarray, a1: float, a2: float) -> np.ndarray:
    """Scale ``(u1, u2, u3)`` by ``(x, y, sqrt(x y))`` onto ``Q1 = a1^2, Q2 = a2^2``.

    With ``t = y/x`` the two constraints reduce to
    ``a1^2 m2 t^2 + (a1^2 - a2^2) m3 t - a2^2 m1 = 0`` whose positive root is
    unique; ``m_j`` are the component masses.
    """
    m1, m2, m3 = (float(v) for v in np.sum(grid.weights * d * d, axis=1))
    A, B = a1 * a1, a2 * a2
    if m1 <= 0 or m2 <= 0:
        raise ConstraintError("mass projection needs nonzero u1 and u2")
    qa, qb, qc = A * m2, (A - B) * m3, -B * m1
    t = (-qb + np.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)
    x = np.sqrt(A / (m1 + t * m3))
    y = t * x
    return d * np.array([x, y, np.sqrt(x * y)])[:, None]


def _multipliers(grid, d, g0, pd=None, pg=None):
    """Solve the 2x2 tangency system; ``pd``/``pg`` are the preconditioned
    ``u`` and free gradient (identity when omitted)."""
    pd = d if pd is None else pd
    pg = g0 if pg is None else pg
    m11 = _ip(grid, d[0], pd[0]) + _ip(grid, d[2], pd[2])
    m22 = _ip(grid, d[1], pd[1]) + _ip(grid, d[2], pd[2])
    m12 = _ip(grid, d[2], pd[2])
    A = np.array([[m11, m12], [m12, m22]])
    rhs = -np.array([
        _ip(grid, d[0], pg[0]) + _ip(grid, d[2], pg[2]),
        _ip(grid, d[1], pg[1]) + _ip(grid, d[2], pg[2]),
    ])
    det = np.linalg.det(A)
    if not np.isfinite(det) or abs(det) <= 1e-14 * max(m11 * m22, np.finfo(float).tiny):
        raise ConstraintError("degenerate mass constraints: a component is numerically zero")
    l1, l2 = np.linalg.solve(A, rhs)
    return float(l1), float(l2)


def energy_gradient(u: FieldTriple, alpha: float, lambda1: float, lambda2: float,
                    sextic_weight: float = 1.0) -> FieldTriple:
    """Residual of the stationary system for real profiles.

    Component 1 is ``-Lap u1 + lambda1 u1 - u1^5 - alpha u3 u2`` and cyclically,
    with ``lambda3 = lambda1 + lambda2``.
    """
    g, d = u.grid, np.real(u.data)
    lam = np.array([lambda1, lambda2, lambda1 + lambda2])[:, None]
    return FieldTriple(g, _free_gradient(g, d, alpha, sextic_weight) + lam * d)


def multiplier_solve(u: FieldTriple, alpha: float, shifts=None,
                     sextic_weight: float = 1.0) -> tuple[float, float]:
    """Multipliers making the gradient-flow direction tangent to both masses.

    Parameters
    ----------
    u : FieldTriple
        Real profiles, each component nonzero.
    alpha : float
    shifts : sequence of three floats, optional
        Preconditioner shifts; when given the tangency is imposed on the
        preconditioned flow ``-(−Lap + c_j)^{-1}(grad E + lambda u)``.  At a
        critical point both versions return the same multipliers.
    """
    g, d = u.grid, np.real(u.data)
    g0 = _free_gradient(g, d, alpha, sextic_weight)
    if shifts is None:
        return _multipliers(g, d, g0)
    return _multipliers(g, d, g0, _precondition(g, d, shifts), _precondition(g, g0, shifts))


def h1_distance(grid: RadialGrid, x: np.ndarray, y: np.ndarray) -> float:
    """``(||x - y||_2^2 + ||grad(x - y)||_2^2)^{1/2}`` summed over components."""
    diff = np.atleast_2d(x - y)
    b = grid.to_modes(diff)
    kin = 2.0 * np.pi * grid.R * np.sum(grid.k2 * np.abs(b) ** 2)
    return float(np.sqrt(np.sum(grid.weights * np.abs(diff) ** 2) + kin))


# ---------------------------------------------------------------------------
# grids and initial data


def default_grid(alpha: float, a: float, n: int = 2047, width: float = 20.0,
                 soliton: SolitonW | None = None) -> RadialGrid:
    """Uniform grid sized by the natural length of the ground state.

    The ground state at masses ``a`` has decay length close to
    ``lambda^{-1/2}`` with ``lambda = alpha^4 (a^2/2)^2 / ||W||_2^4``, the
    multiplier of a single soliton carrying half of the mass; ``R`` spans
    ``width`` such lengths.
    """
    soliton = soliton or reference_soliton()
    lam = alpha**4 * (0.5 * a * a) ** 2 / soliton.normW2_sq**2
    return RadialGrid(width / np.sqrt(lam), n)


def symmetric_soliton_init(grid: RadialGrid, alpha: float, a1: float, a2: float,
                           soliton: SolitonW | None = None, amplitude: float = 1.0) -> np.ndarray:
    """Three copies of the single soliton carrying half of the mean mass each."""
    a = np.sqrt(0.5 * (a1 * a1 + a2 * a2))
    _, prof = single_soliton(alpha, a / np.sqrt(2.0), grid, soliton, tail_tol=1e-6)
    return amplitude * np.stack([prof, prof, prof])


# ---------------------------------------------------------------------------
# ground states


def _check_admissible(grid, d, rho0=None):
    f = fiber_integrals(FieldTriple(grid, d))
    if not f.cubic > 0:
        raise ConstraintError("iterate left M (coupling <= 0)")
    if rho0 is not None and np.sqrt(f.grad_sq) >= rho0:
        raise GeometryError(
            f"iterate left the ball B_rho0: ||grad u|| = {np.sqrt(f.grad_sq):.6g} >= rho0 = {rho0:.6g}"
        )
    return f


def _descent(grid, d, a1, a2, alpha, sextic, tol, max_iter, rho0=None, armijo=1e-4,
             record_every=1, max_step=1.0):
    """Preconditioned projected gradient descent of E on S(a1, a2)."""
    d = project_masses(grid, np.maximum(d, 0.0), a1, a2)
    E = _energy(grid, d, alpha, sextic)
    tau = max_step
    history = []
    res = np.inf
    l1 = l2 = 0.0
    it = 0
    converged = False
    # shift scale from the energy level; multipliers are O(|E| / mass)
    c = max(abs(E) / (a1 * a1 + a2 * a2), 1e-300)
    shifts = np.array([c, c, 2.0 * c])
    for it in range(max_iter + 1):
        f = _check_admissible(grid, d, rho0)
        g0 = _free_gradient(grid, d, alpha, sextic)
        pd = _precondition(grid, d, shifts)
        pg = _precondition(grid, g0, shifts)
        l1, l2 = _multipliers(grid, d, g0, pd, pg)
        lam = np.array([l1, l2, l1 + l2])[:, None]
        grad = g0 + lam * d
        step = -(pg + lam * pd)
        slope = _ip(grid, grad, step)
        scale = f.grad_sq + c * float(np.sum(grid.weights * d * d))
        res = np.sqrt(max(-slope, 0.0) / scale)
        P = f.grad_sq - sextic * f.sextic - 1.5 * alpha * f.cubic
        if it % record_every == 0:
            history.append((it, E, res, P))
        if res < tol and abs(P) < tol * f.grad_sq:
            converged = True
            break
        if it == max_iter:
            break
        while True:
            trial = project_masses(grid, np.maximum(d + tau * step, 0.0), a1, a2)
            Et = _energy(grid, trial, alpha, sextic)
            # round-off allowance keeps the line search alive at the floor
            if Et <= E + armijo * tau * slope + 1e-14 * abs(E) or tau < 1e-12:
                break
            tau *= 0.5
        d, E = trial, Et
        tau = min(1.5 * tau, max_step)
        shifts = np.maximum([l1, l2, l1 + l2], 1e-3 * c)
    return d, l1, l2, E, it, res, converged, history


def _finish(grid, d, l1, l2, alpha, a1, a2, sextic, it, res, converged, history, tol):
    u = FieldTriple(grid, d)
    P, d2, f = _pohozaev_parts(grid, d, alpha, sextic)
    E = 0.5 * f.grad_sq - sextic * f.sextic / 6.0 - alpha * f.cubic
    if sextic == 1.0:
        cls = classify_pohozaev(u, alpha, tol=max(tol, 1e-9) * 100)
    else:
        cls = Classification.PLUS if d2 > 0 else Classification.MINUS
    return StationaryState(
        u=u, lambda1=float(l1), lambda2=float(l2), energy=float(E), pohozaev_residual=P, classification=cls,
        iterations=it, converged=converged, residual=float(res), grad_sq=f.grad_sq, alpha=alpha,
        a1=float(a1), a2=float(a2), sextic_weight=sextic,
        symmetry_defect=float(np.sqrt(_ip(grid, d[0] - d[1], d[0] - d[1]) / max(_ip(grid, d[0], d[0]), 1e-300))),
        history=history,
    )


def ground_state(params: PhysParams, grid: RadialGrid | None = None, init=None,
                 step: float = 1.0, tol: float = 1e-8, max_iter: int = 5000, soliton: SolitonW | None = None,
                 c_sob: float | None = None, check_subcritical: bool = True) -> StationaryState:
    """Local minimizer of E on ``S(a1, a2)`` inside the ball ``B_rho0``.

    Parameters
    ----------
    params : PhysParams
        Requires ``max(a1, a2) < D(alpha)``.
    grid : RadialGrid, optional
        Defaults to ``default_grid(alpha, min(a1, a2))``; the lighter component decays slowest.
    init : FieldTriple or ndarray, optional
        Starting profiles; defaults to the symmetric soliton triple.
    step : float
        Largest step of the backtracking line search (in units of the
        preconditioned gradient).
    tol : float
        Stop when both the preconditioned relative residual and
        ``|P| / ||grad u||^2`` fall below ``tol``.
    max_iter : int

    Raises
    ------
    GeometryError
        An iterate leaves ``B_rho0``.
    ConstraintError
        An iterate leaves M.
    """
    soliton = soliton or reference_soliton()
    c_sob = c_sob or sobolev_constant()
    D = threshold_D(params.alpha, soliton.norm, c_sob)
    if check_subcritical:
        params.require_subcritical(D)
    geo = geometry_constants(params, soliton.norm, c_sob) if params.a_max < D else None
    explicit = grid is not None
    grid = grid or default_grid(params.alpha, min(params.a1, params.a2), soliton=soliton)
    if init is None:
        try:
            d0 = symmetric_soliton_init(grid, params.alpha, params.a1, params.a2, soliton)
        except ResolutionError:
            if not explicit:
                raise
            # soliton does not sample well here: solve on the natural grid and resample
            coarse = ground_state(params, None, step=step, tol=tol, max_iter=max_iter,
                                  soliton=soliton, c_sob=c_sob, check_subcritical=check_subcritical)
            d0 = transfer(coarse.u, grid)
    else:
        d0 = np.real(init.data if isinstance(init, FieldTriple) else np.asarray(init)).copy()
    d, l1, l2, E, it, res, ok, hist = _descent(
        grid, d0, params.a1, params.a2, params.alpha, 1.0, tol, max_iter,
        rho0=geo.rho0 if geo else None, max_step=step,
    )
    if not ok:
        log.warning("ground_state: no convergence after %d iterations (residual %.3e)", it, res)
    state = _finish(grid, d, l1, l2, params.alpha, params.a1, params.a2, 1.0, it, res, ok, hist, tol)
    state.certificate = {
        "energy_negative": state.energy < 0,
        "multipliers_positive": state.lambda1 > 0 and state.lambda2 > 0,
        "classification_plus": state.classification == Classification.PLUS,
        "inside_ball": bool(geo is None or np.sqrt(state.grad_sq) < geo.rho0),
    }
    return state


def single_ground_state(alpha: float, a: float, grid: RadialGrid | None = None,
                        tol: float = 1e-10, max_iter: int = 5000,
                        soliton: SolitonW | None = None) -> tuple[float, float, np.ndarray, int]:
    """Minimize ``J0(u) = 1/2 ||grad u||^2 - alpha/3 int u^3`` on ``||u||_2 = a``.

    Starts from a Gaussian (not from the soliton) so the result is an
    independent check of the closed-form level.

    Returns
    -------
    energy, multiplier, profile, iterations
    """
    if not (alpha > 0 and a > 0):
        raise InputError("single_ground_state needs alpha > 0 and a > 0")
    grid = grid or default_grid(alpha, np.sqrt(2.0) * a, soliton=soliton)
    width = grid.R / 20.0
    u = np.exp(-((grid.r / width) ** 2))
    proj = lambda f: f * (a / np.sqrt(_ip(grid, f, f)))
    J = lambda f: energy_single(f, grid, alpha)
    u = proj(u)
    E = J(u)
    c = max(abs(E) / (a * a), 1e-300)
    shift = c
    tau, lam, it = 1.0, 0.0, 0
    for it in range(max_iter + 1):
        g0 = grid.neg_laplacian(u) - alpha * u * u
        pu = _precondition(grid, u[None, :], [shift])[0]
        pg = _precondition(grid, g0[None, :], [shift])[0]
        lam = -_ip(grid, u, pg) / _ip(grid, u, pu)
        step = -(pg + lam * pu)
        slope = _ip(grid, g0 + lam * u, step)
        res = np.sqrt(max(-slope, 0.0) / (grid.kinetic(u) + c * a * a))
        if res < tol or it == max_iter:
            break
        while True:
            trial = proj(np.maximum(u + tau * step, 0.0))
            Et = J(trial)
            if Et <= E + 1e-4 * tau * slope + 1e-14 * abs(E) or tau < 1e-12:
                break
            tau *= 0.5
        u, E = trial, Et
        tau = min(1.5 * tau, 1.0)
        shift = max(lam, 1e-3 * c)
    return float(E), float(lam), u, it


def limit_ground_state(alpha: float, grid: RadialGrid | None = None, tol: float = 1e-10,
                       max_iter: int = 5000, soliton: SolitonW | None = None) -> StationaryState:
    """Minimizer of the energy without sextic term on ``S(1, 1)``."""
    if not alpha > 0:
        raise InputError("alpha must be positive")
    soliton = soliton or reference_soliton()
    grid = grid or default_grid(alpha, 1.0, soliton=soliton)
    d0 = symmetric_soliton_init(grid, alpha, 1.0, 1.0, soliton)
    d, l1, l2, E, it, res, ok, hist = _descent(grid, d0, 1.0, 1.0, alpha, 0.0, tol, max_iter)
    if not ok:
        log.warning("limit_ground_state: no convergence after %d iterations (residual %.3e)", it, res)
    return _finish(grid, d, l1, l2, alpha, 1.0, 1.0, 0.0, it, res, ok, hist, tol)


def mass_collapse_sweep(alpha: float, eps_list, n: int = 2047, width: float = 20.0,
                        tol: float = 1e-10, max_iter: int = 5000,
                        soliton: SolitonW | None = None, c_sob: float | None = None):
    """Ground states at ``a1 = a2 = eps`` for descending ``eps``.

    The solve at ``eps`` runs on the grid ``R_eps = R_v / eps^2`` where
    ``R_v`` is the grid of the limit problem, so the rescaled profile
    ``eps^{-4} u(eps^{-2} r)`` lives node for node on the limit grid.  Each
    solve is warm-started by the same map applied to the previous solution.

    Returns
    -------
    records : list of CollapseRecord
    limit : StationaryState
        The limit-problem minimizer the distances refer to.
    """
    soliton = soliton or reference_soliton()
    c_sob = c_sob or sobolev_constant()
    D = threshold_D(alpha, soliton.norm, c_sob)
    eps_list = [float(e) for e in eps_list]
    if any(e >= D for e in eps_list):
        raise InputError(f"every epsilon must be below D(alpha) = {D:.6g}")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InputError("eps_list must be strictly descending")
    grid_v = default_grid(alpha, 1.0, n=n, width=width, soliton=soliton)
    limit = limit_ground_state(alpha, grid_v, tol=tol, max_iter=max_iter, soliton=soliton)
    v_prev = limit.u.data
    records = []
    for eps in eps_list:
        grid = RadialGrid(grid_v.R / eps**2, n)
        st = ground_state(PhysParams(alpha, eps, eps), grid, init=eps**4 * v_prev, tol=tol,
                          max_iter=max_iter, soliton=soliton, c_sob=c_sob)
        v = st.u.data / eps**4
        records.append(CollapseRecord(
            epsilon=eps, energy=st.energy, grad_sq=st.grad_sq, lambda_sum=st.lambda1 + st.lambda2,
            rescaled_distance=h1_distance(grid_v, v, limit.u.data), iterations=st.iterations,
        ))
        v_prev = v
    return records, limit


# ---------------------------------------------------------------------------
# excited states


def _retract_pohozaev(grid, d, a1, a2, alpha, shifts, max_newton=30, rtol=1e-13):
    """Return to ``P = 0`` keeping the masses: Newton along the preconditioned
    gradient of P, made tangent to both mass constraints."""
    d = project_masses(grid, np.maximum(d, 0.0), a1, a2)
    for _ in range(max_newton):
        P, _, f = _pohozaev_parts(grid, d, alpha, 1.0)
        if abs(P) <= rtol * f.grad_sq:
            return d, True
        gp = _pohozaev_gradient(grid, d, alpha, 1.0)
        pd = _precondition(grid, d, shifts)
        pgp = _precondition(grid, gp, shifts)
        m1, m2 = _multipliers(grid, d, gp, pd, pgp)
        direction = pgp + np.array([m1, m2, m1 + m2])[:, None] * pd
        slope = _ip(grid, gp, direction)
        if slope == 0:
            return d, False
        d = project_masses(grid, np.maximum(d - (P / slope) * direction, 0.0), a1, a2)
    P, _, f = _pohozaev_parts(grid, d, alpha, 1.0)
    return d, abs(P) <= 1e3 * rtol * f.grad_sq


def transfer(u: FieldTriple, grid: RadialGrid, taper: float = 0.1) -> np.ndarray:
    """Resample real profiles onto ``grid`` by cubic splines.

    Values beyond the source radius are zero; when the target is shorter
    the profiles are multiplied by a cosine taper over the last ``taper``
    fraction of the target so the Dirichlet wall sees no jump.
    """
    from scipy.interpolate import CubicSpline

    src = u.grid
    r = np.concatenate([-src.r[::-1], [0.0], src.r, [src.R]])
    out = np.empty((3, grid.n))
    for j, f in enumerate(np.real(u.data)):
        # even extension through the origin; Dirichlet value at the wall
        f0 = 1.5 * f[0] - 0.6 * f[1] + 0.1 * f[2]
        spl = CubicSpline(r, np.concatenate([f[::-1], [f0], f, [0.0]]))
        out[j] = np.where(grid.r <= src.R, spl(np.minimum(grid.r, src.R)), 0.0)
    if grid.R < src.R:
        x = np.clip((grid.r - (1.0 - taper) * grid.R) / (taper * grid.R), 0.0, 1.0)
        out *= 0.5 * (1.0 + np.cos(np.pi * x))
    return out


def excited_init(ground: StationaryState, epsilon: float = 0.1, t_max: float = 10.0,
                 cutoff_radius: float = 1.0, grid: RadialGrid | None = None) -> np.ndarray:
    """Ground state with ``u1`` replaced by the mass-renormalized ``u1 + t U_eps``.

    ``U_eps`` is the bubble cut off smoothly between ``cutoff_radius`` and
    twice that; ``t`` is the largest amplitude at which the renormalized
    triple crosses ``P = 0`` from above, which puts it on the minus branch.
    ``grid`` defaults to the ground-state grid; otherwise the ground state
    is transferred to it.
    """
    grid = grid or ground.u.grid
    # a bubble narrower than a few nodes is a one-node spike whose discrete
    # gradient dominates, so P never crosses zero
    if epsilon < 4.0 * grid.dr:
        raise ResolutionError(
            f"bubble scale {epsilon:.3g} is below 4 dr = {4.0 * grid.dr:.3g}; refine the excited grid"
        )
    d = ground.u.data if grid == ground.u.grid else transfer(ground.u, grid)
    a1, a2, alpha = ground.a1, ground.a2, ground.alpha
    x = np.clip(grid.r / cutoff_radius - 1.0, 0.0, 1.0)
    bubble = 0.5 * (1.0 + np.cos(np.pi * x)) * bubble_profile(grid.r, epsilon)

    def build(t):
        return project_masses(grid, np.stack([d[0] + t * bubble, d[1], d[2]]), a1, a2)

    def P(t):
        return _pohozaev_parts(grid, build(t), alpha, 1.0)[0]

    ts = np.linspace(0.0, t_max, 201)[1:]
    vals = np.array([P(t) for t in ts])
    cross = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if cross.size == 0:
        raise GeometryError(
            f"no Pohozaev crossing for the bubble of scale {epsilon} up to t={t_max}; "
            "the bubble carries too much mass for these constraints"
        )
    k = cross[-1]
    t0 = brentq(P, ts[k], ts[k + 1], xtol=1e-14)
    return build(t0)


def excited_state(params: PhysParams, ground: StationaryState, init=None, tol: float = 1e-8,
                  max_iter: int = 5000, epsilon: float = 0.1, grid: RadialGrid | None = None,
                  soliton: SolitonW | None = None, c_sob: float | None = None,
                  armijo: float = 1e-4, cutoff_radius: float = 1.0) -> StationaryState:
    """Minimizer of E on the Pohozaev-minus set at the ground state's masses.

    Every iterate is kept on ``P = 0`` with ``Psi''(1) < 0``: the fiber
    maximum of each iterate sits at ``s = 1``, so the reduced functional
    ``u -> max_s E(s * u)`` equals ``E(u)`` and its gradient is the
    constraint-tangent gradient of E.  A step is the preconditioned gradient
    projected onto the tangent space of ``{Q1, Q2, P}``, followed by a
    mass-preserving Newton retraction onto ``P = 0``; Armijo backtracking
    acts on E and rejects steps that leave the minus branch or M.

    Parameters
    ----------
    params : PhysParams
    ground : StationaryState
        Fixes the energy window and seeds the default initial data.
    init : FieldTriple or ndarray, optional
        Defaults to ``excited_init(ground, epsilon)``.
    grid : RadialGrid, optional
        Grid of the excited state; defaults to the ground-state grid.  The
        bubble needs ``dr`` well below its scale, which is usually much finer
        than the ground state requires.
    tol : float
        Stop when the preconditioned relative residual and ``|P|/||grad u||^2``
        are both below ``tol``.
    """
    soliton = soliton or reference_soliton()
    c_sob = c_sob or sobolev_constant()
    grid = grid or ground.u.grid
    a1, a2, alpha = params.a1, params.a2, params.alpha
    if init is None:
        d = excited_init(ground, epsilon, cutoff_radius=cutoff_radius, grid=grid)
    else:
        d = np.real(init.data if isinstance(init, FieldTriple) else np.asarray(init)).copy()
    shifts = np.maximum([ground.lambda1, ground.lambda2, ground.lambda3], 1e-12)
    d, ok = _retract_pohozaev(grid, d, a1, a2, alpha, shifts)
    if not ok:
        raise GeometryError("initial data could not be placed on the Pohozaev set")
    P, d2, f = _pohozaev_parts(grid, d, alpha, 1.0)
    if d2 >= 0:
        raise GeometryError("initial data lies on the plus branch of the Pohozaev set")
    E = 0.5 * f.grad_sq - f.sextic / 6.0 - alpha * f.cubic
    tau = 1.0
    history = []
    converged = False
    res = np.inf
    l1 = l2 = 0.0
    it = 0
    for it in range(max_iter + 1):
        f = _check_admissible(grid, d)
        g0 = _free_gradient(grid, d, alpha, 1.0)
        gp = _pohozaev_gradient(grid, d, alpha, 1.0)
        n1, n2 = _mass_normals(d)
        normals = [n1, n2, gp]
        pg = _precondition(grid, g0, shifts)
        pn = [_precondition(grid, x, shifts) for x in normals]
        A = np.array([[_ip(grid, normals[i], pn[k]) for k in range(3)] for i in range(3)])
        rhs = -np.array([_ip(grid, normals[i], pg) for i in range(3)])
        l1, l2, mu = np.linalg.solve(A, rhs)
        grad = g0 + l1 * n1 + l2 * n2 + mu * gp
        step = -(pg + l1 * pn[0] + l2 * pn[1] + mu * pn[2])
        slope = _ip(grid, grad, step)
        P = f.grad_sq - f.sextic - 1.5 * alpha * f.cubic
        res = np.sqrt(max(-slope, 0.0) / f.grad_sq)
        history.append((it, E, res, P, mu))
        if res < tol and abs(P) < tol * f.grad_sq:
            converged = True
            break
        if it == max_iter:
            break
        shifts = np.maximum([l1, l2, l1 + l2], 1e-3 * max(abs(ground.lambda1), abs(ground.lambda2), 1e-12))
        while True:
            trial, ok = _retract_pohozaev(grid, d + tau * step, a1, a2, alpha, shifts)
            Pt, d2t, ft = _pohozaev_parts(grid, trial, alpha, 1.0)
            Et = 0.5 * ft.grad_sq - ft.sextic / 6.0 - alpha * ft.cubic
            if not (ok and d2t < 0 and ft.cubic > 0):
                Et = np.inf
            if Et <= E + armijo * tau * slope + 1e-14 * abs(E) or tau < 1e-12:
                break
            tau *= 0.5
        if not np.isfinite(Et):
            log.warning("excited_state: line search failed at iteration %d", it)
            break
        d, E = trial, Et
        tau = min(1.5 * tau, 1.0)
    if not converged:
        log.warning("excited_state: no convergence after %d iterations (residual %.3e)", it, res)
    state = _finish(grid, d, l1, l2, alpha, a1, a2, 1.0, it, res, converged, history, tol)
    try:
        sigma = fiber_critical_points(state.u, alpha).sigma_u
    except GeometryError:
        sigma = float("nan")
    upper = ground.energy + c_sob**1.5 / 3.0
    state.certificate = {
        "classification_minus": state.classification == Classification.MINUS,
        "fiber_maximum_at_one": float(sigma),
        "ground_energy": ground.energy,
        "window_upper": float(upper),
        "energy_in_window": bool(ground.energy < state.energy < upper),
    }
    return state
