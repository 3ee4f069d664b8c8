"""Uniform radial grids, 3D radial quadrature, derivatives and the sine transform.

Profiles are sampled on the interior nodes ``r_i = i*dr`` (``i = 1..n``) of
``[0, R]`` with ``dr = R/(n+1)``.  The origin and the outer wall are not
nodes: the origin is handled by even extension, the wall by the Dirichlet
condition of the substitution ``v = r*f``.

Two families of discrete operators live here.

* Reporting operators (``integrate_radial``, ``radial_derivative``,
  ``norms``): composite Simpson quadrature and fourth-order finite
  differences, usable on any sampled profile.
* Spectral operators (``RadialGrid.neg_laplacian``, ``RadialGrid.inner``,
  ``RadialGrid.kinetic``, ...): the Dirichlet sine basis of ``v = r*f``
  together with trapezoid weights ``4*pi*dr*r_i**2``.  These define the
  discrete Hamiltonian used by the solvers and the time integrator; the
  linear propagator is exact in this basis, which makes discrete energy
  conservation and stationarity mutually consistent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import InputError

__all__ = [
    "RadialGrid",
    "Field",
    "FieldTriple",
    "integrate_radial",
    "radial_derivative",
    "norms",
    "sine_transform",
    "inverse_sine_transform",
]

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform mesh of ``n`` interior nodes on ``[0, R]``.

    Parameters
    ----------
    R : float
        Domain radius.
    n : int
        Number of interior nodes (``n >= 16``).
    """

    R: float
    n: int
    dr: float = field(init=False)
    r: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)
    k2: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.R) and self.R > 0):
            raise InputError(f"grid radius must be positive, got R={self.R}")
        if int(self.n) != self.n or self.n < 16:
            raise InputError(f"grid needs n >= 16 interior nodes, got n={self.n}")
        n = int(self.n)
        dr = self.R / (n + 1)
        r = dr * np.arange(1, n + 1)
        k = np.pi * np.arange(1, n + 1) / self.R
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dr", dr)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "k2", k * k)
        object.__setattr__(self, "weights", FOUR_PI * dr * r * r)
        for arr in (r, k, self.k2, self.weights):
            arr.setflags(write=False)

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and self.R == other.R and self.n == other.n

    def __hash__(self):
        return hash((self.R, self.n))

    # -- spectral layer -------------------------------------------------
    def to_modes(self, f: np.ndarray) -> np.ndarray:
        """Sine coefficients of ``v = r*f``."""
        return sine_transform(self.r * f)

    def from_modes(self, b: np.ndarray) -> np.ndarray:
        """Profile ``f = v/r`` from sine coefficients of ``v``."""
        return inverse_sine_transform(b) / self.r

    def neg_laplacian(self, f: np.ndarray) -> np.ndarray:
        """``-Laplace(f)`` for a radial profile, exact on the sine basis of ``r*f``."""
        return self.from_modes(self.k2 * self.to_modes(f))

    def resolvent(self, f: np.ndarray, shift: float) -> np.ndarray:
        """Apply ``(-Laplace + shift)^{-1}``; ``shift`` must exceed ``-k_1**2``."""
        return self.from_modes(self.to_modes(f) / (self.k2 + shift))

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Real part of the 3D radial L2 pairing with trapezoid weights."""
        return float(np.real(np.sum(self.weights * np.conj(f) * g)))

    def integrate(self, f: np.ndarray) -> float:
        """Trapezoid value of ``4*pi*int f r^2 dr`` (spectrally accurate for
        smooth decaying profiles; the integrand vanishes at both ends)."""
        return float(np.real(np.sum(self.weights * f)))

    def mass(self, f: np.ndarray) -> float:
        return float(np.sum(self.weights * np.abs(f) ** 2))

    def kinetic(self, f: np.ndarray) -> float:
        """``||grad f||_2^2`` by Parseval on the sine coefficients of ``r*f``."""
        b = self.to_modes(f)
        return float(FOUR_PI * 0.5 * self.R * np.sum(self.k2 * np.abs(b) ** 2))


@dataclass(frozen=True, eq=False)
class Field:
    """A sampled radial profile on a shared grid."""

    grid: RadialGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.shape != (self.grid.n,):
            raise InputError(f"field has shape {s.shape}, grid expects ({self.grid.n},)")
        if not np.all(np.isfinite(s)):
            raise InputError("field contains non-finite samples")
        object.__setattr__(self, "samples", s)

    def decays(self, tol: float = 1e-6) -> bool:
        """True when the outermost sample is below ``tol`` times the peak."""
        peak = np.max(np.abs(self.samples))
        return peak == 0 or abs(self.samples[-1]) <= tol * peak


@dataclass(frozen=True, eq=False)
class FieldTriple:
    """Three components ``(u1, u2, u3)`` on one grid, stored as a (3, n) array."""

    grid: RadialGrid
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.shape != (3, self.grid.n):
            raise InputError(f"triple has shape {d.shape}, grid expects (3, {self.grid.n})")
        if not np.all(np.isfinite(d)):
            raise InputError("triple contains non-finite samples")
        object.__setattr__(self, "data", d)

    @classmethod
    def from_fields(cls, u1: Field, u2: Field, u3: Field) -> "FieldTriple":
        if not (u1.grid == u2.grid == u3.grid):
            raise InputError("components live on different grids")
        return cls(u1.grid, np.stack([u1.samples, u2.samples, u3.samples]))

    @property
    def components(self) -> tuple[Field, Field, Field]:
        return tuple(Field(self.grid, c) for c in self.data)

    def __getitem__(self, j: int) -> np.ndarray:
        return self.data[j]

    def replace(self, data: np.ndarray) -> "FieldTriple":
        return FieldTriple(self.grid, data)


def _samples(f) -> tuple[RadialGrid | None, np.ndarray]:
    if isinstance(f, Field):
        return f.grid, f.samples
    return None, np.asarray(f)


def _extrapolate_wall(f: np.ndarray) -> complex:
    # cubic through the last four nodes, evaluated one step beyond
    return -f[-4] + 4.0 * f[-3] - 6.0 * f[-2] + 4.0 * f[-1]


def integrate_radial(f, grid: RadialGrid | None = None) -> float:
    """Composite Simpson value of ``4*pi*int_0^R f(r) r^2 dr``.

    The node set is ``0, r_1, ..., r_n, R``.  The integrand vanishes at the
    origin (even extension of ``f`` leaves ``f(0) r^2 = 0``); the wall value is
    the cubic extrapolation of the last four samples.  When the interval
    count is odd the last three intervals use the 3/8 rule, keeping the
    rule exact for cubic integrands.

    Parameters
    ----------
    f : Field or ndarray
        Real samples at the grid nodes.
    grid : RadialGrid, optional
        Required when ``f`` is a bare array.
    """
    g, s = _samples(f)
    grid = grid or g
    if grid is None:
        raise InputError("integrate_radial needs a grid for bare arrays")
    if not np.all(np.isfinite(s)):
        raise InputError("integrand contains non-finite samples")
    s = np.real_if_close(s)
    y = np.empty(grid.n + 2, dtype=s.dtype)
    y[0] = 0.0
    y[1:-1] = s * grid.r**2
    y[-1] = _extrapolate_wall(s) * grid.R**2
    h = grid.dr
    m = grid.n + 1
    if m % 2 == 0:
        total = h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
    else:
        k = m - 3
        head = y[: k + 1]
        total = h / 3.0 * (head[0] + head[-1] + 4.0 * head[1:-1:2].sum() + 2.0 * head[2:-1:2].sum())
        tail = y[k:]
        total += 3.0 * h / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3])
    return float(FOUR_PI * total)


# one-sided fourth-order first-derivative stencils on five nodes
_FWD0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_FWD1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def radial_derivative(f, grid: RadialGrid | None = None, even: bool = True) -> np.ndarray:
    """Fourth-order centered ``d/dr`` with one-sided stencils at the ends.

    Parameters
    ----------
    f : Field or ndarray
        Samples at the interior nodes.
    grid : RadialGrid, optional
        Required when ``f`` is a bare array.
    even : bool
        Use the even extension ``f(-r) = f(r)`` across the origin, with
        ``f(0)`` from the even quartic through the first three nodes.  Set
        False for profiles that are not regular at the origin; one-sided
        stencils are then used there as well.
    """
    g, s = _samples(f)
    grid = grid or g
    if grid is None:
        raise InputError("radial_derivative needs a grid for bare arrays")
    if grid.n < 16:
        raise InputError("radial_derivative needs n >= 16")
    h = grid.dr
    out = np.empty_like(s, dtype=np.result_type(s, float))
    out[2:-2] = (s[:-4] - 8.0 * s[1:-3] + 8.0 * s[3:-1] - s[4:]) / (12.0 * h)
    if even:
        # f(0) from c0 + c2 r^2 + c4 r^4 through r_1, r_2, r_3
        f0 = 1.5 * s[0] - 0.6 * s[1] + 0.1 * s[2]
        out[1] = (f0 - 8.0 * s[0] + 8.0 * s[2] - s[3]) / (12.0 * h)
        # f(-r_1) = f(r_1): stencil at r_1 uses nodes -r_1, 0, r_2, r_3
        out[0] = (s[0] - 8.0 * f0 + 8.0 * s[1] - s[2]) / (12.0 * h)
    else:
        out[0] = _FWD0 @ s[:5] / h
        out[1] = _FWD1 @ s[:5] / h
    out[-1] = -(_FWD0 @ s[::-1][:5]) / h
    out[-2] = -(_FWD1 @ s[::-1][:5]) / h
    return out


def norms(f, grid: RadialGrid | None = None) -> tuple[float, float, float]:
    """``(||f||_2^2, ||grad f||_2^2, ||f||_6)`` by Simpson quadrature.

    The gradient uses ``radial_derivative`` with even extension at the origin.
    """
    g, s = _samples(f)
    grid = grid or g
    if grid is None:
        raise InputError("norms needs a grid for bare arrays")
    a = np.abs(s)
    mass = integrate_radial(a**2, grid)
    grad = integrate_radial(np.abs(radial_derivative(s, grid)) ** 2, grid)
    l6 = max(integrate_radial(a**6, grid), 0.0) ** (1.0 / 6.0)
    return mass, grad, l6


def sine_transform(v: np.ndarray) -> np.ndarray:
    """Coefficients ``b_k`` with ``v_i = sum_k b_k sin(k*pi*i/(n+1))``.

    Works along the last axis; complex input is transformed componentwise.
    """
    v = np.asarray(v)
    n = v.shape[-1]
    if np.iscomplexobj(v):
        return (sfft.dst(v.real, type=1, axis=-1) + 1j * sfft.dst(v.imag, type=1, axis=-1)) / (n + 1)
    return sfft.dst(v, type=1, axis=-1) / (n + 1)


def inverse_sine_transform(b: np.ndarray) -> np.ndarray:
    """Inverse of ``sine_transform``."""
    b = np.asarray(b)
    if np.iscomplexobj(b):
        return 0.5 * (sfft.dst(b.real, type=1, axis=-1) + 1j * sfft.dst(b.imag, type=1, axis=-1))
    return 0.5 * sfft.dst(b, type=1, axis=-1)
