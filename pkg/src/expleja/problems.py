"""Periodic finite-difference test problems on [0, 1] and [0, 1]^2.

Every problem exposes a matrix-free right-hand side f(u), the Jacobian
action J(u) v and the nonlinear remainder F(w) = f(w) - J(u) w. States are
flat arrays; 2D grids are stored row-major with axis 0 along x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = (
    "viscous_burgers_1d",
    "viscous_burgers_2d",
    "inviscid_burgers_1d",
    "inviscid_burgers_2d",
    "porous_medium_1d",
    "porous_medium_2d",
    "adr_1d",
)

# initial-condition constants
BUMP_CENTER, BUMP_WIDTH = 0.9, 0.02
EPS1 = EPS2 = 1e-2
OMEGA1, OMEGA2, PHASE = 2 * math.pi, 8 * math.pi, 0.3
WELL_LEFT, WELL_RIGHT = 0.25, 0.6
# advection speed used in the CFL reference for the inviscid problem (mean of its IC)
INVISCID_SPEED = 2.0


@dataclass(frozen=True)
class Grid:
    shape: tuple

    @property
    def dims(self):
        return len(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def dx(self):
        return tuple(1.0 / n for n in self.shape)

    def coordinates(self):
        """Node coordinates x_i = i/N, one array per axis (meshgrid for 2D)."""
        axes = [np.arange(n) / n for n in self.shape]
        if self.dims == 1:
            return axes
        return np.meshgrid(*axes, indexing="ij")


def stencil_advect(v, grid, axis=0):
    """Third-order upwind first derivative along ``axis``."""
    w = np.reshape(v, grid.shape)
    out = (
        -np.roll(w, -2, axis) + 6.0 * np.roll(w, -1, axis) - 3.0 * w - 2.0 * np.roll(w, 1, axis)
    ) / (6.0 * grid.dx[axis])
    return out.reshape(-1)


def stencil_diffuse(v, grid, axis=0):
    """Second-order centred second derivative along ``axis``."""
    w = np.reshape(v, grid.shape)
    out = (np.roll(w, -1, axis) - 2.0 * w + np.roll(w, 1, axis)) / grid.dx[axis] ** 2
    return out.reshape(-1)


def _bump(s):
    # exponent term -1/(1 - (2s-1)^2); the bump is continued by 0 where it blows up
    r = (2.0 * s - 1.0) ** 2
    inside = r < 1.0 - 1e-12
    out = np.zeros_like(s)
    out[inside] = -1.0 / (1.0 - r[inside])
    return out, inside


def heaviside(s):
    return np.where(s >= 0.0, 1.0, 0.0)


class Problem:
    """Interface shared by PDE problems and the synthetic test fixtures."""

    t_end: float
    size: int

    def rhs(self, u):
        raise NotImplementedError

    def jacobian_apply(self, u_base, v):
        raise NotImplementedError

    def remainder(self, u_base, w):
        return self.rhs(w) - self.jacobian_apply(u_base, w)

    def initial_condition(self):
        raise NotImplementedError

    def cfl_dt(self):
        raise NotImplementedError

    def cache_key(self):
        return None


class PDEProblem(Problem):
    """One of the periodic PDE benchmarks.

    Parameters
    ----------
    kind : str
        One of ``KINDS``.
    n_points : int or tuple
        N in 1D, (N_x, N_y) in 2D.
    eta : float or tuple
        Peclet number (per axis in 2D).
    m : int
        Porous-medium exponent (only 2 is supported).
    alpha_react : float
        Reaction rate of the ADR problem.
    """

    def __init__(self, kind, n_points, eta, m=2, alpha_react=1.0, t_end=None):
        if kind not in KINDS:
            raise ValueError(f"unknown problem kind {kind!r}")
        if m != 2:
            raise ValueError("only the m = 2 porous-medium equation is supported")
        self.kind = kind
        dims = 2 if kind.endswith("_2d") else 1
        shape = tuple(np.atleast_1d(n_points).astype(int).tolist())
        if len(shape) == 1 and dims == 2:
            shape = shape * 2
        if len(shape) != dims:
            raise ValueError(f"{kind} needs {dims} grid sizes, got {shape}")
        self.grid = Grid(shape)
        etas = tuple(float(e) for e in np.atleast_1d(eta))
        if len(etas) == 1:
            etas = etas * dims
        if len(etas) != dims:
            raise ValueError(f"{kind} needs {dims} Peclet numbers, got {etas}")
        if any(e <= 0 for e in etas):
            raise ValueError("Peclet numbers must be positive")
        self.eta = etas
        self.m = m
        self.alpha_react = float(alpha_react)
        self.size = self.grid.size
        self.t_end = float(t_end) if t_end is not None else self._default_t_end()

    @property
    def family(self):
        return self.kind.rsplit("_", 1)[0]

    def _default_t_end(self):
        if self.family in ("viscous_burgers", "porous_medium"):
            return 1e-2
        if self.family == "inviscid_burgers":
            return 3.25 * self.eta[0] * 1e-2
        return 5e-2

    def __repr__(self):
        return f"PDEProblem({self.kind!r}, {self.grid.shape}, eta={self.eta}, t_end={self.t_end:g})"

    def cache_key(self):
        return (self.kind, self.grid.shape, self.eta, self.t_end)

    def _adv(self, v, weights):
        out = 0.0
        for axis, w in enumerate(weights):
            out = out + w * stencil_advect(v, self.grid, axis)
        return out

    def _dif(self, v):
        out = 0.0
        for axis in range(self.grid.dims):
            out = out + stencil_diffuse(v, self.grid, axis)
        return out

    def rhs(self, u):
        fam = self.family
        if fam == "viscous_burgers":
            return self._adv(u * u, [0.5 * e for e in self.eta]) + self._dif(u)
        if fam == "inviscid_burgers":
            return self._adv(u * u, [0.5] * self.grid.dims)
        if fam == "porous_medium":
            return self._adv(u, self.eta) + self._dif(u * u)
        return self._adv(u, self.eta) + self._dif(u) + self.alpha_react * u * (u - 0.5) * (1.0 - u)

    def jacobian_apply(self, u_base, v):
        fam = self.family
        if fam == "viscous_burgers":
            return self._adv(u_base * v, self.eta) + self._dif(v)
        if fam == "inviscid_burgers":
            return self._adv(u_base * v, [1.0] * self.grid.dims)
        if fam == "porous_medium":
            return self._adv(v, self.eta) + self._dif(2.0 * u_base * v)
        react = self.alpha_react * (-3.0 * u_base**2 + 3.0 * u_base - 0.5)
        return self._adv(v, self.eta) + self._dif(v) + react * v

    def initial_condition(self):
        coords = self.grid.coordinates()
        fam = self.family
        if fam == "viscous_burgers":
            expo = 1.0
            support = True
            for s in coords:
                b, inside = _bump(s)
                expo = expo + b
                support = support & inside
            bump = np.where(support, np.exp(np.where(support, expo, 0.0)), 0.0)
            dist2 = sum((s - BUMP_CENTER) ** 2 for s in coords)
            u = 1.0 + bump + 0.5 * np.exp(-dist2 / (2.0 * BUMP_WIDTH**2))
        elif fam == "inviscid_burgers":
            u = 2.0
            for s in coords:
                u = u + EPS1 * np.sin(OMEGA1 * s) + EPS2 * np.sin(OMEGA2 * s + PHASE)
        elif fam == "porous_medium":
            u = 1.0
            for s in coords:
                u = u + heaviside(WELL_LEFT - s) + heaviside(s - WELL_RIGHT)
        else:
            (x,) = coords
            u = 256.0 * (x - x**2) ** 2 + 0.3
        return np.asarray(u, dtype=float).reshape(-1).copy()

    def cfl_dt(self):
        """Reference step min(1/(2N^2), 1/(eta N)), minimised over axes."""
        speeds = self.eta
        if self.family == "inviscid_burgers":
            speeds = (INVISCID_SPEED,) * self.grid.dims
        return min(
            min(1.0 / (2.0 * n * n), 1.0 / (s * n)) for n, s in zip(self.grid.shape, speeds)
        )


class LinearProblem(Problem):
    """f(u) = A u for a dense matrix; the remainder vanishes identically."""

    def __init__(self, matrix, u0, t_end=1.0, dt_cfl=None):
        self.matrix = np.asarray(matrix, dtype=float)
        self.u0 = np.asarray(u0, dtype=float)
        self.size = self.u0.size
        self.t_end = float(t_end)
        self._dt_cfl = dt_cfl
        self.kind = "linear"

    def rhs(self, u):
        return self.matrix @ u

    def jacobian_apply(self, u_base, v):
        return self.matrix @ v

    def remainder(self, u_base, w):
        return np.zeros_like(w)

    def initial_condition(self):
        return self.u0.copy()

    def cfl_dt(self):
        if self._dt_cfl is not None:
            return self._dt_cfl
        return self.t_end / 10.0

    def cache_key(self):
        return ("linear", self.matrix.tobytes(), self.u0.tobytes(), self.t_end)


def zero_problem(n=8, t_end=1.0):
    """f(u) = 0 with a non-constant initial state."""
    u0 = 1.0 + 0.1 * np.arange(n)
    return LinearProblem(np.zeros((n, n)), u0, t_end=t_end)


def make_problem(kind, n=None, eta=None, nx=None, ny=None, etax=None, etay=None, **kwargs):
    """Build a PDEProblem from CLI-style scalar parameters."""
    if kind.endswith("_2d"):
        shape = (nx or n, ny or n)
        etas = (etax or eta, etay or eta)
        if None in shape or None in etas:
            raise ValueError("2D problems need N (or Nx, Ny) and eta (or etax, etay)")
        return PDEProblem(kind, shape, etas, **kwargs)
    if n is None or eta is None:
        raise ValueError("1D problems need N and eta")
    return PDEProblem(kind, n, eta, **kwargs)
