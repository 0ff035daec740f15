"""Action of phi_l(A*dt) on a vector by Newton interpolation at Leja points.

Only matrix-vector products with A are needed. The spectrum is assumed to
lie near the real segment [alpha, 0]; alpha comes from a few power
iterations, which are charged to the same matvec counter as the
interpolation itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BreakdownError, NonConvergence
from .phi_kernel import DEFAULT_RESOLUTION, MAX_NODES, generate_leja, phi_divided_differences

DEGENERATE_WIDTH = 1e-13
# divided-difference tables are computed on this many nodes first, then doubled
_FIRST_TABLE = 64
_PROBE_SEED = 20220412
# one expm yields phi_0.._TABLE_ORDER, enough for every stage of the exponential schemes
_TABLE_ORDER = 4


class OperatorHandle:
    """Matrix-free linear operator with a matvec counter.

    Parameters
    ----------
    dimension : int
        Length of the vectors the operator acts on.
    apply : callable
        ``apply(v)`` returns ``A @ v``.
    """

    def __init__(self, dimension, apply):
        self.dimension = int(dimension)
        self._apply = apply
        self.matvec_counter = 0

    def apply(self, v):
        self.matvec_counter += 1
        return self._apply(v)

    __call__ = apply

    @classmethod
    def from_matrix(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a.shape[0], lambda v: a @ v)


@dataclass(frozen=True)
class SpectralBounds:
    alpha: float
    nu: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.alpha <= self.nu <= 0.0:
            raise ValueError(f"need alpha <= nu <= 0, got alpha={self.alpha}, nu={self.nu}")

    def frame(self, dt=1.0):
        """(c, gamma) mapping [-2, 2] onto [alpha*dt, nu*dt]."""
        lo, hi = self.alpha * dt, self.nu * dt
        return 0.5 * (lo + hi), 0.25 * (hi - lo)


@dataclass
class ApplyResult:
    vector: np.ndarray
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def probe_vector(n):
    """Deterministic start vector for power iteration.

    A constant vector is useless here: it lies in the kernel of every
    periodic difference stencil.
    """
    v = np.random.default_rng(_PROBE_SEED).standard_normal(n)
    return v / np.linalg.norm(v)


def estimate_spectral_bounds(op, iterations=20, safety=1.25):
    """Power-iteration bound on the spectral radius, returned as [alpha, 0].

    Raises
    ------
    BreakdownError
        If an iterate collapses to zero.
    """
    if op.dimension < 2:
        raise ValueError("operator dimension must be at least 2")
    if iterations < 10:
        raise ValueError("use at least 10 power iterations")
    v = probe_vector(op.dimension)
    rho = 0.0
    for _ in range(iterations):
        w = op.apply(v)
        rho = float(np.linalg.norm(w))
        if not rho > 1e-300:
            # remaining probes are still charged so accounting stays predictable
            op.matvec_counter += iterations - _ - 1
            raise BreakdownError("power iteration collapsed: operator is numerically zero")
        v = w / rho
    return SpectralBounds(alpha=-safety * rho, nu=0.0, beta=0.0)


def bounds_or_zero(op, iterations=20, safety=1.25):
    try:
        return estimate_spectral_bounds(op, iterations, safety)
    except BreakdownError:
        return SpectralBounds(alpha=0.0)


_LEJA_CACHE = {}


def leja_nodes(resolution=DEFAULT_RESOLUTION):
    seq = _LEJA_CACHE.get(resolution)
    if seq is None:
        seq = _LEJA_CACHE.setdefault(resolution, generate_leja(MAX_NODES, resolution))
    return seq


def apply_phi(op, l, v, dt, tol, bounds, max_iter=MAX_NODES, resolution=DEFAULT_RESOLUTION):
    """Approximate ``phi_l(A*dt) @ v`` by Leja interpolation.

    The Newton form is accumulated term by term; each term costs one matvec.
    Iteration stops once ``||d_n y_{n-1}|| <= tol * ||p_n||`` holds for two
    consecutive degrees.

    Raises
    ------
    NonConvergence
        If max_iter matvecs do not reach the tolerance; the caller rejects
        the step.
    """
    if max_iter > MAX_NODES:
        raise ValueError(f"max_iter cannot exceed {MAX_NODES}")
    v = np.asarray(v, dtype=float)
    phi0 = 1.0 / math.factorial(l)
    if abs(bounds.alpha) * dt < DEGENERATE_WIDTH:
        return ApplyResult(vector=phi0 * v, iterations=0, converged=True)
    vnorm = np.linalg.norm(v)
    if vnorm == 0.0:
        return ApplyResult(vector=np.zeros_like(v), iterations=0, converged=True)
    if not np.isfinite(vnorm):
        raise ValueError("input vector is not finite")

    c, gamma = bounds.frame(dt)
    nodes = leja_nodes(resolution).nodes
    size = min(_FIRST_TABLE, max_iter + 1)
    try:
        coeffs = phi_divided_differences(max(l, _TABLE_ORDER), c, gamma, tuple(nodes[:size]))[l]
    except OverflowError as exc:
        raise NonConvergence(str(exc)) from exc

    p = coeffs[0] * v
    y = v.copy()
    small_in_a_row = 0
    history = []
    for n in range(1, max_iter + 1):
        if n >= size:
            size = min(2 * size, max_iter + 1)
            try:
                coeffs = phi_divided_differences(max(l, _TABLE_ORDER), c, gamma, tuple(nodes[:size]))[l]
            except OverflowError as exc:
                raise NonConvergence(str(exc), iterations=n - 1) from exc
        # y <- ((A*dt - c)/gamma - xi_{n-1}) y
        y = (dt * op.apply(y) - c * y) / gamma - nodes[n - 1] * y
        term = coeffs[n] * y
        p = p + term
        tnorm = np.linalg.norm(term)
        pnorm = np.linalg.norm(p)
        history.append(tnorm)
        if not np.isfinite(pnorm):
            raise NonConvergence("Leja iterates diverged", iterations=n)
        if tnorm <= tol * pnorm:
            small_in_a_row += 1
            if small_in_a_row == 2:
                return ApplyResult(vector=p, iterations=n, converged=True, history=history)
        else:
            small_in_a_row = 0
    raise NonConvergence(
        f"phi_{l} interpolation not converged after {max_iter} matvecs "
        f"(interval width {abs(bounds.alpha) * dt:.3g})",
        iterations=max_iter,
    )
