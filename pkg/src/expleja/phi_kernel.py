"""Scalar phi functions, Leja nodes on [-2, 2] and Newton divided differences.

The phi functions are phi_0(z) = exp(z) and phi_{l+1}(z) = (phi_l(z) - 1/l!) / z.
Divided differences of phi_l(c + gamma*xi) at Leja nodes xi_k are taken from
the first column of phi_l applied to a lower bidiagonal matrix (Opitz), which
stays accurate where the textbook recurrence loses every digit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

MAX_PHI_ORDER = 8
MAX_NODES = 512
DEFAULT_RESOLUTION = 10_000

# below this modulus the recursion cancels; a truncated Taylor series is used
SERIES_SWITCH = 2.0
SERIES_TERMS = 30


@dataclass(frozen=True)
class LejaSequence:
    nodes: np.ndarray
    count: int

    def __post_init__(self):
        self.nodes.setflags(write=False)

    def prefix(self, m):
        """First ``m`` nodes as a tuple (hashable, used as a cache key)."""
        return tuple(float(x) for x in self.nodes[:m])


@dataclass(frozen=True)
class DividedDifferenceTable:
    phi_order: int
    shift: float
    scale: float
    coefficients: np.ndarray

    def newton_eval(self, nodes, xi):
        """Evaluate the Newton form at scalar or array ``xi`` (in the [-2, 2] variable)."""
        xi = np.asarray(xi, dtype=float)
        d = self.coefficients
        out = np.full_like(xi, d[-1])
        for k in range(len(d) - 2, -1, -1):
            out = out * (xi - nodes[k]) + d[k]
        return out


def phi_scalar(l, z):
    """phi_l(z) for real z and 0 <= l <= 8, relative error around 1e-14."""
    if l < 0 or l > MAX_PHI_ORDER:
        raise ValueError(f"phi order must be in [0, {MAX_PHI_ORDER}], got {l}")
    z = float(z)
    if l == 0:
        return math.exp(z)
    if abs(z) < SERIES_SWITCH:
        term = 1.0 / math.factorial(l)
        total = 0.0
        for k in range(SERIES_TERMS):
            total += term
            term *= z / (k + l + 1)
        return total
    val = math.exp(z)
    for k in range(l):
        val = (val - 1.0 / math.factorial(k)) / z
    return val


def candidate_grid(resolution):
    # 4*i/res - 2 keeps the endpoints and the midpoint exact
    return 4.0 * np.arange(resolution + 1, dtype=float) / resolution - 2.0


@lru_cache(maxsize=16)
def _leja_nodes(count, resolution):
    grid = candidate_grid(resolution)
    # reversed so argmax breaks ties toward the rightmost candidate
    rgrid = grid[::-1].copy()
    nodes = np.empty(count)
    nodes[0] = rgrid[np.argmax(np.abs(rgrid))]
    logprod = np.zeros_like(rgrid)
    with np.errstate(divide="ignore"):
        for j in range(1, count):
            logprod += np.log(np.abs(rgrid - nodes[j - 1]))
            nodes[j] = rgrid[np.argmax(logprod)]
    return nodes


def generate_leja(count, candidate_resolution=DEFAULT_RESOLUTION):
    """Greedy Leja sequence on a uniform candidate grid over [-2, 2].

    Distance products are accumulated as sums of logarithms. Ties go to the
    larger candidate, so the sequence starts 2, -2, 0, ...
    """
    if count < 1:
        raise ValueError("count must be positive")
    if candidate_resolution < DEFAULT_RESOLUTION:
        raise ValueError("candidate_resolution must be at least 1e4")
    if count > candidate_resolution:
        raise ValueError("count cannot exceed candidate_resolution")
    return LejaSequence(nodes=_leja_nodes(count, candidate_resolution).copy(), count=count)


@lru_cache(maxsize=256)
def _phi_first_columns(shift, scale, nodes, max_order):
    """Divided differences of phi_0..phi_max_order at ``shift + scale*nodes``.

    Returns an array of shape (max_order + 1, len(nodes)). Built from one
    matrix exponential of the augmented matrix [[M, E], [0, J]], where M is
    lower bidiagonal with diagonal shift + scale*xi_k and subdiagonal scale,
    E carries e_0 in its first column and J is the nilpotent upper shift.
    Column n + k - 1 of the top block is phi_k(M) e_0.
    """
    n = len(nodes)
    size = n + max_order
    aug = np.zeros((size, size))
    idx = np.arange(n)
    aug[idx, idx] = shift + scale * np.asarray(nodes)
    aug[idx[1:], idx[:-1]] = scale
    if max_order > 0:
        aug[0, n] = 1.0
        for k in range(max_order - 1):
            aug[n + k, n + k + 1] = 1.0
    with np.errstate(all="ignore"):
        big = expm(aug)
    cols = np.empty((max_order + 1, n))
    cols[0] = big[:n, 0]
    for k in range(1, max_order + 1):
        cols[k] = big[:n, n + k - 1]
    if not np.all(np.isfinite(cols)):
        raise OverflowError(
            f"non-finite divided differences for shift={shift:g}, scale={scale:g}, nodes={n}"
        )
    cols.setflags(write=False)
    return cols


def phi_divided_differences(max_order, shift, scale, nodes):
    """Tables for every order 0..max_order at once; ``nodes`` is a tuple."""
    if len(nodes) > MAX_NODES:
        raise ValueError(f"at most {MAX_NODES} nodes are supported")
    if scale <= 0:
        raise ValueError("scale must be positive")
    return _phi_first_columns(float(shift), float(scale), tuple(nodes), int(max_order))


def divided_differences(l, c, gamma, nodes):
    """Newton coefficients of xi -> phi_l(c + gamma*xi) at the given nodes.

    Parameters
    ----------
    l : int
        phi order.
    c, gamma : float
        Shift and (positive) scale of the map from [-2, 2].
    nodes : LejaSequence or sequence of float
        Interpolation nodes, at most 512.

    Returns
    -------
    DividedDifferenceTable
    """
    if isinstance(nodes, LejaSequence):
        nodes = nodes.nodes
    nodes = tuple(float(x) for x in nodes)
    if l < 0 or l > MAX_PHI_ORDER:
        raise ValueError(f"phi order must be in [0, {MAX_PHI_ORDER}], got {l}")
    cols = phi_divided_differences(l, c, gamma, nodes)
    return DividedDifferenceTable(
        phi_order=l, shift=float(c), scale=float(gamma), coefficients=cols[l].copy()
    )
