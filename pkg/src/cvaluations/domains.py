"""Euclidean box grids and sphere quadratures.

Grid functions live on a uniform box in R^n (n = 1, 2, 3) and are taken to be
zero outside it, so the ambient space has infinite measure. Sphere functions
live on the nodes of a product quadrature of S^1 or S^2.

Both expose the same integration surface as
:class:`~cvaluations.lattice.SimpleFunction` (``re``, ``im``, ``weights``,
``infinite_total``), which is what the valuation engine consumes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .lattice import accumulate


class DomainError(ValueError):
    pass


class SupportOverflowError(DomainError):
    pass


class InvalidRotationError(DomainError):
    pass


def _frozen(a):
    a = np.array(a)
    a.flags.writeable = False
    return a


# -- Euclidean grids -------------------------------------------------------

@dataclass(frozen=True)
class BoxGrid:
    dimension: int
    bounds: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]

    @property
    def cell_size(self) -> np.ndarray:
        lo, hi = np.array(self.bounds).T
        return (hi - lo) / np.array(self.resolution)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell_size))

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    def centers(self, axis: int) -> np.ndarray:
        lo = self.bounds[axis][0]
        h = self.cell_size[axis]
        return lo + (np.arange(self.resolution[axis]) + 0.5) * h

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.centers(k) for k in range(self.dimension)), indexing="ij")


def make_box_grid(n: int, bounds: Sequence[Sequence[float]], resolution) -> BoxGrid:
    if n not in (1, 2, 3):
        raise DomainError(f"box grids support n = 1, 2, 3, got {n}")
    if isinstance(resolution, int):
        resolution = (resolution,) * n
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    resolution = tuple(int(r) for r in resolution)
    if len(bounds) != n or len(resolution) != n:
        raise DomainError("need one (lo, hi) pair and one resolution per axis")
    if any(not (math.isfinite(lo) and math.isfinite(hi) and hi > lo) for lo, hi in bounds):
        raise DomainError(f"invalid bounds {bounds}")
    if any(r < 2 for r in resolution):
        raise DomainError("resolution must be >= 2 on every axis")
    return BoxGrid(n, bounds, resolution)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: BoxGrid
    values: np.ndarray = field(repr=False)
    resampled: bool = False

    backend = "grid"
    infinite_total = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.resolution:
            raise DomainError(f"values shape {v.shape} does not match grid {self.grid.resolution}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def re(self) -> np.ndarray:
        return self.values.real.ravel()

    @property
    def im(self) -> np.ndarray:
        return self.values.imag.ravel()

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.grid.size, self.grid.cell_volume)

    def coordinates(self) -> np.ndarray:
        return np.stack([m.ravel() for m in self.grid.mesh()], axis=1)


def sample_on_grid(grid: BoxGrid, rule: Callable, buffer: int = 0) -> GridFunction:
    """Evaluate ``rule(*coords)`` at cell centers.

    ``buffer`` cells along every face are forced to zero so the function is
    compactly supported inside the box.
    """
    vals = np.broadcast_to(np.asarray(rule(*grid.mesh()), dtype=complex), grid.resolution).copy()
    if buffer:
        mask = np.zeros(grid.resolution, dtype=bool)
        inner = tuple(slice(buffer, r - buffer) for r in grid.resolution)
        mask[inner] = True
        vals[~mask] = 0
    return GridFunction(grid, vals)


def _support_box(values: np.ndarray):
    nz = np.nonzero(values)
    if not nz[0].size:
        return None
    return [(int(ix.min()), int(ix.max())) for ix in nz]


def translate(f: GridFunction, t, tol: float = 1e-9) -> GridFunction:
    """``g(x) = f(x - t)``.

    Cell-aligned shifts move samples by whole indices (exact). Other shifts
    resample the multilinear interpolant through the cell centers and mark
    the result ``resampled``.
    """
    grid = f.grid
    t = np.broadcast_to(np.asarray(t, dtype=float), (grid.dimension,))
    s = t / grid.cell_size
    aligned = np.all(np.abs(s - np.round(s)) <= tol)
    support = _support_box(f.values)
    if support is None:
        return GridFunction(grid, f.values, resampled=not aligned)
    for (lo, hi), sk, n in zip(support, s, grid.resolution):
        if lo + math.floor(sk) < 0 or hi + math.ceil(sk) > n - 1:
            raise SupportOverflowError(f"shift {t.tolist()} moves the support outside the box")
    if aligned:
        shift = tuple(int(round(x)) for x in s)
        return GridFunction(grid, np.roll(f.values, shift, axis=tuple(range(grid.dimension))))
    kw = dict(order=1, mode="grid-constant", cval=0.0, prefilter=False)
    re = ndimage.shift(f.values.real, s, **kw)
    im = ndimage.shift(f.values.imag, s, **kw)
    return GridFunction(grid, re + 1j * im, resampled=True)


# -- spheres -----------------------------------------------------------------

SURFACE = {2: 2 * math.pi, 3: 4 * math.pi}
# resolution at which linear resampling of smooth data stays within 1e-3
DEFAULT_SPHERE_ORDER = {2: 512, 3: 128}


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Product quadrature on S^{n-1}.

    For n = 2: ``n_az`` equispaced angles. For n = 3: Gauss-Legendre nodes in
    z = cos(polar angle) times ``n_az`` equispaced azimuths, stored polar-major.
    ``exact_degree`` is the largest total polynomial degree integrated exactly.
    """

    dimension: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    exact_degree: int
    n_az: int
    polar_z: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def surface_measure(self) -> float:
        return SURFACE[self.dimension]


def make_sphere_grid(n: int, order: int) -> SphereQuadrature:
    if n not in SURFACE:
        raise DomainError(f"sphere quadrature supports n = 2, 3, got {n}")
    if order < 1:
        raise DomainError("order must be >= 1")
    if n == 2:
        phi = 2 * math.pi * np.arange(order) / order
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        w = np.full(order, 2 * math.pi / order)
        return SphereQuadrature(2, _frozen(nodes), _frozen(w), order - 1, order)
    z, wz = np.polynomial.legendre.leggauss(order)
    n_az = 4 * math.ceil(2 * order / 4)
    phi = 2 * math.pi * np.arange(n_az) / n_az
    r = np.sqrt(1 - z ** 2)
    nodes = np.stack([
        np.outer(r, np.cos(phi)).ravel(),
        np.outer(r, np.sin(phi)).ravel(),
        np.repeat(z, n_az),
    ], axis=1)
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    w = np.repeat(wz * (2 * math.pi / n_az), n_az)
    return SphereQuadrature(3, _frozen(nodes), _frozen(w), 2 * order - 1, n_az, _frozen(z))


@dataclass(frozen=True, eq=False)
class SphereFunction:
    quad: SphereQuadrature
    values: np.ndarray = field(repr=False)
    resampled: bool = False

    backend = "sphere"
    infinite_total = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.quad.size,):
            raise DomainError(f"expected {self.quad.size} node values, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def re(self) -> np.ndarray:
        return self.values.real

    @property
    def im(self) -> np.ndarray:
        return self.values.imag

    @property
    def weights(self) -> np.ndarray:
        return self.quad.weights

    def coordinates(self) -> np.ndarray:
        return self.quad.nodes


def sample_on_sphere(quad: SphereQuadrature, rule: Callable) -> SphereFunction:
    """Evaluate ``rule(nodes)`` where ``nodes`` has shape ``(N, n)``."""
    vals = np.broadcast_to(np.asarray(rule(quad.nodes), dtype=complex), (quad.size,))
    return SphereFunction(quad, vals)


def integrate(func, values=None) -> float:
    """Integral of the real array ``values`` (default: ``func.re``) against the weights."""
    values = func.re if values is None else np.asarray(values, dtype=float).ravel()
    return accumulate(values * func.weights)


def rotation_matrix(angle: float, axis=None) -> np.ndarray:
    """Rotation by ``angle`` radians; about ``axis`` in 3D, planar if ``axis`` is None."""
    c, s = math.cos(angle), math.sin(angle)
    if axis is None:
        return np.array([[c, -s], [s, c]])
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * kx + (1 - c) * kx @ kx


def random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 2:
        return rotation_matrix(float(rng.uniform(0, 2 * math.pi)))
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _node_permutation(quad: SphereQuadrature, points: np.ndarray, tol: float = 1e-9):
    dist, idx = cKDTree(quad.nodes).query(points)
    if np.all(dist <= tol) and len(np.unique(idx)) == quad.size:
        return idx
    return None


def _lerp(a, b, t):
    # a + t*(b - a) reproduces a == b exactly
    return a + t * (b - a)


def _circle_interp(vals2d, phi, n_az):
    # vals2d: (rings, n_az); phi: per-target azimuth; returns (rings, targets)
    s = np.mod(phi, 2 * math.pi) / (2 * math.pi / n_az)
    j0 = np.floor(s).astype(int) % n_az
    j1 = (j0 + 1) % n_az
    t = s - np.floor(s)
    return _lerp(vals2d[:, j0], vals2d[:, j1], t)


def _resample(f: SphereFunction, pts: np.ndarray, method: str) -> np.ndarray:
    quad = f.quad
    if method == "nearest":
        _, idx = cKDTree(quad.nodes).query(pts)
        return f.values[idx]
    if method != "linear":
        raise DomainError(f"unknown resampling method {method!r}")
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    if quad.dimension == 2:
        return _circle_interp(f.values[None, :], phi, quad.n_az)[0]
    z = np.clip(pts[:, 2], -1.0, 1.0)
    rings = f.values.reshape(len(quad.polar_z), quad.n_az)
    zs = quad.polar_z
    i0 = np.clip(np.searchsorted(zs, z, side="right") - 1, 0, len(zs) - 2)
    tz = np.clip((z - zs[i0]) / (zs[i0 + 1] - zs[i0]), 0.0, 1.0)
    on_ring = _circle_interp(rings, phi, quad.n_az)
    cols = np.arange(len(pts))
    return _lerp(on_ring[i0, cols], on_ring[i0 + 1, cols], tz)


def rotate(f: SphereFunction, theta, method: str = "linear") -> SphereFunction:
    """``g(u) = f(theta^{-1} u)``.

    Rotations mapping the node set onto itself permute the samples exactly;
    any other orthogonal matrix resamples ``f`` and marks the result.
    """
    theta = np.asarray(theta, dtype=float)
    n = f.quad.dimension
    if theta.shape != (n, n):
        raise InvalidRotationError(f"expected a {n}x{n} matrix, got shape {theta.shape}")
    if np.linalg.norm(theta.T @ theta - np.eye(n)) > 1e-10:
        raise InvalidRotationError("matrix is not orthogonal")
    # rows of nodes @ theta are theta^T u = theta^{-1} u
    pre = f.quad.nodes @ theta
    perm = _node_permutation(f.quad, pre)
    if perm is not None:
        return SphereFunction(f.quad, f.values[perm])
    return SphereFunction(f.quad, _resample(f, pre, method), resampled=True)


# -- dumps ---------------------------------------------------------------------

AXES = ("x", "y", "z")


def csv_columns(func) -> list[str]:
    n = func.grid.dimension if isinstance(func, GridFunction) else func.quad.dimension
    return ["index", *AXES[:n], "re", "im", "weight"]


def write_csv(func, path) -> None:
    """Dump a grid or sphere function: ``index, x[, y[, z]], re, im, weight``."""
    coords = func.coordinates()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_columns(func))
        for i, (xyz, re, im, wt) in enumerate(zip(coords, func.re, func.im, func.weights)):
            w.writerow([i, *map(repr, xyz.tolist()), repr(float(re)), repr(float(im)), repr(float(wt))])
