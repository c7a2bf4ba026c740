"""Uniform-grid scalar fields, finite-difference calculus, and the double-well potential.

Fields are sampled on a rectangular grid with two boundary conventions:

* ``periodic``     -- the domain is a torus, node ``i`` spacing ``(x1-x0)/nx``,
                      the right/top edges are identified with the left/bottom.
* ``dirichlet-clamped`` -- nodes include both endpoints, spacing
                      ``(x1-x0)/(nx-1)``; stencils clamp ghost values to the
                      boundary sample (zero normal derivative behaviour, which
                      is the correct far field for well-saturated phases).

Values are stored row-major with the row index running over y, i.e. shape
``(ny, nx)`` with ``values[j, i]`` the sample at ``(x_i, y_j)``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

PERIODIC = "periodic"
CLAMPED = "dirichlet-clamped"
_BOUNDARIES = (PERIODIC, CLAMPED)


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid: vertex counts, domain corners, boundary mode."""

    nx: int
    ny: int
    x0: float
    y0: float
    x1: float
    y1: float
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs nx, ny >= 4, got {self.nx} x {self.ny}")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("domain corners must satisfy x1 > x0 and y1 > y0")
        if self.boundary not in _BOUNDARIES:
            raise ValueError(f"boundary must be one of {_BOUNDARIES}, got {self.boundary!r}")

    @property
    def hx(self) -> float:
        n = self.nx if self.boundary == PERIODIC else self.nx - 1
        return (self.x1 - self.x0) / n

    @property
    def hy(self) -> float:
        n = self.ny if self.boundary == PERIODIC else self.ny - 1
        return (self.y1 - self.y0) / n

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def x_nodes(self) -> np.ndarray:
        if self.boundary == PERIODIC:
            return self.x0 + self.hx * np.arange(self.nx)
        return np.linspace(self.x0, self.x1, self.nx)

    def y_nodes(self) -> np.ndarray:
        if self.boundary == PERIODIC:
            return self.y0 + self.hy * np.arange(self.ny)
        return np.linspace(self.y0, self.y1, self.ny)

    def mesh(self):
        """Return (X, Y) coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.x_nodes(), self.y_nodes(), indexing="xy")


@dataclass
class ScalarField:
    """A real-valued sample field on a grid at one instant."""

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0
    kind: str = "order-parameter"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.ny, self.grid.nx):
            raise ValueError(
                f"values shape {v.shape} does not match grid ({self.grid.ny}, {self.grid.nx})"
            )
        if np.isinf(v).any():
            raise ValueError("field contains non-finite (inf) values")
        if not self.kind.endswith("masked") and np.isnan(v).any():
            raise ValueError("field contains NaN values (only '*masked' kinds may)")
        self.values = v

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.time, self.kind)

    def with_values(self, values, time=None) -> "ScalarField":
        return ScalarField(self.grid, values, self.time if time is None else time, self.kind)


def potential_eval(u, order: int = 0):
    """Double-well potential W(u) = (1 - u^2)^2 / 4 and its first two derivatives.

    order 0 -> W, order 1 -> W' = u^3 - u, order 2 -> W'' = 3u^2 - 1.
    """
    u = np.asarray(u, dtype=np.float64)
    if order == 0:
        w = 1.0 - u * u
        out = 0.25 * w * w
    elif order == 1:
        out = u * u * u - u
    elif order == 2:
        out = 3.0 * u * u - 1.0
    else:
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    return out if out.ndim else float(out)


def _padded(values: np.ndarray, boundary: str) -> np.ndarray:
    mode = "wrap" if boundary == PERIODIC else "edge"
    return np.pad(values, 1, mode=mode)


def fd_gradient(f: ScalarField):
    """Central-difference gradient; returns the pair (df/dx, df/dy) of fields."""
    p = _padded(f.values, f.grid.boundary)
    fx = (p[1:-1, 2:] - p[1:-1, :-2]) / (2.0 * f.grid.hx)
    fy = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2.0 * f.grid.hy)
    return f.with_values(fx), f.with_values(fy)


def fd_laplacian(f: ScalarField):
    """Five-point Laplacian respecting the grid's boundary mode."""
    p = _padded(f.values, f.grid.boundary)
    c = p[1:-1, 1:-1]
    lap = (p[1:-1, 2:] - 2.0 * c + p[1:-1, :-2]) / f.grid.hx**2 \
        + (p[2:, 1:-1] - 2.0 * c + p[:-2, 1:-1]) / f.grid.hy**2
    return f.with_values(lap)


def fd_hessian(f: ScalarField):
    """Central second differences (f_xx, f_xy, f_yx, f_yy); f_yx is f_xy."""
    g = f.grid
    p = _padded(f.values, g.boundary)
    c = p[1:-1, 1:-1]
    fxx = (p[1:-1, 2:] - 2.0 * c + p[1:-1, :-2]) / g.hx**2
    fyy = (p[2:, 1:-1] - 2.0 * c + p[:-2, 1:-1]) / g.hy**2
    fxy = (p[2:, 2:] - p[2:, :-2] - p[:-2, 2:] + p[:-2, :-2]) / (4.0 * g.hx * g.hy)
    return f.with_values(fxx), f.with_values(fxy), f.with_values(fxy), f.with_values(fyy)


# --- snapshot persistence -------------------------------------------------
#
# A field snapshot is a two-file pair: <base>.json metadata sidecar and
# <base>.f64 raw payload of nx*ny little-endian float64, row-major (y-major).
# The round trip is bit exact.

def write_field(f: ScalarField, base: str) -> None:
    g = f.grid
    meta = {
        "nx": g.nx, "ny": g.ny,
        "x0": g.x0, "y0": g.y0, "x1": g.x1, "y1": g.y1,
        "boundary": g.boundary,
        "time": f.time,
        "kind": f.kind,
    }
    with open(base + ".json", "w") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    payload = np.ascontiguousarray(f.values, dtype="<f8")
    with open(base + ".f64", "wb") as fh:
        fh.write(payload.tobytes())


def read_field(base: str) -> ScalarField:
    with open(base + ".json") as fh:
        meta = json.load(fh)
    grid = GridSpec(meta["nx"], meta["ny"], meta["x0"], meta["y0"],
                    meta["x1"], meta["y1"], meta["boundary"])
    n = grid.nx * grid.ny
    with open(base + ".f64", "rb") as fh:
        raw = fh.read()
    if len(raw) != 8 * n:
        raise ValueError(f"payload {base}.f64 has {len(raw)} bytes, expected {8 * n}")
    values = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(grid.ny, grid.nx)
    return ScalarField(grid, values, meta["time"], meta.get("kind", "order-parameter"))
